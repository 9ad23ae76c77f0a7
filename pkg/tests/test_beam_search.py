import itertools

import pytest
import torch

from conftest import make_model
from synforge.inference import BeamSearch, beam_search, decode_corpus, greedy_decode
from synforge.lang import render
from synforge.transition.actions import UNK_ID, Action
from synforge.tree.ast import bind, check_invariants
from training.gradcheck import TOY_SOURCE, toy_setup


def _token_options(vocab):
    a, b = vocab.terminal["a"], vocab.terminal["b"]
    return [
        Action.gen_vocab(UNK_ID, "<unk>"),
        Action.gen_vocab(a, "a", (TOY_SOURCE.index("a"),)),
        Action.gen_vocab(b, "b", (TOY_SOURCE.index("b"),)),
        Action.gen_copy(0, "c", (0,)),
    ]


def _all_derivations(vocab):
    options = _token_options(vocab)
    close = Action.gen_close()
    for token in options:
        yield [Action.apply_rule(0), token, close]
    for left, right in itertools.product(options, repeat=2):
        yield [Action.apply_rule(1), left, close, right, close]


def _brute_force(model, grammar, vocab):
    src_ids = vocab.source.encode(TOY_SOURCE)
    scored = []
    with torch.no_grad():
        for actions in _all_derivations(vocab):
            scored.append((model.sequence_log_prob(src_ids, actions, grammar, vocab.terminal).item(), actions))
    return scored


@pytest.mark.parametrize("seed", range(20))
def test_exhaustive_beam_finds_the_argmax(seed):
    model, grammar, vocab, _ = toy_setup(seed)
    scored = _brute_force(model, grammar, vocab)
    assert len(scored) == 20
    best_score, best_actions = max(scored, key=lambda x: x[0])

    result = beam_search(TOY_SOURCE, model, grammar, vocab, beam_size=20, max_steps=20, max_terminal_tokens=1)
    assert result.complete
    assert len(result.hypotheses) == 20
    assert result.best.actions == best_actions
    assert result.best.score == pytest.approx(best_score, abs=1e-6)
    by_actions = {tuple(actions): score for score, actions in scored}
    for hyp in result.hypotheses:
        assert hyp.score == pytest.approx(by_actions[tuple(hyp.actions)], abs=1e-6)

    for k in (1, 5):
        narrow = beam_search(TOY_SOURCE, model, grammar, vocab, beam_size=k, max_steps=20, max_terminal_tokens=1)
        assert narrow.best.score <= best_score + 1e-6


def test_hypotheses_are_ranked():
    model, grammar, vocab, _ = toy_setup(seed=4)
    result = beam_search(TOY_SOURCE, model, grammar, vocab, beam_size=6, max_steps=20)
    scores = [h.score for h in result.hypotheses]
    assert scores == sorted(scores, reverse=True)
    assert all(h.is_complete for h in result.hypotheses)


def test_greedy_matches_width_one_beam(minipy_corpus, minipy_grammar, minipy_vocab, tiny_model):
    examples = minipy_corpus[:50]
    assert len(examples) == 50
    narrow = BeamSearch(tiny_model, minipy_grammar, minipy_vocab, beam_size=1, max_steps=150)
    for example in examples:
        greedy = greedy_decode(example.src_tokens, tiny_model, minipy_grammar, minipy_vocab, max_steps=150)
        beam = narrow.search(example.src_tokens)
        assert len(greedy.hypotheses) == 1
        assert greedy.complete == beam.complete, example.id
        assert greedy.best.actions == beam.best.actions, example.id
        assert greedy.best.score == pytest.approx(beam.best.score, abs=1e-9)
        if greedy.complete:
            src_ids = minipy_vocab.source.encode(example.src_tokens)
            with torch.no_grad():
                rescored = tiny_model.sequence_log_prob(src_ids, greedy.best.actions, minipy_grammar,
                                                        minipy_vocab.terminal).item()
            assert greedy.best.score == pytest.approx(rescored, abs=1e-6), example.id


def test_wider_beams_never_score_lower(minipy_corpus, minipy_grammar, minipy_vocab, tiny_model):
    widths = (1, 5, 15)
    searches = [BeamSearch(tiny_model, minipy_grammar, minipy_vocab, beam_size=k, max_steps=150) for k in widths]
    checked = 0
    for example in minipy_corpus[:40]:
        results = [search.search(example.src_tokens) for search in searches]
        if not all(r.complete for r in results):
            continue
        checked += 1
        scores = [r.best.score for r in results]
        for narrow, wide in zip(scores, scores[1:]):
            assert wide >= narrow - 1e-9, (example.id, dict(zip(widths, scores)))
    assert checked > 0


def test_copied_word_keeps_its_surface_form():
    model, grammar, vocab, _ = toy_setup(seed=2)
    result = beam_search(TOY_SOURCE, model, grammar, vocab, beam_size=20, max_steps=20, max_terminal_tokens=1)
    copied = [h for h in result.hypotheses if any(a.token == "c" for a in h.actions)]
    assert copied
    for hyp in copied:
        words = [tok for node in hyp.state.tree.iter_preorder() if node.tokens for tok in node.tokens]
        assert "c" in words


def test_search_arguments():
    model, grammar, vocab, _ = toy_setup(seed=1)
    with pytest.raises(ValueError):
        beam_search([], model, grammar, vocab)
    with pytest.raises(ValueError):
        BeamSearch(model, grammar, vocab, beam_size=0)
    with pytest.raises(ValueError):
        BeamSearch(model, grammar, vocab, max_steps=0)


def test_step_limit_returns_a_partial_result():
    model, grammar, vocab, _ = toy_setup(seed=1)
    result = beam_search(TOY_SOURCE, model, grammar, vocab, beam_size=3, max_steps=1)
    assert not result.complete
    assert len(result.hypotheses) == 1
    assert len(result.best.actions) == 1
    assert not result.best.is_complete


def test_threaded_decoding_keeps_input_order(minipy_corpus, minipy_grammar, minipy_vocab, tiny_model):
    inputs = [example.src_tokens for example in minipy_corpus[:8]]
    sequential = decode_corpus(inputs, tiny_model, minipy_grammar, minipy_vocab, beam_size=3, max_steps=60,
                               workers=1)
    threaded = decode_corpus(inputs, tiny_model, minipy_grammar, minipy_vocab, beam_size=3, max_steps=60,
                             workers=2)
    assert len(threaded) == len(inputs)
    for one, two in zip(sequential, threaded):
        assert one.complete == two.complete
        assert one.best.actions == two.best.actions
        assert one.best.score == pytest.approx(two.best.score, abs=1e-9)


def _assert_grammatical(examples, grammar, vocab, model):
    results = decode_corpus([e.src_tokens for e in examples], model, grammar, vocab, beam_size=15,
                            max_steps=150)
    for example, result in zip(examples, results):
        for hyp in result.hypotheses:
            if not hyp.is_complete:
                continue
            tree = hyp.state.tree
            check_invariants(tree, grammar)
            bind(tree, grammar)
            assert isinstance(render(tree, "minipy"), str), example.id


def test_decoded_trees_are_grammatical(minipy_corpus, minipy_grammar, minipy_vocab):
    model = make_model(minipy_grammar, minipy_vocab, seed=7)
    _assert_grammatical(minipy_corpus[:20], minipy_grammar, minipy_vocab, model)


@pytest.mark.slow
def test_decoded_trees_are_grammatical_on_a_hundred_inputs(minipy_corpus, minipy_grammar, minipy_vocab):
    model = make_model(minipy_grammar, minipy_vocab, seed=11)
    _assert_grammatical(minipy_corpus[-100:], minipy_grammar, minipy_vocab, model)
