import math
import random

import pytest

from eval.metrics import (bleu4, corpus_accuracy, corpus_bleu, corpus_dsl_accuracy, dsl_accuracy, exact_match,
                          normalize_code)
from synforge.lang import flowdsl

WORDS = ["x", "=", "(", ")", "f", "y", "items", ".", "append", ",", "1"]


def reference_bleu(pred, gold):
    """Sentence BLEU-4 written from its definition: geometric mean of clipped precisions times brevity."""
    if not pred:
        return 0.0
    product = 1.0
    for n in (1, 2, 3, 4):
        pred_grams = [tuple(pred[i:i + n]) for i in range(len(pred) - n + 1)]
        gold_grams = [tuple(gold[i:i + n]) for i in range(len(gold) - n + 1)]
        hits = 0
        for gram in set(pred_grams):
            hits += min(pred_grams.count(gram), gold_grams.count(gram))
        denominator = max(len(pred_grams), 1)
        if hits == 0:
            if n == 1:
                return 0.0
            hits = 1
        product *= (hits / denominator) ** 0.25
    brevity = 1.0 if len(pred) > len(gold) else math.exp(1 - len(gold) / len(pred))
    return brevity * product


def test_bleu_matches_reference_on_random_pairs():
    rng = random.Random(0)
    for _ in range(20):
        gold = [rng.choice(WORDS) for _ in range(rng.randint(1, 15))]
        pred = [rng.choice(WORDS) for _ in range(rng.randint(1, 15))]
        assert bleu4(pred, gold) == pytest.approx(reference_bleu(pred, gold), abs=1e-9)


def test_bleu_edge_cases():
    gold = "x = f ( y )".split()
    assert bleu4(gold, gold) == pytest.approx(1.0)
    assert bleu4([], gold) == 0.0
    with pytest.raises(ValueError):
        bleu4(gold, [])
    # a short single-token reference keeps a finite score
    assert 0.0 < bleu4(["x"], ["x"]) <= 1.0
    # clipping: three candidate "a" against one reference "a"
    assert bleu4(["a", "a", "a"], ["a"]) == pytest.approx(reference_bleu(["a", "a", "a"], ["a"]))
    assert bleu4(["a", "a", "a"], ["a"]) == pytest.approx((1 / 3 * 1 / 2) ** 0.25)


def test_bleu_smooths_only_orders_without_matches():
    gold = "a b c d e".split()
    pred = "a b x d e".split()
    # 4/5 unigrams, 2/4 bigrams, no trigram or 4-gram match: 1/3 and 1/2 after smoothing
    assert bleu4(pred, gold) == pytest.approx((4 / 5 * 2 / 4 * 1 / 3 * 1 / 2) ** 0.25, abs=1e-12)


def test_exact_match_ignores_trailing_whitespace():
    assert normalize_code("x = 1   \ny = 2\n\n") == "x = 1\ny = 2"
    assert exact_match("x = 1  \n", "x = 1") == 1
    assert exact_match("x = 2", "x = 1") == 0
    assert exact_match(None, "x = 1") == 0
    assert corpus_accuracy(["a", None, "c"], ["a", "b", "c"]) == pytest.approx(2 / 3)
    assert corpus_bleu([], []) == 0.0


def _random_recipe(rng):
    tc = rng.choice(sorted(flowdsl.TRIGGERS))
    ac = rng.choice(sorted(flowdsl.ACTIONS))
    return flowdsl.recipe(tc, rng.choice(flowdsl.TRIGGERS[tc]), ac, rng.choice(flowdsl.ACTIONS[ac]))


def test_full_tree_accuracy_implies_channel_accuracy():
    rng = random.Random(0)
    golds, preds = [], []
    for ix in range(1000):
        gold = _random_recipe(rng)
        pred = gold.copy() if ix % 2 == 0 else _random_recipe(rng)
        result = dsl_accuracy(pred, gold)
        if result.full:
            assert result.channel
        if ix % 2 == 0:
            assert result.full
        golds.append(gold)
        preds.append(pred)
    scores = corpus_dsl_accuracy(preds, golds)
    assert scores["channel_accuracy"] >= scores["full_accuracy"] >= 0.5


def test_channel_accuracy_ignores_functions():
    gold = flowdsl.recipe("Gmail", "AnyNewEmailInInbox", "Dropbox", "AddFileFromURL")
    pred = flowdsl.recipe("Gmail", "NewEmailFromSearch", "Dropbox", "AppendToTextFile")
    result = dsl_accuracy(pred, gold)
    assert result.channel and not result.full
    assert dsl_accuracy(None, gold).channel is False
