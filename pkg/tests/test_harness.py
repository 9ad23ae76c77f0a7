import pytest

from eval.harness import average_reports, best_tree, decode_examples, evaluate_predictions
from synforge.tree.ast import serialize


def gold_record(example):
    return {"id": example.id, "complete": True,
            "hypotheses": [{"rank": 0, "score": 0.0, "actions": [], "code": example.gold_code(),
                            "tree": serialize(example.ast)}]}


def test_gold_predictions_score_perfectly(minipy_corpus):
    examples = minipy_corpus[:30]
    report = evaluate_predictions(examples, [gold_record(e) for e in examples])
    assert report["n_examples"] == 30
    assert report["accuracy"] == 1.0
    assert report["bleu4"] == pytest.approx(1.0)
    assert "channel_accuracy" not in report
    assert sum(bucket["n_examples"] for bucket in report["size_buckets"]) == 30


def test_flowdsl_reports_channel_and_full_accuracy(flowdsl_corpus):
    examples = flowdsl_corpus[:20]
    report = evaluate_predictions(examples, [gold_record(e) for e in examples])
    assert report["channel_accuracy"] == 1.0
    assert report["full_accuracy"] == 1.0


def test_missing_predictions_count_as_wrong(minipy_corpus):
    examples = minipy_corpus[:4]
    report = evaluate_predictions(examples, [gold_record(examples[0])])
    assert report["accuracy"] == 0.25
    assert [r["complete"] for r in report["per_example"]] == [True, False, False, False]
    assert best_tree({"complete": False, "hypotheses": []}) is None


def test_average_reports():
    summary = average_reports([{"accuracy": 0.5, "bleu4": 0.2}, {"accuracy": 0.7, "bleu4": 0.4},
                               {"accuracy": 0.6, "bleu4": 0.3}])
    assert summary["n_runs"] == 3
    assert summary["accuracy"] == pytest.approx(0.6)
    assert summary["bleu4_std"] == pytest.approx(0.0816496, abs=1e-6)
    assert "full_accuracy" not in summary


def test_decode_examples_writes_records(minipy_corpus, minipy_grammar, minipy_vocab, tiny_model):
    examples = minipy_corpus[:3]
    records = decode_examples(examples, tiny_model, minipy_grammar, minipy_vocab, beam_size=3, max_steps=40,
                              n_best=2)
    assert [r["id"] for r in records] == [e.id for e in examples]
    for record in records:
        assert 1 <= len(record["hypotheses"]) <= 2
        top = record["hypotheses"][0]
        assert top["rank"] == 0
        if record["complete"]:
            assert isinstance(top["code"], str)
            assert best_tree(record) is not None
        else:
            assert top["code"] is None and top["tree"] is None
        assert all(step["t"] == t for t, step in enumerate(top["actions"]))
    assert decode_examples([], tiny_model, minipy_grammar, minipy_vocab, 3, 40) == []
