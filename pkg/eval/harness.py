# -*- coding: utf-8 -*-

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from transformers.utils import logging

from eval.metrics import bleu4, corpus_dsl_accuracy, exact_match
from synforge.data.canonicalize import restore_placeholders
from synforge.data.dataset import Example
from synforge.errors import AstError
from synforge.grammar.grammar import Grammar
from synforge.inference import DecodeResult, Hypothesis, decode_corpus
from synforge.lang import render, tokenize_code
from synforge.transition.actions import action_to_record
from synforge.tree.ast import AstNode, deserialize, serialize

logger = logging.get_logger(__name__)

SIZE_BINS = (0, 10, 20, 30, 40, 60, 80, 120, np.inf)


def hypothesis_code(hyp: Hypothesis, language: str, placeholders: Dict[int, str]) -> Optional[str]:
    """Rendered code of a complete hypothesis with placeholders restored, None otherwise."""
    if not hyp.is_complete:
        return None
    return restore_placeholders(render(hyp.state.tree, language), placeholders, strict=False)


def prediction_record(example_id: str, result: DecodeResult, language: str, placeholders: Dict[int, str],
                      n_best: int = 1) -> dict:
    hypotheses = []
    for rank, hyp in enumerate(result.hypotheses[:n_best]):
        hypotheses.append({
            "rank": rank,
            "score": hyp.score,
            "actions": [action_to_record(a, t, p) for t, (a, p) in
                        enumerate(zip(hyp.actions, hyp.state.parent_steps))],
            "code": hypothesis_code(hyp, language, placeholders),
            "tree": serialize(hyp.state.tree) if hyp.is_complete else None,
        })
    return {"id": example_id, "complete": result.complete, "hypotheses": hypotheses}


def decode_examples(examples: Sequence[Example], model, grammar: Grammar, vocab, beam_size: int,
                    max_steps: int, n_best: int = 1, show_progress: bool = False,
                    **kwargs) -> List[dict]:
    if not examples:
        return []
    language = examples[0].language
    results = decode_corpus([e.src_tokens for e in examples], model, grammar, vocab, beam_size, max_steps,
                            show_progress=show_progress, **kwargs)
    return [prediction_record(e.id, r, language, e.placeholders, n_best) for e, r in zip(examples, results)]


def best_tree(record: dict) -> Optional[AstNode]:
    if not record["complete"] or not record["hypotheses"]:
        return None
    return deserialize(record["hypotheses"][0]["tree"])


def bucket_breakdown(per_example: Sequence[dict]) -> List[dict]:
    """Accuracy and BLEU grouped by reference tree size."""
    frame = pd.DataFrame(per_example)
    if frame.empty:
        return []
    frame["bucket"] = pd.cut(frame["ast_size"], bins=list(SIZE_BINS), right=True)
    grouped = frame.groupby("bucket", observed=True).agg(
        n_examples=("exact", "size"), accuracy=("exact", "mean"), bleu4=("bleu4", "mean"))
    rows = []
    for interval, row in grouped.iterrows():
        upper = None if np.isinf(interval.right) else int(interval.right)
        rows.append({"min_size": int(interval.left) + 1, "max_size": upper,
                     "n_examples": int(row["n_examples"]), "accuracy": float(row["accuracy"]),
                     "bleu4": float(row["bleu4"])})
    return rows


def evaluate_predictions(examples: Sequence[Example], predictions: Sequence[dict]) -> dict:
    """
    Score predictions against gold examples (matched by id). Report:
    {accuracy, bleu4, n_examples, per_example, size_buckets} plus, for FlowDSL,
    channel_accuracy and full_accuracy.
    """
    by_id = {p["id"]: p for p in predictions}
    per_example = []
    pred_trees, gold_trees = [], []
    for example in examples:
        record = by_id.get(example.id)
        gold = example.gold_code()
        pred = record["hypotheses"][0]["code"] if record and record["hypotheses"] else None
        gold_tokens = tokenize_code(gold, example.language)
        try:
            pred_tokens = tokenize_code(pred, example.language) if pred is not None else []
        except AstError:
            pred_tokens = pred.split()
        per_example.append({
            "id": example.id,
            "exact": exact_match(pred, gold),
            "bleu4": bleu4(pred_tokens, gold_tokens),
            "ast_size": example.ast.size(),
            "complete": bool(record and record["complete"]),
            "pred": pred,
            "gold": gold,
        })
        if example.language == "flowdsl":
            pred_trees.append(best_tree(record) if record else None)
            gold_trees.append(example.ast)

    report = {
        "n_examples": len(per_example),
        "accuracy": float(np.mean([r["exact"] for r in per_example])) if per_example else 0.0,
        "bleu4": float(np.mean([r["bleu4"] for r in per_example])) if per_example else 0.0,
        "per_example": per_example,
        "size_buckets": bucket_breakdown(per_example),
    }
    if gold_trees:
        report.update(corpus_dsl_accuracy(pred_trees, gold_trees))
    logger.info(f"accuracy {report['accuracy']:.4f} | bleu4 {report['bleu4']:.4f} | n={report['n_examples']}")
    return report


def average_reports(reports: Sequence[dict]) -> dict:
    """Mean and standard deviation of the headline metrics over runs (e.g. three seeds)."""
    keys = [k for k in ("accuracy", "bleu4", "channel_accuracy", "full_accuracy") if all(k in r for r in reports)]
    summary = {"n_runs": len(reports)}
    for key in keys:
        values = np.array([r[key] for r in reports], dtype=np.float64)
        summary[key] = float(values.mean())
        summary[f"{key}_std"] = float(values.std())
    return summary
