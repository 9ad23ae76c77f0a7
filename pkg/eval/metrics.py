# -*- coding: utf-8 -*-

"""
Code generation metrics: exact match, token-level BLEU-4 and, for FlowDSL
recipes, channel and full-tree accuracy.

BLEU is nltk's sentence BLEU: clipped n-gram precisions for n = 1..4,
geometric mean and brevity penalty. An order n > 1 with no clipped match
scores 1 / candidates (add-one on the zero count), so short references keep
a finite score; no unigram match scores 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np
from nltk.translate.bleu_score import SmoothingFunction, sentence_bleu

from synforge.errors import AstError
from synforge.lang import flowdsl, language_grammar
from synforge.tree.ast import AstNode, ast_equal, bind

MAX_ORDER = 4
WEIGHTS = (1.0 / MAX_ORDER,) * MAX_ORDER
ADD_ONE = SmoothingFunction(epsilon=1.0).method1


def normalize_code(code: str) -> str:
    """Strip trailing whitespace per line and trailing blank lines."""
    return "\n".join(line.rstrip() for line in code.splitlines()).rstrip("\n")


def exact_match(pred: Optional[str], gold: str) -> int:
    if pred is None:
        return 0
    return int(normalize_code(pred) == normalize_code(gold))


def bleu4(pred: Sequence[str], gold: Sequence[str]) -> float:
    if len(gold) == 0:
        raise ValueError("BLEU is undefined for an empty reference")
    if len(pred) == 0:
        return 0.0
    return float(sentence_bleu([list(gold)], list(pred), weights=WEIGHTS, smoothing_function=ADD_ONE))


def corpus_accuracy(preds: Iterable[Optional[str]], golds: Iterable[str]) -> float:
    scores = [exact_match(p, g) for p, g in zip(preds, golds)]
    return float(np.mean(scores)) if scores else 0.0


def corpus_bleu(preds: Iterable[Sequence[str]], golds: Iterable[Sequence[str]]) -> float:
    """Mean of per-example BLEU-4."""
    scores = [bleu4(p, g) for p, g in zip(preds, golds)]
    return float(np.mean(scores)) if scores else 0.0


@dataclass
class DslAccuracy:
    channel: bool
    full: bool


def _recipe(ast: AstNode) -> AstNode:
    if ast.type.name != "root" or not ast.is_complete():
        raise AstError("expected a complete FlowDSL recipe tree")
    return bind(ast, language_grammar("flowdsl"))


def dsl_accuracy(pred: Optional[AstNode], gold: AstNode) -> DslAccuracy:
    """Channel accuracy compares trigger and action channels; full accuracy the whole tree."""
    gold = _recipe(gold)
    if pred is None:
        return DslAccuracy(False, False)
    pred = _recipe(pred)
    p, g = flowdsl.recipe_parts(pred), flowdsl.recipe_parts(gold)
    channel = p[0] == g[0] and p[2] == g[2]
    return DslAccuracy(channel, ast_equal(pred, gold))


def corpus_dsl_accuracy(preds: Sequence[Optional[AstNode]], golds: Sequence[AstNode]) -> dict:
    results: List[DslAccuracy] = [dsl_accuracy(p, g) for p, g in zip(preds, golds)]
    if not results:
        return {"channel_accuracy": 0.0, "full_accuracy": 0.0}
    return {
        "channel_accuracy": float(np.mean([r.channel for r in results])),
        "full_accuracy": float(np.mean([r.full for r in results])),
    }
