# -*- coding: utf-8 -*-

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from transformers.utils import logging

from synforge.errors import GrammarError
from synforge.grammar.grammar import Field, Grammar, NodeType, Production
from synforge.transition.actions import Action
from synforge.transition.oracle import oracle_actions
from synforge.transition.system import replay
from synforge.tree.ast import AstNode

logger = logging.get_logger(__name__)


def induce_grammar(asts: Sequence[AstNode], root_type: NodeType) -> Grammar:
    """
    Collect the node types and productions used by a corpus of complete trees.

    Node types are ordered root first, then by first occurrence; productions
    by first occurrence in a preorder walk of the corpus.
    """
    if len(asts) == 0:
        raise GrammarError("cannot induce a grammar from an empty corpus")
    types: Dict[str, NodeType] = {root_type.name: root_type}
    signatures: Dict[Tuple[str, Tuple[Tuple[str, str], ...]], Production] = {}
    for ix, ast in enumerate(asts):
        if ast.type != root_type:
            raise GrammarError(f"tree {ix} has root '{ast.type.name}', expected '{root_type.name}'")
        for node in ast.iter_preorder():
            known = types.setdefault(node.type.name, node.type)
            if known != node.type:
                raise GrammarError(f"inconsistent node usage: '{node.type.name}' is both "
                                   f"{known.kind.value} and {node.type.kind.value}")
            if not node.type.is_nonterminal:
                continue
            if node.children is None:
                raise GrammarError(f"tree {ix} is incomplete at '{node.type.name}'")
            fields = tuple(Field(c.label, c.type) for c in node.children)
            signature = (node.type.name, tuple((f.label, f.type.name) for f in fields))
            if signature not in signatures:
                signatures[signature] = Production(len(signatures), node.type, fields)
    grammar = Grammar(list(types.values()), list(signatures.values()), root_type)
    logger.info(f"Induced {grammar!r} from {len(asts)} trees")
    return grammar


def maximal_unary_chains(tree: AstNode) -> Iterator[Tuple[int, ...]]:
    """Yield the production ids of every maximal chain of >= 2 single-field expansions in a bound tree."""
    stack: List[Tuple[AstNode, bool]] = [(tree, False)]
    while stack:
        node, parent_unary = stack.pop()
        if node.children is None:
            continue
        unary = len(node.children) == 1
        if unary and not parent_unary:
            chain = []
            cur = node
            while cur.type.is_nonterminal and cur.children is not None and len(cur.children) == 1:
                chain.append(cur.applied_rule)
                cur = cur.children[0]
            if len(chain) >= 2 and None not in chain:
                yield tuple(chain)
        for child in reversed(node.children):
            stack.append((child, unary))


def unary_closure(grammar: Grammar, corpus: Iterable[Sequence[Action]], k: int) -> Grammar:
    """
    Add one closure production for every maximal unary chain that occurs at
    least `k` times in the trees derived by the corpus action sequences.
    """
    if k < 1:
        raise GrammarError(f"closure frequency threshold must be >= 1, got {k}")
    counts: Counter = Counter()
    for actions in corpus:
        state = replay(actions, grammar)
        counts.update(maximal_unary_chains(state.tree))
    frequent = sorted((chain for chain, n in counts.items() if n >= k), key=lambda c: (-counts[c], c))
    closed = grammar.with_closures(frequent)
    logger.info(f"Unary closure (k={k}) added {len(closed) - len(grammar)} productions "
                f"from {len(counts)} distinct chains")
    return closed


@dataclass
class GrammarStats:
    n_examples: int
    production_count: int
    closure_count: int
    node_type_count: int
    avg_actions: float
    max_actions: int

    def to_dict(self) -> dict:
        return asdict(self)


def grammar_stats(
    grammar: Grammar,
    asts: Sequence[AstNode],
    vocab: Optional[Mapping[str, int]] = None,
) -> GrammarStats:
    lengths = np.array([len(oracle_actions(ast, grammar, vocab)) for ast in asts], dtype=np.int64)
    return GrammarStats(
        n_examples=len(asts),
        production_count=len(grammar),
        closure_count=len(grammar.closures),
        node_type_count=len(grammar.node_types),
        avg_actions=float(lengths.mean()) if len(lengths) else 0.0,
        max_actions=int(lengths.max()) if len(lengths) else 0,
    )
