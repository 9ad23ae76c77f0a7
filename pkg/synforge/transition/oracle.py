# -*- coding: utf-8 -*-

from __future__ import annotations

import re
from typing import List, Mapping, Optional, Sequence, Tuple

from synforge.errors import OracleError
from synforge.grammar.grammar import Grammar, Production
from synforge.transition.actions import CLOSE_ID, UNK_ID, Action
from synforge.tree.ast import AstNode

CAMEL_BOUNDARY = re.compile(r"(?<=[a-z])(?=[A-Z])")


def tokenize_terminal(value: str, split_camel: bool = True) -> List[str]:
    """Split a terminal value on whitespace and, optionally, lower-to-upper case boundaries."""
    pieces = value.split()
    if not split_camel:
        return pieces
    return [token for piece in pieces for token in CAMEL_BOUNDARY.split(piece) if token]


def gen_token_action(token: str, vocab: Optional[Mapping[str, int]], src_tokens: Sequence[str]) -> Action:
    """In-vocabulary words are generated, unseen words present in the input are copied, the rest are <unk>."""
    positions = tuple(ix for ix, src in enumerate(src_tokens) if src == token)
    word_id = vocab.get(token) if vocab is not None else None
    if word_id is not None and word_id not in (CLOSE_ID, UNK_ID):
        return Action.gen_vocab(word_id, token, positions)
    if positions:
        return Action.gen_copy(positions[0], token, positions)
    return Action.gen_vocab(UNK_ID, token, ())


def _production_of(node: AstNode, grammar: Grammar) -> Production:
    if node.children is None:
        raise OracleError(f"incomplete tree: '{node.type.name}' is unexpanded")
    production = grammar.lookup(node.type.name, [(c.label, c.type.name) for c in node.children])
    if production is None:
        fields = " ".join(f"{c.label}:{c.type.name}" for c in node.children)
        raise OracleError(f"no production '{node.type.name} -> {fields}'")
    return production


def _unary_links(node: AstNode, production: Production, grammar: Grammar) -> List[Tuple[AstNode, Production]]:
    links = [(node, production)]
    while len(production.fields) == 1:
        child = node.children[0]
        if not child.type.is_nonterminal:
            break
        node, production = child, _production_of(child, grammar)
        if len(production.fields) != 1:
            break
        links.append((node, production))
    return links


def oracle_actions(
    ast: AstNode,
    grammar: Grammar,
    vocab: Optional[Mapping[str, int]] = None,
    src_tokens: Sequence[str] = (),
) -> List[Action]:
    """
    The unique action sequence that derives `ast` depth-first, left-to-right.

    When the grammar holds closure productions the longest closure matching the
    unary chain below a node is used in place of its links.
    """
    actions: List[Action] = []
    stack = [ast]
    while stack:
        node = stack.pop()
        if node.type.name not in grammar or grammar.node_type(node.type.name) != node.type:
            raise OracleError(f"node type '{node.type.name}' is foreign to the grammar")
        if node.type.is_nonterminal:
            production = _production_of(node, grammar)
            expanded = node
            if grammar.closures and len(production.fields) == 1:
                links = _unary_links(node, production, grammar)
                chain = tuple(p.id for _, p in links)
                for length in range(len(chain), 1, -1):
                    closure = grammar.closure_for_chain(chain[:length])
                    if closure is not None:
                        production = closure
                        expanded = links[length - 1][0]
                        break
            actions.append(Action.apply_rule(production.id))
            stack.extend(reversed(expanded.children))
        elif node.type.is_variable:
            if not node.closed or not node.tokens:
                raise OracleError(f"incomplete tree: terminal '{node.type.name}' is not closed")
            actions.extend(gen_token_action(token, vocab, src_tokens) for token in node.tokens)
            actions.append(Action.gen_close())
    return actions
