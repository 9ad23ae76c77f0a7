# -*- coding: utf-8 -*-

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from synforge.errors import TransitionError
from synforge.grammar.grammar import Grammar, NodeType
from synforge.transition.actions import CLOSE_ID, Action, ActionKind
from synforge.tree.ast import AstNode

MAX_TERMINAL_TOKENS = 32
Path = Tuple[int, ...]


def new_node(node_type: NodeType, label: Optional[str], step: Optional[int]) -> AstNode:
    return AstNode(node_type, label=label, created_step=step)


def find_frontier(tree: AstNode) -> Tuple[Optional[AstNode], Optional[Path]]:
    """First unexpanded nonterminal or unclosed variable terminal, depth-first and left-to-right."""
    stack: List[Tuple[AstNode, Path]] = [(tree, ())]
    while stack:
        node, path = stack.pop()
        if not node.is_expanded:
            return node, path
        if node.children:
            for ix in range(len(node.children) - 1, -1, -1):
                stack.append((node.children[ix], path + (ix,)))
    return None, None


class DerivationState:
    """
    Partial AST, frontier cursor and per-step bookkeeping.

    `parent_steps[t]` is the step that created the frontier node action `t`
    acted on (-1 for the root). Every GenToken step on one terminal shares that
    terminal's creation step. States are never mutated after construction;
    `apply_action` returns a new one.
    """

    __slots__ = ("tree", "frontier", "frontier_path", "history", "parent_steps")

    def __init__(self, tree: AstNode, history: Sequence[Action] = (), parent_steps: Sequence[int] = ()):
        self.tree = tree
        self.history: List[Action] = list(history)
        self.parent_steps: List[int] = list(parent_steps)
        self.frontier, self.frontier_path = find_frontier(tree)

    @property
    def t(self) -> int:
        return len(self.history)

    @property
    def is_complete(self) -> bool:
        return self.frontier is None

    @property
    def parent_step(self) -> int:
        """Parent step of the next action."""
        if self.frontier is None or self.frontier.created_step is None:
            return -1
        return self.frontier.created_step

    def __repr__(self) -> str:
        frontier = None if self.frontier is None else self.frontier.type.name
        return f"DerivationState(t={self.t}, frontier={frontier})"


def initial_state(grammar: Grammar) -> DerivationState:
    return DerivationState(new_node(grammar.root_type, None, None))


def legal_actions(
    state: DerivationState,
    grammar: Grammar,
    input_length: int,
    vocab_size: int = 0,
    max_terminal_tokens: int = MAX_TERMINAL_TOKENS,
) -> List[Action]:
    """
    Actions allowed at the frontier. `vocab_size` counts rows of the terminal
    vocabulary including the reserved close row 0, so GenVocab ranges over
    ids 1..vocab_size-1.
    """
    if state.is_complete:
        raise TransitionError("no legal actions on a complete derivation")
    frontier = state.frontier
    if frontier.type.is_nonterminal:
        return [Action.apply_rule(ix) for ix in grammar.productions_by_head.get(frontier.type.name, ())]
    n_tokens = len(frontier.tokens)
    actions = [Action.gen_close()] if n_tokens > 0 else []
    if n_tokens >= max_terminal_tokens:
        return actions
    actions.extend(Action.gen_vocab(ix) for ix in range(CLOSE_ID + 1, vocab_size))
    actions.extend(Action.gen_copy(ix) for ix in range(input_length))
    return actions


def _navigate(tree: AstNode, path: Path) -> AstNode:
    node = tree
    for ix in path:
        node = node.children[ix]
    return node


def apply_action(state: DerivationState, action: Action, grammar: Grammar) -> DerivationState:
    if state.is_complete:
        raise TransitionError(f"cannot apply {action} to a complete derivation")
    frontier = state.frontier
    t = state.t
    if action.kind == ActionKind.RULE:
        if not frontier.type.is_nonterminal:
            raise TransitionError(f"ApplyRule on terminal '{frontier.type.name}'")
        if action.arg is None or not 0 <= action.arg < len(grammar):
            raise TransitionError(f"unknown production {action.arg}")
        production = grammar.productions[action.arg]
        if production.head != frontier.type:
            raise TransitionError(f"'{production}' cannot expand '{frontier.type.name}'")
    else:
        if not frontier.type.is_variable:
            raise TransitionError(f"GenToken on nonterminal '{frontier.type.name}'")
        if action.kind == ActionKind.CLOSE and not frontier.tokens:
            raise TransitionError(f"cannot close empty terminal '{frontier.type.name}'")
        if action.kind != ActionKind.CLOSE and action.token is None:
            raise TransitionError(f"{action} carries no surface token")

    tree = state.tree.copy()
    node = _navigate(tree, state.frontier_path)
    if action.kind == ActionKind.RULE:
        links = production.closure_chain or (production.id,)
        for rule_id in links:
            link = grammar.productions[rule_id]
            node.applied_rule = link.id
            node.children = [new_node(f.type, f.label, t) for f in link.fields]
            if len(links) > 1:
                node = node.children[0]
    elif action.kind == ActionKind.CLOSE:
        node.closed = True
    else:
        node.tokens.append(action.token)
    return DerivationState(tree, state.history + [action], state.parent_steps + [state.parent_step])


def replay(actions: Sequence[Action], grammar: Grammar) -> DerivationState:
    state = initial_state(grammar)
    for action in actions:
        state = apply_action(state, action, grammar)
    return state


def frontier_trace(actions: Sequence[Action], grammar: Grammar) -> Tuple[List[NodeType], List[int]]:
    """Frontier node type and parent step seen by each action of a replayed sequence."""
    state = initial_state(grammar)
    frontiers: List[NodeType] = []
    for action in actions:
        if state.is_complete:
            raise TransitionError(f"action {action} follows a complete derivation")
        frontiers.append(state.frontier.type)
        state = apply_action(state, action, grammar)
    return frontiers, state.parent_steps
