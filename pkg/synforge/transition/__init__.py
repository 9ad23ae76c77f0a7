# -*- coding: utf-8 -*-

from synforge.transition.actions import (
    CLOSE_ID,
    CLOSE_TOKEN,
    UNK_ID,
    UNK_TOKEN,
    Action,
    ActionKind,
    dump_actions,
    load_actions,
)
from synforge.transition.oracle import gen_token_action, oracle_actions, tokenize_terminal
from synforge.transition.system import (
    MAX_TERMINAL_TOKENS,
    DerivationState,
    apply_action,
    find_frontier,
    frontier_trace,
    initial_state,
    legal_actions,
    replay,
)

__all__ = [
    'CLOSE_ID', 'CLOSE_TOKEN', 'UNK_ID', 'UNK_TOKEN', 'Action', 'ActionKind', 'dump_actions', 'load_actions',
    'gen_token_action', 'oracle_actions', 'tokenize_terminal',
    'MAX_TERMINAL_TOKENS', 'DerivationState', 'apply_action', 'find_frontier', 'frontier_trace', 'initial_state',
    'legal_actions', 'replay',
]
