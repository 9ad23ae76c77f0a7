# -*- coding: utf-8 -*-

from synforge.grammar.grammar import (
    Field,
    Grammar,
    NodeKind,
    NodeType,
    Production,
    load_grammar,
    load_grammar_file,
)

__all__ = [
    'Field', 'Grammar', 'NodeKind', 'NodeType', 'Production',
    'load_grammar', 'load_grammar_file',
]
