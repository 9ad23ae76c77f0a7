# -*- coding: utf-8 -*-

from synforge.tree.ast import AstNode, ast_equal, bind, check_invariants, deserialize, serialize

__all__ = ['AstNode', 'ast_equal', 'bind', 'check_invariants', 'deserialize', 'serialize']
