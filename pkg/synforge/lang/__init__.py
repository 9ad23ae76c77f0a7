# -*- coding: utf-8 -*-

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import List

from synforge.errors import AstError, ConfigError
from synforge.grammar.grammar import Grammar, load_grammar_file
from synforge.lang import flowdsl, minipy
from synforge.tree.ast import AstNode, bind

LANGUAGES = {"minipy": minipy, "flowdsl": flowdsl}
GRAMMAR_DIR = Path(__file__).parent


def _language(language: str):
    try:
        return LANGUAGES[language]
    except KeyError:
        raise ConfigError(f"unknown language '{language}', expected one of {sorted(LANGUAGES)}") from None


def grammar_path(language: str) -> Path:
    _language(language)
    return GRAMMAR_DIR / f"{language}.grammar"


@lru_cache(maxsize=None)
def language_grammar(language: str) -> Grammar:
    """The bundled grammar of `language` (base productions only)."""
    return load_grammar_file(str(grammar_path(language)))


def render(ast: AstNode, language: str) -> str:
    """Surface code of a complete tree derivable under the bundled grammar of `language`."""
    module = _language(language)
    if not ast.is_complete():
        raise AstError("incomplete AST")
    bind(ast, language_grammar(language))
    return module.render(ast)


def parse(code: str, language: str) -> AstNode:
    return _language(language).parse(code)


def tokenize_code(code: str, language: str) -> List[str]:
    return _language(language).tokenize_code(code)


__all__ = ['LANGUAGES', 'grammar_path', 'language_grammar', 'parse', 'render', 'tokenize_code']
