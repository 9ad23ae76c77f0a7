# -*- coding: utf-8 -*-

from __future__ import annotations

import re
from typing import Dict, List, Mapping, Tuple

from transformers.utils import logging

from synforge.errors import DataError

logger = logging.get_logger(__name__)

# non-greedy single- or double-quoted span, no escapes
QUOTED = re.compile(r"(['\"])(.*?)\1")
PLACEHOLDER = re.compile(r"_STR:(\d+)_")
QUOTED_PLACEHOLDER = re.compile(r"(['\"])_STR:(\d+)_\1|_STR:(\d+)_")
WORD = re.compile(r"_STR:\d+_|[()\[\],:='\"]|[^\s()\[\],:='\"]+")
DOTTED = re.compile(r"^[A-Za-z_]\w*(?:\.[A-Za-z_]\w*)+$")


def placeholder(ix: int) -> str:
    return f"_STR:{ix}_"


def tokenize_description(text: str) -> List[str]:
    """
    Whitespace split with ( ) [ ] , : = ' " detached. A dotted reference is
    kept whole and followed by its parts: `self.makekey` -> self.makekey self makekey.
    """
    tokens = []
    for word in WORD.findall(text):
        tokens.append(word)
        if DOTTED.match(word):
            tokens.extend(word.split("."))
    return tokens


def canonicalize(description: str) -> Tuple[List[str], Dict[int, str]]:
    """Replace quoted spans by indexed placeholders, then tokenize."""
    table: Dict[int, str] = {}

    def substitute(match: re.Match) -> str:
        ix = len(table)
        table[ix] = match.group(2)
        return f" {placeholder(ix)} "

    text = QUOTED.sub(substitute, description)
    if "'" in text or '"' in text:
        logger.warning(f"unbalanced quotes left verbatim in {description!r}")
    return tokenize_description(text), table


def abstract_strings(code: str, table: Mapping[int, str]) -> str:
    """Replace string literals of `code` whose content is a placeholder value by that placeholder."""
    if not table:
        return code
    by_value = {value: ix for ix, value in sorted(table.items(), key=lambda kv: int(kv[0]), reverse=True)}

    def substitute(match: re.Match) -> str:
        quote, content = match.groups()
        if content in by_value:
            return f"{quote}{placeholder(int(by_value[content]))}{quote}"
        return match.group(0)

    return QUOTED.sub(substitute, code)


def restore_placeholders(code: str, table: Mapping[int, str], strict: bool = True) -> str:
    """
    Put placeholder values back: inside existing quotes verbatim, elsewhere as a
    quoted literal. Unknown indices raise unless `strict` is off, then they stay.
    """
    values = {int(k): v for k, v in table.items()}

    def substitute(match: re.Match) -> str:
        quote, quoted_ix, bare_ix = match.groups()
        ix = int(quoted_ix if quoted_ix is not None else bare_ix)
        if ix not in values:
            if not strict:
                return match.group(0)
            raise DataError(f"unknown placeholder {placeholder(ix)}")
        if quote is not None:
            return f"{quote}{values[ix]}{quote}"
        return f"'{values[ix]}'"

    return QUOTED_PLACEHOLDER.sub(substitute, code)
