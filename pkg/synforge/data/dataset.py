# -*- coding: utf-8 -*-

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from transformers.utils import logging

from synforge.data.canonicalize import abstract_strings, canonicalize, restore_placeholders
from synforge.errors import AstError, DataError
from synforge.grammar.grammar import Grammar
from synforge.lang import parse, render
from synforge.tree.ast import AstNode, bind

logger = logging.get_logger(__name__)

REQUIRED_FIELDS = ("id", "nl", "code")


@dataclass
class Example:
    id: str
    nl: str
    code: str
    src_tokens: List[str]
    ast: AstNode
    placeholders: Dict[int, str] = field(default_factory=dict)
    language: str = "minipy"

    def gold_code(self) -> str:
        """Gold tree rendered with placeholders restored."""
        return restore_placeholders(render(self.ast, self.language), self.placeholders)


class Corpus(list):
    """Examples of one file plus the (index, reason) of every skipped line."""

    def __init__(self, examples=(), skipped: Optional[List[Tuple[int, str]]] = None, path: Optional[str] = None):
        super().__init__(examples)
        self.skipped: List[Tuple[int, str]] = list(skipped or [])
        self.path = path


def read_jsonl(path: Union[str, Path]) -> List[Tuple[int, dict]]:
    records = []
    with open(path, encoding="utf-8") as f:
        for ix, line in enumerate(f):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"malformed JSON: {e.msg}", index=ix) from None
            if not isinstance(record, dict):
                raise DataError("expected a JSON object", index=ix)
            records.append((ix, record))
    return records


def make_example(record: dict, grammar: Grammar, language: str) -> Example:
    tokens, table = canonicalize(record["nl"])
    if not tokens:
        raise AstError("empty description")
    ast = bind(parse(abstract_strings(record["code"], table), language), grammar)
    return Example(str(record["id"]), record["nl"], record["code"], tokens, ast, table, language)


def load_dataset(path: Union[str, Path], grammar: Grammar, language: str) -> Corpus:
    """
    Read `{id, nl, code}` JSON-lines, parse every code field with the bundled
    parser of `language` and bind it to `grammar`. Examples that do not parse or
    are not derivable are skipped and counted.
    """
    corpus = Corpus(path=str(path))
    for ix, record in read_jsonl(path):
        missing = [key for key in REQUIRED_FIELDS if key not in record]
        if missing:
            raise DataError(f"missing field(s) {', '.join(missing)}", index=ix)
        try:
            corpus.append(make_example(record, grammar, language))
        except AstError as e:
            corpus.skipped.append((ix, str(e)))
            logger.warning(f"skipping example {record['id']!r} (line {ix + 1}): {e}")
    if corpus.skipped:
        logger.warning(f"{path}: skipped {len(corpus.skipped)} of {len(corpus) + len(corpus.skipped)} examples")
    logger.info(f"Loaded {len(corpus)} examples from {path}")
    return corpus


def write_jsonl(path: Union[str, Path], records) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
