# -*- coding: utf-8 -*-

from __future__ import annotations

import hashlib
import json
from collections import Counter
from collections.abc import Mapping
from typing import Iterable, Iterator, List, Sequence

from transformers.utils import logging

from synforge.transition.actions import CLOSE_TOKEN, UNK_ID, UNK_TOKEN

logger = logging.get_logger(__name__)

PAD_TOKEN = "<pad>"
SOURCE_SPECIALS = (PAD_TOKEN, UNK_TOKEN)
TERMINAL_SPECIALS = (CLOSE_TOKEN, UNK_TOKEN)


class VocabTable(Mapping):
    """token -> id table; both reserved tables keep <unk> at id 1."""

    def __init__(self, itos: Sequence[str]):
        self.itos: List[str] = list(itos)
        self.stoi = {token: ix for ix, token in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("vocabulary entries must be unique")
        if self.itos[UNK_ID] != UNK_TOKEN:
            raise ValueError(f"id {UNK_ID} must be {UNK_TOKEN}")

    def __getitem__(self, token: str) -> int:
        return self.stoi[token]

    def __iter__(self) -> Iterator[str]:
        return iter(self.itos)

    def __len__(self) -> int:
        return len(self.itos)

    @property
    def unk_id(self) -> int:
        return UNK_ID

    def encode(self, tokens: Iterable[str]) -> List[int]:
        return [self.stoi.get(token, UNK_ID) for token in tokens]

    def decode(self, ids: Iterable[int]) -> List[str]:
        return [self.itos[ix] for ix in ids]

    def __repr__(self) -> str:
        return f"VocabTable(size={len(self)})"


def frequency_table(counts: Counter, specials: Sequence[str], min_freq: int) -> VocabTable:
    """Specials first, then words with count >= min_freq by frequency desc, then lexicographically."""
    if min_freq < 1:
        raise ValueError(f"frequency threshold must be >= 1, got {min_freq}")
    words = sorted((w for w, n in counts.items() if n >= min_freq and w not in specials),
                   key=lambda w: (-counts[w], w))
    return VocabTable(list(specials) + words)


class Vocab:

    def __init__(self, source: VocabTable, terminal: VocabTable, d_source: int = 1, d_terminal: int = 1):
        if source.itos[:len(SOURCE_SPECIALS)] != list(SOURCE_SPECIALS):
            raise ValueError(f"source vocabulary must start with {SOURCE_SPECIALS}")
        if terminal.itos[:len(TERMINAL_SPECIALS)] != list(TERMINAL_SPECIALS):
            raise ValueError(f"terminal vocabulary must start with {TERMINAL_SPECIALS}")
        self.source = source
        self.terminal = terminal
        self.d_source = d_source
        self.d_terminal = d_terminal

    def to_dict(self) -> dict:
        return {
            "source": self.source.itos,
            "terminal": self.terminal.itos,
            "d_source": self.d_source,
            "d_terminal": self.d_terminal,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocab":
        return cls(VocabTable(data["source"]), VocabTable(data["terminal"]),
                   data.get("d_source", 1), data.get("d_terminal", 1))

    @property
    def vocab_hash(self) -> str:
        payload = json.dumps({"source": self.source.itos, "terminal": self.terminal.itos}, ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def __repr__(self) -> str:
        return f"Vocab(source={len(self.source)}, terminal={len(self.terminal)})"


def build_vocab(examples, d_source: int, d_terminal: int) -> Vocab:
    """
    Source words come from the canonicalized descriptions, terminal tokens from
    the variable terminals of the gold trees. Words seen fewer than d times
    are left out and map to <unk>.
    """
    source, terminal = Counter(), Counter()
    for example in examples:
        source.update(example.src_tokens)
        for node in example.ast.iter_preorder():
            if node.type.is_variable:
                terminal.update(node.tokens)
    vocab = Vocab(frequency_table(source, SOURCE_SPECIALS, d_source),
                  frequency_table(terminal, TERMINAL_SPECIALS, d_terminal), d_source, d_terminal)
    logger.info(f"Built {vocab!r} (d_source={d_source}, d_terminal={d_terminal})")
    return vocab
