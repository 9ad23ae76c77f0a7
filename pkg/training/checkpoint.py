# -*- coding: utf-8 -*-

"""
Single-file checkpoints.

Layout: 8 magic bytes, a little-endian uint32 manifest length, the UTF-8 JSON
manifest, then every tensor of the manifest's table as little-endian float32
in table order. The manifest carries the format version, the grammar (text
and hash), the vocabulary (tables and hash), the tensor table and the model
config, so a checkpoint decodes without any other file.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import torch
from transformers.utils import logging

from synforge.data.vocab import Vocab
from synforge.errors import CheckpointError, GrammarError
from synforge.grammar.grammar import Grammar, load_grammar
from synforge.models.syntax_parser import SyntaxParserConfig, SyntaxParserModel

logger = logging.get_logger(__name__)

MAGIC = b"SYNFORGE"
FORMAT_VERSION = 1
HEADER = struct.Struct("<I")


def save_checkpoint(path: Union[str, Path], model: SyntaxParserModel, grammar: Grammar, vocab: Vocab,
                    extra: Optional[dict] = None) -> None:
    tensors, table, offset = [], [], 0
    for name, tensor in model.state_dict().items():
        array = tensor.detach().cpu().to(torch.float32).numpy().astype("<f4").ravel()
        table.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        tensors.append(array)
        offset += array.size
    manifest = {
        "version": FORMAT_VERSION,
        "grammar_hash": grammar.grammar_hash,
        "grammar": grammar.to_text(),
        "vocab": vocab.to_dict(),
        "vocab_hash": vocab.vocab_hash,
        "tensors": table,
        "config": model.config.to_dict(),
        "extra": extra or {},
    }
    header = json.dumps(manifest, ensure_ascii=False, sort_keys=True).encode("utf-8")
    payload = np.concatenate(tensors).astype("<f4") if tensors else np.zeros(0, dtype="<f4")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(HEADER.pack(len(header)))
        f.write(header)
        f.write(payload.tobytes())
    logger.info(f"Saved checkpoint ({offset} parameters) to {path}")


def read_manifest(data: bytes) -> Tuple[dict, int]:
    if data[:len(MAGIC)] != MAGIC:
        raise CheckpointError("not a synforge checkpoint (bad magic bytes)")
    start = len(MAGIC) + HEADER.size
    if len(data) < start:
        raise CheckpointError("truncated checkpoint header")
    (length,) = HEADER.unpack(data[len(MAGIC):start])
    try:
        manifest = json.loads(data[start:start + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt checkpoint manifest: {e}") from None
    if manifest.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('version')!r}, "
                              f"expected {FORMAT_VERSION}")
    return manifest, start + length


def load_checkpoint(path: Union[str, Path], grammar: Optional[Grammar] = None,
                    dtype: torch.dtype = torch.float32) -> Tuple[SyntaxParserModel, Grammar, Vocab]:
    """
    Rebuild model, grammar and vocabulary. When `grammar` is given it must be
    the grammar the checkpoint was trained with (same hash).
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e.strerror}") from None
    manifest, offset = read_manifest(data)

    try:
        stored = load_grammar(manifest["grammar"])
    except GrammarError as e:
        raise CheckpointError(f"checkpoint grammar does not load: {e}") from None
    if stored.grammar_hash != manifest["grammar_hash"]:
        raise CheckpointError("checkpoint grammar text does not match its hash")
    if grammar is not None and grammar.grammar_hash != manifest["grammar_hash"]:
        raise CheckpointError(f"grammar hash mismatch: checkpoint has {manifest['grammar_hash'][:12]}, "
                              f"given grammar has {grammar.grammar_hash[:12]}")
    vocab = Vocab.from_dict(manifest["vocab"])
    if vocab.vocab_hash != manifest["vocab_hash"]:
        raise CheckpointError("checkpoint vocabulary does not match its hash")

    config = SyntaxParserConfig.from_dict(manifest["config"])
    if (config.num_productions != len(stored) or config.terminal_vocab_size != len(vocab.terminal)
            or config.src_vocab_size != len(vocab.source)):
        raise CheckpointError("model config does not match the stored grammar and vocabulary")
    model = SyntaxParserModel(config)

    payload = np.frombuffer(data, dtype="<f4", count=max(len(data) - offset, 0) // 4, offset=offset)
    expected = model.state_dict()
    if sorted(entry["name"] for entry in manifest["tensors"]) != sorted(expected):
        raise CheckpointError("tensor table does not match the model parameters")
    state = {}
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        if shape != tuple(expected[entry["name"]].shape):
            raise CheckpointError(f"shape mismatch for {entry['name']}: stored {shape}, "
                                  f"model {tuple(expected[entry['name']].shape)}")
        size = int(np.prod(shape)) if shape else 1
        chunk = payload[entry["offset"]:entry["offset"] + size]
        if chunk.size != size:
            raise CheckpointError(f"truncated payload at {entry['name']}")
        state[entry["name"]] = torch.from_numpy(chunk.copy()).reshape(shape)
    model.load_state_dict(state)
    model.to(dtype)
    model.eval()
    logger.info(f"Loaded checkpoint {path} ({stored!r}, {vocab!r})")
    return model, stored, vocab


def checkpoint_info(path: Union[str, Path]) -> dict:
    manifest, _ = read_manifest(Path(path).read_bytes())
    return {key: manifest[key] for key in ("version", "grammar_hash", "vocab_hash", "extra")}
