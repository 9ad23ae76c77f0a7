# -*- coding: utf-8 -*-

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

from synforge.errors import TransitionError

# reserved rows of the terminal vocabulary (W_G)
CLOSE_ID = 0
UNK_ID = 1
CLOSE_TOKEN = "</n>"
UNK_TOKEN = "<unk>"


class ActionKind(str, Enum):
    RULE = "rule"
    VOCAB = "vocab"
    COPY = "copy"
    CLOSE = "close"


# tie-breaking order between equally scored actions
KIND_RANK = {ActionKind.RULE: 0, ActionKind.CLOSE: 1, ActionKind.VOCAB: 2, ActionKind.COPY: 3}


@dataclass(frozen=True)
class Action:
    """
    One derivation step: ApplyRule(rule id), GenVocab(word id), GenCopy(input position)
    or GenClose. Identity is (kind, arg).

    `token` is the surface word a GenVocab/GenCopy appends and `copy_positions`
    lists every input position holding that word, so the gen and copy routes
    of one surface token can be summed.
    """
    kind: ActionKind
    arg: Optional[int] = None
    token: Optional[str] = field(default=None, compare=False)
    copy_positions: Tuple[int, ...] = field(default=(), compare=False)

    @classmethod
    def apply_rule(cls, rule: int) -> "Action":
        return cls(ActionKind.RULE, rule)

    @classmethod
    def gen_vocab(cls, word_id: int, token: Optional[str] = None,
                  copy_positions: Sequence[int] = ()) -> "Action":
        return cls(ActionKind.VOCAB, word_id, token, tuple(copy_positions))

    @classmethod
    def gen_copy(cls, position: int, token: Optional[str] = None,
                 copy_positions: Optional[Sequence[int]] = None) -> "Action":
        positions = (position,) if copy_positions is None else tuple(copy_positions)
        return cls(ActionKind.COPY, position, token, positions)

    @classmethod
    def gen_close(cls) -> "Action":
        return cls(ActionKind.CLOSE, None, CLOSE_TOKEN)

    @property
    def is_rule(self) -> bool:
        return self.kind == ActionKind.RULE

    @property
    def is_gen_token(self) -> bool:
        return self.kind != ActionKind.RULE

    @property
    def sort_key(self) -> Tuple[int, int]:
        return KIND_RANK[self.kind], -1 if self.arg is None else self.arg

    def __str__(self) -> str:
        if self.kind == ActionKind.RULE:
            return f"ApplyRule[{self.arg}]"
        if self.kind == ActionKind.CLOSE:
            return f"GenToken[{CLOSE_TOKEN}]"
        return f"GenToken[{self.token if self.token is not None else self.arg}]"


def action_to_record(action: Action, t: int, parent: int) -> dict:
    record = {"t": t, "kind": action.kind.value, "arg": action.arg, "parent": parent}
    if action.kind in (ActionKind.VOCAB, ActionKind.COPY):
        record["token"] = action.token
        record["copy"] = list(action.copy_positions)
    return record


def action_from_record(record: dict) -> Action:
    try:
        kind = ActionKind(record["kind"])
        arg = record.get("arg")
        if kind == ActionKind.RULE:
            return Action.apply_rule(int(arg))
        if kind == ActionKind.CLOSE:
            return Action.gen_close()
        if kind == ActionKind.VOCAB:
            return Action.gen_vocab(int(arg), record.get("token"), record.get("copy", ()))
        return Action.gen_copy(int(arg), record.get("token"), record.get("copy") or None)
    except (KeyError, TypeError, ValueError) as e:
        raise TransitionError(f"malformed action record {record!r}: {e}") from None


def dump_actions(actions: Sequence[Action], parent_steps: Sequence[int]) -> str:
    """JSON-lines, one `{"t", "kind", "arg", "parent"}` record per step (parent -1 for the root)."""
    if len(actions) != len(parent_steps):
        raise TransitionError("every action needs a parent step")
    return "".join(json.dumps(action_to_record(a, t, p)) + "\n"
                   for t, (a, p) in enumerate(zip(actions, parent_steps)))


def load_actions(lines: Iterable[str]) -> Tuple[List[Action], List[int]]:
    actions, parents = [], []
    for ix, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise TransitionError(f"line {ix + 1}: {e.msg}") from None
        actions.append(action_from_record(record))
        parents.append(int(record.get("parent", -1)))
    return actions, parents
