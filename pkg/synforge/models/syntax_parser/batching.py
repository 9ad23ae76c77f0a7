# -*- coding: utf-8 -*-

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Mapping, Sequence, Tuple

import torch

from synforge.grammar.grammar import Grammar
from synforge.transition.actions import CLOSE_ID, UNK_ID, Action, ActionKind
from synforge.transition.system import frontier_trace


@dataclass
class EncodedExample:
    """Per-step training targets of one oracle sequence, as plain lists."""
    src_ids: List[int]
    action_ids: List[int]
    is_rule: List[bool]
    rule_ids: List[int]
    gen_ids: List[int]
    copy_positions: List[Tuple[int, ...]]
    parent_steps: List[int]
    frontier_types: List[int]

    def __len__(self) -> int:
        return len(self.action_ids)


def token_embed_id(action: Action, terminal: Mapping[str, int]) -> int:
    """W_G row fed back as a_{t-1}: the word itself, or <unk> for copied out-of-vocabulary words."""
    if action.kind == ActionKind.CLOSE:
        return CLOSE_ID
    if action.kind == ActionKind.VOCAB:
        return action.arg
    return terminal.get(action.token, UNK_ID)


def action_embed_id(action: Action, terminal: Mapping[str, int], num_productions: int) -> int:
    """Row of the stacked action table [W_R ; W_G]."""
    if action.kind == ActionKind.RULE:
        return action.arg
    return num_productions + token_embed_id(action, terminal)


def encode_actions(
    src_ids: Sequence[int],
    actions: Sequence[Action],
    grammar: Grammar,
    terminal: Mapping[str, int],
    use_copy: bool = True,
) -> EncodedExample:
    frontiers, parents = frontier_trace(actions, grammar)
    example = EncodedExample(list(src_ids), [], [], [], [], [], list(parents),
                             [grammar.type_index(t) for t in frontiers])
    for action in actions:
        example.action_ids.append(action_embed_id(action, terminal, len(grammar)))
        example.is_rule.append(action.kind == ActionKind.RULE)
        example.rule_ids.append(action.arg if action.kind == ActionKind.RULE else 0)
        if action.kind == ActionKind.CLOSE:
            example.gen_ids.append(CLOSE_ID)
        elif action.kind == ActionKind.VOCAB:
            example.gen_ids.append(action.arg)
        else:
            example.gen_ids.append(-1)
        positions = action.copy_positions if use_copy and action.kind in (ActionKind.VOCAB, ActionKind.COPY) else ()
        if any(not 0 <= p < len(src_ids) for p in positions):
            raise ValueError(f"copy position out of range in {action}")
        example.copy_positions.append(tuple(positions))
    return example


@dataclass
class ActionBatch:
    src_ids: torch.Tensor          # (B, N)
    src_mask: torch.Tensor         # (B, N) bool
    step_mask: torch.Tensor        # (B, T) bool
    action_ids: torch.Tensor       # (B, T)
    is_rule: torch.Tensor          # (B, T) bool
    rule_ids: torch.Tensor         # (B, T)
    gen_ids: torch.Tensor          # (B, T), -1 where there is no generation route
    copy_mask: torch.Tensor        # (B, T, N) bool
    parent_steps: torch.Tensor     # (B, T), -1 at the root
    frontier_types: torch.Tensor   # (B, T)

    @property
    def batch_size(self) -> int:
        return self.src_ids.shape[0]

    @property
    def num_steps(self) -> int:
        return self.step_mask.shape[1]


def make_batch(examples: Sequence[EncodedExample]) -> ActionBatch:
    if len(examples) == 0:
        raise ValueError("cannot batch zero examples")
    if any(len(e.src_ids) == 0 for e in examples):
        raise ValueError("every example needs at least one source token")
    B = len(examples)
    N = max(len(e.src_ids) for e in examples)
    T = max(len(e) for e in examples)
    batch = ActionBatch(
        src_ids=torch.zeros(B, N, dtype=torch.long),
        src_mask=torch.zeros(B, N, dtype=torch.bool),
        step_mask=torch.zeros(B, T, dtype=torch.bool),
        action_ids=torch.zeros(B, T, dtype=torch.long),
        is_rule=torch.zeros(B, T, dtype=torch.bool),
        rule_ids=torch.zeros(B, T, dtype=torch.long),
        gen_ids=torch.full((B, T), -1, dtype=torch.long),
        copy_mask=torch.zeros(B, T, N, dtype=torch.bool),
        parent_steps=torch.full((B, T), -1, dtype=torch.long),
        frontier_types=torch.zeros(B, T, dtype=torch.long),
    )
    for b, e in enumerate(examples):
        n, t = len(e.src_ids), len(e)
        batch.src_ids[b, :n] = torch.tensor(e.src_ids, dtype=torch.long)
        batch.src_mask[b, :n] = True
        if t == 0:
            continue
        batch.step_mask[b, :t] = True
        batch.action_ids[b, :t] = torch.tensor(e.action_ids, dtype=torch.long)
        batch.is_rule[b, :t] = torch.tensor(e.is_rule, dtype=torch.bool)
        batch.rule_ids[b, :t] = torch.tensor(e.rule_ids, dtype=torch.long)
        batch.gen_ids[b, :t] = torch.tensor(e.gen_ids, dtype=torch.long)
        batch.parent_steps[b, :t] = torch.tensor(e.parent_steps, dtype=torch.long)
        batch.frontier_types[b, :t] = torch.tensor(e.frontier_types, dtype=torch.long)
        for step, positions in enumerate(e.copy_positions):
            if positions:
                batch.copy_mask[b, step, list(positions)] = True
    return batch
