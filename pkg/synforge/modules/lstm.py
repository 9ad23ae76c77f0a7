# -*- coding: utf-8 -*-

from __future__ import annotations

from typing import Tuple

import torch
import torch.nn as nn

State = Tuple[torch.Tensor, torch.Tensor]


def init_recurrent_(module: nn.Module, scale: float = 0.08) -> None:
    """uniform(-scale, scale) for every recurrent weight matrix, zeros for biases."""
    for name, param in module.named_parameters(recurse=False):
        if name.startswith("weight"):
            nn.init.uniform_(param, -scale, scale)
        elif name.startswith("bias"):
            nn.init.zeros_(param)


def lstm_step(cell: nn.LSTMCell, x: torch.Tensor, state: State) -> State:
    """One gated update `(h, c) -> (h', c')`, checking shapes against the cell."""
    h, c = state
    if x.shape[-1] != cell.input_size:
        raise ValueError(f"input has {x.shape[-1]} features, cell expects {cell.input_size}")
    if h.shape[-1] != cell.hidden_size or c.shape != h.shape:
        raise ValueError(f"state shapes {tuple(h.shape)}/{tuple(c.shape)} do not match hidden size {cell.hidden_size}")
    return cell(x, (h, c))


def zero_state(batch_size: int, hidden_size: int, like: torch.Tensor) -> State:
    h = like.new_zeros(batch_size, hidden_size)
    return h, h.clone()
