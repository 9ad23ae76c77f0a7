# -*- coding: utf-8 -*-

from __future__ import annotations

from typing import Sequence

import torch
import torch.nn as nn


class Mlp1(nn.Module):
    """
    Single-hidden-layer tanh scorer over the concatenation of its inputs.

    The first layer is kept as one projection per input so inputs of different
    leading shapes broadcast against each other, e.g. encoder states (B, N, D)
    against a decoder state (B, 1, H). Returns scores with the last dim squeezed.
    """

    def __init__(self, input_sizes: Sequence[int], hidden_size: int = 50):
        super().__init__()
        self.input_sizes = tuple(input_sizes)
        self.hidden_size = hidden_size
        self.inputs = nn.ModuleList(
            nn.Linear(size, hidden_size, bias=ix == 0) for ix, size in enumerate(self.input_sizes)
        )
        self.out = nn.Linear(hidden_size, 1)

    def forward(self, *inputs: torch.Tensor) -> torch.Tensor:
        if len(inputs) != len(self.inputs):
            raise ValueError(f"expected {len(self.inputs)} inputs, got {len(inputs)}")
        hidden = None
        for proj, x in zip(self.inputs, inputs):
            if x.shape[-1] != proj.in_features:
                raise ValueError(f"input has {x.shape[-1]} features, scorer expects {proj.in_features}")
            hidden = proj(x) if hidden is None else hidden + proj(x)
        return self.out(torch.tanh(hidden)).squeeze(-1)

    def extra_repr(self) -> str:
        return f"input_sizes={self.input_sizes}, hidden_size={self.hidden_size}"
