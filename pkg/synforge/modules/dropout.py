# -*- coding: utf-8 -*-

from __future__ import annotations

from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F


def check_dropout(p: float) -> float:
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    return p


def dropout(x: torch.Tensor, p: float, training: bool) -> torch.Tensor:
    return F.dropout(x, check_dropout(p), training)


class VariationalDropout(nn.Module):
    """
    Recurrent dropout: one mask per sequence, reused at every time step.

    `sample_mask` draws the (batch, features) mask at the start of a sequence;
    it is None in eval mode or when p == 0, and `apply` is then the identity.
    """

    def __init__(self, p: float = 0.0):
        super().__init__()
        self.p = check_dropout(p)

    def sample_mask(self, batch_size: int, size: int, like: torch.Tensor) -> Optional[torch.Tensor]:
        if not self.training or self.p == 0.0:
            return None
        keep = like.new_empty(batch_size, size).bernoulli_(1.0 - self.p)
        return keep / (1.0 - self.p)

    @staticmethod
    def apply_mask(x: torch.Tensor, mask: Optional[torch.Tensor]) -> torch.Tensor:
        return x if mask is None else x * mask

    def extra_repr(self) -> str:
        return f"p={self.p}"
