# -*- coding: utf-8 -*-

from __future__ import annotations

from typing import Optional

import torch


def _masked(scores: torch.Tensor, mask: Optional[torch.Tensor]) -> torch.Tensor:
    if scores.shape[-1] == 0:
        raise ValueError("cannot normalize an empty score vector")
    if mask is None:
        return scores
    return scores.masked_fill(~mask, float("-inf"))


def softmax(scores: torch.Tensor, mask: Optional[torch.Tensor] = None) -> torch.Tensor:
    """Softmax over the last dim; entries where `mask` is False get probability 0."""
    return torch.softmax(_masked(scores, mask), dim=-1)


def log_softmax(scores: torch.Tensor, mask: Optional[torch.Tensor] = None) -> torch.Tensor:
    return torch.log_softmax(_masked(scores, mask), dim=-1)
