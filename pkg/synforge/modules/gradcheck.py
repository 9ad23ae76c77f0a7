# -*- coding: utf-8 -*-

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Tuple

import torch
import torch.nn as nn
from transformers.utils import logging

logger = logging.get_logger(__name__)

GRAD_FLOOR = 1e-5


@dataclass
class GradcheckReport:
    max_rel_err: float = 0.0
    tolerance: float = 1e-4
    checked: int = 0
    per_group: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "max_rel_err": self.max_rel_err,
            "tolerance": self.tolerance,
            "checked": self.checked,
            "passed": self.passed,
            "per_group": dict(self.per_group),
        }


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), GRAD_FLOOR)


@torch.no_grad()
def _central_difference(loss_fn: Callable[[], torch.Tensor], param: torch.Tensor, index: Tuple[int, ...],
                        eps: float) -> float:
    original = param[index].item()
    param[index] = original + eps
    plus = loss_fn().item()
    param[index] = original - eps
    minus = loss_fn().item()
    param[index] = original
    return (plus - minus) / (2 * eps)


def finite_difference_check(
    loss_fn: Callable[[], torch.Tensor],
    params: Iterable[Tuple[str, nn.Parameter]],
    eps: float = 1e-5,
    samples_per_group: int = 6,
    tolerance: float = 1e-4,
    generator: Optional[torch.Generator] = None,
) -> GradcheckReport:
    """
    Compare autograd gradients of `loss_fn` with central differences on a
    random sample of coordinates of every parameter group. `loss_fn` must be
    deterministic (eval mode, no dropout) and parameters should be float64.
    """
    params = list(params)
    for _, param in params:
        param.grad = None
    loss_fn().backward()
    report = GradcheckReport(tolerance=tolerance)
    for name, param in params:
        if param.grad is None:
            raise ValueError(f"parameter '{name}' does not take part in the loss")
        grad = param.grad.detach().clone()
        n = param.numel()
        picks = torch.randperm(n, generator=generator)[:samples_per_group].tolist()
        worst = 0.0
        for flat in picks:
            index = tuple(int(i) for i in torch.unravel_index(torch.tensor(flat), param.shape))
            numeric = _central_difference(loss_fn, param.data, index, eps)
            worst = max(worst, relative_error(grad[index].item(), numeric))
            report.checked += 1
        report.per_group[name] = worst
        report.max_rel_err = max(report.max_rel_err, worst)
        logger.debug(f"gradcheck {name}: max rel err {worst:.3e} over {len(picks)} coordinates")
    return report
