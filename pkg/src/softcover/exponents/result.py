"""Result record returned by every exponent solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..measures import Channel, Distribution, JointDistribution, LogBase


@dataclass(frozen=True)
class ExponentResult:
    """Exponent value in ``base`` plus the optimizer that certifies it.

    ``optimizer_param`` is the maximizing order parameter of the dual form
    (lambda* for alpha and aleph, the search variable otherwise).
    """

    exponent: str
    rate: float
    base: LogBase
    value: float
    optimizer_param: float | tuple | None = None
    optimizer_dist: JointDistribution | Channel | Distribution | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def lambda_star(self):
        return self.optimizer_param

    @property
    def value_nats(self) -> float:
        return self.base.to_nats(self.value)

    def to_json(self) -> dict:
        opt = self.optimizer_param
        if isinstance(opt, tuple):
            opt = [float(v) for v in opt]
        out = {
            "exponent": self.exponent,
            "rate": self.rate,
            "base": self.base.value,
            "value": self.value,
            "lambda_star": opt,
            "diagnostics": _jsonable(self.diagnostics),
        }
        if self.optimizer_dist is not None:
            arr = getattr(self.optimizer_dist, "probs", None)
            if arr is None:
                arr = self.optimizer_dist.rows
            out["optimizer_dist"] = np.asarray(arr).tolist()
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj
