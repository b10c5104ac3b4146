"""
数值结果的统一载体

每个上确界/下确界都以 Estimate 报告，并标注它相对真值的方向：
exact（精确）、upper（上界）、lower（下界）、approx（无方向保证）。
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Optional

import numpy as np

EXACT_TOL = 1e-8


class BoundKind(str, Enum):
    """界的类型"""

    EXACT = "exact"
    UPPER = "upper"
    LOWER = "lower"
    APPROX = "approx"


@dataclass(frozen=True)
class Estimate:
    """带方向标记的数值估计"""

    value: float
    kind: BoundKind = BoundKind.APPROX
    tol: float = 0.0
    iterations: int = 0
    certificate: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    infinite: bool = False
    exhausted: bool = False
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        kind = BoundKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is BoundKind.EXACT and self.tol > EXACT_TOL:
            object.__setattr__(self, "kind", BoundKind.APPROX)

    @classmethod
    def exact(cls, value: float, **kwargs: Any) -> "Estimate":
        return cls(float(value), BoundKind.EXACT, **kwargs)

    @classmethod
    def infinity(cls, **kwargs: Any) -> "Estimate":
        return cls(float("inf"), BoundKind.EXACT, infinite=True, **kwargs)

    @property
    def is_exact(self) -> bool:
        return self.kind is BoundKind.EXACT

    def with_kind(self, kind: BoundKind) -> "Estimate":
        return replace(self, kind=kind)

    def scaled(self, factor: float) -> "Estimate":
        return replace(self, value=self.value * factor, tol=self.tol * abs(factor))

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": None if self.infinite else self.value,
            "bound_kind": self.kind.value,
            "tolerance": self.tol,
            "iterations": self.iterations,
            "infinite": self.infinite,
            "exhausted": self.exhausted,
            **({"metadata": self.metadata} if self.metadata else {}),
        }

    def __float__(self) -> float:
        return self.value


def combined_kind(kinds: Iterable[BoundKind]) -> BoundKind:
    """
    单调组合（max、和）后的类型：全部精确则精确；精确与同一方向的界混合
    保持该方向；方向冲突或含 approx 时为 approx
    """
    directions = {k for k in kinds if k is not BoundKind.EXACT}
    if not directions:
        return BoundKind.EXACT
    if len(directions) == 1:
        return directions.pop()
    return BoundKind.APPROX


def combine_max(estimates: Iterable[Estimate], **metadata: Any) -> Estimate:
    items = list(estimates)
    if not items:
        return Estimate.exact(0.0, metadata=metadata)
    best = max(items, key=lambda e: e.value)
    return Estimate(
        best.value,
        combined_kind(e.kind for e in items),
        tol=max(e.tol for e in items),
        iterations=sum(e.iterations for e in items),
        certificate=best.certificate,
        infinite=any(e.infinite for e in items),
        exhausted=any(e.exhausted for e in items),
        metadata={**best.metadata, **metadata},
    )


def combine_sum(estimates: Iterable[Estimate], **metadata: Any) -> Estimate:
    items = list(estimates)
    return Estimate(
        float(sum(e.value for e in items)),
        combined_kind(e.kind for e in items),
        tol=float(sum(e.tol for e in items)),
        iterations=sum(e.iterations for e in items),
        infinite=any(e.infinite for e in items),
        exhausted=any(e.exhausted for e in items),
        metadata=metadata,
    )
