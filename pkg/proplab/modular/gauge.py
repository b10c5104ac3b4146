"""
Minkowski 规范集合 𝒟

𝒟 = ∪_{α ∈ I(J)} {(ω, η) : ρ_ℳ(ω − ω_α) ≤ r, ρ_𝒩(η − η_α) ≤ r}

ρ 为 K 的精确原子形式（见 gauge_metric），r 为所用的 imprint 半径。
成员判定是 ℓ¹ 球上的凸最小化；规范函数既可以由成员判定二分得到，
也有带隐变量的闭式原子形式

    𝗉(ω, η) = inf_β max{ρ_ℳ(ω − W_ℳβ)/r, ρ_𝒩(η − W_𝒩β)/r, ‖β‖₁}

后者直接并入枢纽的 D-范数。
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from loguru import logger

from proplab.config import SolverConfig
from proplab.exceptions import NonMonotoneOracleError, PreconditionError, StructuralError
from proplab.kernels.engine import minimize_on_l1_ball
from proplab.kernels.estimate import Estimate
from proplab.kernels.gauge import minkowski_gauge
from proplab.modular.bridge import ConvexAnchorFamily
from proplab.seminorms.atoms import AtomicSeminorm, L1Term, combine_max
from proplab.seminorms.checks import CheckReport

MEMBERSHIP_TOL = 1e-6
RAY_STEPS = (0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass
class GaugeSet:
    """𝒟 的成员判定与规范函数"""

    family: ConvexAnchorFamily
    metrics: tuple[AtomicSeminorm, AtomicSeminorm]
    radius: float
    config: SolverConfig = field(default_factory=SolverConfig)
    tol: float = MEMBERSHIP_TOL

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise PreconditionError("规范集合的半径必须为正", details={"radius": self.radius})
        left, right = self.metrics
        if left.aux_dim or right.aux_dim:
            raise StructuralError("规范集合的度量不能带隐变量")
        if left.dim != self.family.anchors.shape[0] or right.dim != self.family.coanchors.shape[0]:
            raise StructuralError(
                "度量维数与锚点不一致",
                details={"left": left.dim, "right": right.dim},
            )

    @property
    def split(self) -> int:
        return self.metrics[0].dim

    @property
    def dim(self) -> int:
        return self.metrics[0].dim + self.metrics[1].dim

    @cached_property
    def joint(self) -> AtomicSeminorm:
        """(ω, η) ↦ max{ρ_ℳ(ω), ρ_𝒩(η)}/r"""
        m, n = self.metrics[0].dim, self.metrics[1].dim
        left = self.metrics[0].compose(np.hstack([np.eye(m), np.zeros((m, n))]))
        right = self.metrics[1].compose(np.hstack([np.zeros((n, m)), np.eye(n)]))
        return combine_max([left, right], name="ρ").scaled(1.0 / self.radius)

    def distance(self, v: np.ndarray) -> Estimate:
        """min_α max{ρ_ℳ(ω − ω_α), ρ_𝒩(η − η_α)}/r；certificate 为 α"""
        return minimize_on_l1_ball(self.joint, v, self.family.generators, self.config)

    def contains(self, v: np.ndarray) -> bool:
        return self.distance(np.asarray(v, dtype=float)).value <= 1.0 + self.tol

    def gauge(self, v: np.ndarray) -> Estimate:
        """
        由成员判定二分得到的规范函数

        Raises:
            NonMonotoneOracleError: 判定沿射线不单调
        """
        return minkowski_gauge(self.contains, v)

    @cached_property
    def seminorm(self) -> AtomicSeminorm:
        """𝗉 的闭式原子形式，隐变量为系数 β"""
        size = self.family.size
        hidden = self.joint.with_hidden(np.eye(self.dim), -self.family.generators)
        coeff = L1Term(np.hstack([np.zeros((size, self.dim)), np.eye(size)]))
        seminorm = AtomicSeminorm(
            self.dim,
            hidden.groups,
            [*hidden.l1_terms, coeff],
            aux_dim=size,
            name=f"𝗉[r={self.radius:.4g}]",
            solver=self.config,
        )
        logger.debug(f"规范半范数 dim={self.dim} anchors={size} radius={self.radius:.6g}")
        return seminorm

    def ray_check(self, count: int = 8, seed: int = 0) -> CheckReport:
        """0 ∈ 𝒟、v ∈ 𝒟 ⇔ −v ∈ 𝒟、成员判定沿射线单调，另记录两种规范函数的最大偏差"""
        rng = np.random.default_rng(seed)
        failures = []
        if not self.contains(np.zeros(self.dim)):
            failures.append({"check": "origin"})
        deviation = 0.0
        for r in range(count):
            v = rng.standard_normal(self.dim)
            flags = [self.contains(t * v) for t in RAY_STEPS]
            if any(flags[i] and not flags[i - 1] for i in range(1, len(flags))):
                failures.append({"check": "monotone", "ray": r})
            if self.contains(v) != self.contains(-v):
                failures.append({"check": "balanced", "ray": r})
            try:
                oracle = self.gauge(v).value
            except NonMonotoneOracleError as e:
                failures.append({"check": "oracle", "ray": r, **e.details})
                continue
            closed = self.seminorm(v)
            deviation = max(deviation, abs(oracle - closed) / max(1.0, closed))
        return CheckReport(
            "gauge_set",
            not failures,
            0.0 if not failures else -1.0,
            count,
            failures[:5],
            {"gauge_deviation": deviation},
        )
