"""
半范数单位球 {v : S(v) ≤ 1} 的句柄
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from proplab.config import SolverConfig
from proplab.kernels.engine import support_function
from proplab.kernels.estimate import Estimate
from proplab.seminorms.atoms import AtomicSeminorm
from proplab.seminorms.checks import CheckReport

MEMBERSHIP_TOL = 1e-9


@dataclass
class ConvexBody:
    """半范数的单位球，可声明需要商掉的核"""

    seminorm: AtomicSeminorm
    kernel: Optional[np.ndarray] = None
    config: SolverConfig = field(default_factory=SolverConfig)

    @property
    def dim(self) -> int:
        return self.seminorm.dim

    def declared_kernel(self) -> np.ndarray:
        if self.kernel is not None:
            return np.asarray(self.kernel, dtype=float).reshape(self.dim, -1)
        return self.seminorm.kernel_basis

    def contains(self, v: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.seminorm(np.asarray(v, dtype=float)) <= 1.0 + tol

    def support(self, c: np.ndarray, tier: str = "auto") -> Estimate:
        c = np.asarray(c, dtype=float)
        k = self.declared_kernel()
        if k.shape[1] and np.linalg.norm(k.T @ c) > 1e-9 * max(1.0, float(np.linalg.norm(c))):
            return Estimate.infinity(metadata={"reason": "kernel"})
        return support_function(self.seminorm, c, self.config, tier=tier)

    def ray_check(self, count: int = 32, seed: int = 0) -> CheckReport:
        """
        在随机射线上检查 0 ∈ C 与成员判定沿射线单调
        """
        rng = np.random.default_rng(seed)
        failures = []
        if not self.contains(np.zeros(self.dim)):
            failures.append({"ray": -1, "t": 0.0})
        ts = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
        for r in range(count):
            v = rng.standard_normal(self.dim)
            flags = [self.contains(t * v) for t in ts]
            # 一旦离开就不应再进入
            for i in range(1, len(flags)):
                if flags[i] and not flags[i - 1]:
                    failures.append({"ray": r, "t": float(ts[i])})
                    break
        return CheckReport(
            name="ray_monotone",
            passed=not failures,
            worst_margin=0.0 if not failures else -1.0,
            samples=count,
            witnesses=failures[:5],
        )
