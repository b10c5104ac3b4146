"""
半范数的抽样校验

失败不抛异常，而是写入 CheckReport；调用方决定是否升级为 ValidationError。
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraElement, AlgebraShape, re_im
from proplab.seminorms.atoms import AtomicSeminorm

KERNEL_TOL = 1e-8


@dataclass
class CheckReport:
    """一次抽样校验的结果"""

    name: str
    passed: bool
    worst_margin: float
    samples: int
    witnesses: list[Any] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "samples": self.samples,
            "witnesses": [str(w) for w in self.witnesses],
            "details": self.details,
        }


def merge_reports(name: str, reports: list[CheckReport]) -> CheckReport:
    """合并多份报告：全部通过才通过，余量取最小"""
    if not reports:
        return CheckReport(name, True, float("inf"), 0)
    worst = min(r.worst_margin for r in reports)
    return CheckReport(
        name,
        all(r.passed for r in reports),
        worst,
        sum(r.samples for r in reports),
        [w for r in reports for w in r.witnesses][:5],
        {r.name: r.worst_margin for r in reports},
    )


def sample_self_adjoint(shape: AlgebraShape, rng: np.random.Generator) -> AlgebraElement:
    """混合尺度的随机自伴元：纯随机、平移单位、低秩扰动交替出现"""
    kind = int(rng.integers(0, 3))
    a = shape.random_self_adjoint(rng, scale=float(rng.uniform(0.1, 2.0)))
    if kind == 1:
        a = a + shape.scalar(float(rng.normal(scale=2.0)))
    elif kind == 2:
        a = a * float(rng.uniform(0.0, 0.2)) + shape.scalar(1.0)
    return a


def quasi_leibniz_check(
    lip: AtomicSeminorm,
    F: Callable[[float, float, float, float], float],
    shape: AlgebraShape,
    sample_count: int = 500,
    seed: int = 0,
    tol: float = 1e-8,
) -> CheckReport:
    """
    抽样检查 max{L(Re(ab)), L(Im(ab))} ≤ F(‖a‖, ‖b‖, L(a), L(b))

    Args:
        lip: 完整实坐标上的半范数
        F: 拟 Leibniz 函数
        shape: 代数形状
        sample_count: 抽样对数
        seed: 随机种子
        tol: 相对容差
    """
    rng = np.random.default_rng(seed)
    worst, witnesses = float("inf"), []
    for _ in range(sample_count):
        a = sample_self_adjoint(shape, rng)
        b = sample_self_adjoint(shape, rng)
        jordan, lie = re_im(a @ b)
        lhs = max(lip(jordan.coords()), lip(lie.coords()))
        rhs = F(a.norm(), b.norm(), lip(a.coords()), lip(b.coords()))
        margin = (rhs - lhs) / max(1.0, abs(rhs))
        if margin < worst:
            worst = margin
            if margin < -tol:
                witnesses.append({"lhs": lhs, "rhs": rhs})
    passed = worst >= -tol
    if not passed:
        logger.warning(f"拟 Leibniz 校验失败 seminorm={lip.name} worst={worst:.3e}")
    return CheckReport("quasi_leibniz", passed, worst, sample_count, witnesses[-5:])


def kernel_check(lip: AtomicSeminorm, shape: AlgebraShape, tol: float = KERNEL_TOL) -> CheckReport:
    """自伴部分上的核必须恰为 ℝ·1"""
    restricted = lip.compose(shape.sa_basis)
    basis = restricted.kernel_basis
    unit = shape.unit_sa_coords / np.linalg.norm(shape.unit_sa_coords)
    dim = basis.shape[1]
    if dim == 0:
        residual = 1.0
    else:
        residual = float(np.linalg.norm(unit - basis @ (basis.T @ unit)))
    passed = dim == 1 and residual <= tol
    if not passed:
        logger.debug(f"核校验失败 seminorm={lip.name} kernel_dim={dim} residual={residual:.3e}")
    return CheckReport(
        "kernel",
        passed,
        -float(abs(dim - 1)) - (residual if residual > tol else 0.0),
        1,
        details={"kernel_dim": dim, "unit_residual": residual},
    )


def homogeneity_check(
    seminorm: AtomicSeminorm,
    sample_count: int = 100,
    seed: int = 0,
    tol: float = 1e-10,
    scale: Optional[float] = None,
) -> CheckReport:
    """绝对齐次与次可加性的随机三元组检查"""
    rng = np.random.default_rng(seed)
    worst = float("inf")
    for _ in range(sample_count):
        x = rng.standard_normal(seminorm.dim)
        y = rng.standard_normal(seminorm.dim)
        t = scale if scale is not None else float(rng.normal(scale=3.0))
        sx, sy = seminorm(x), seminorm(y)
        homo = tol * max(1.0, abs(t) * sx) - abs(seminorm(t * x) - abs(t) * sx)
        sub = sx + sy - seminorm(x + y) + tol * max(1.0, sx + sy)
        worst = min(worst, homo, sub)
    return CheckReport("homogeneity", worst >= 0.0, worst, sample_count)
