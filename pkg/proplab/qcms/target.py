"""
目标集 t_τ(a|l) = {π_𝔅(d) : π_𝔄(d) = a, L_𝔇(d) ≤ l}
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from loguru import logger
from scipy.linalg import null_space

from proplab.algebra.shape import AlgebraElement
from proplab.config import SolverConfig
from proplab.exceptions import InfeasibleError, PreconditionError, StructuralError
from proplab.kernels.engine import fiber_infimum
from proplab.qcms.tunnel import Tunnel
from proplab.seminorms.atoms import AtomicSeminorm
from proplab.seminorms.checks import CheckReport

TARGET_TOL = 1e-6
BISECTION_STEPS = 40


def max_feasible_step(
    seminorm: AtomicSeminorm, base: np.ndarray, direction: np.ndarray, level: float
) -> float:
    """沿方向保持 S ≤ level 的最大步长（S 在射线上凸）"""
    lo, hi = 0.0, 1.0
    while seminorm(base + hi * direction) <= level:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            return lo
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if seminorm(base + mid * direction) <= level:
            lo = mid
        else:
            hi = mid
    return lo


def fiber_points(
    tunnel: Tunnel,
    a: AlgebraElement,
    level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
) -> list[np.ndarray]:
    """
    抽样纤维 {d : π_𝔄(d) = a, L_𝔇(d) ≤ l}，返回枢纽的自伴坐标

    先取纤维上 L_𝔇 最小的 d₀，再沿纤维内的随机方向做可行扰动。

    Raises:
        InfeasibleError: level 低于纤维下确界
        PreconditionError: a 不是自伴元
    """
    if a.shape != tunnel.domain.shape:
        raise StructuralError(
            "元素不属于隧道的起点", details={"tunnel": tunnel.name, "element": a.shape.label}
        )
    if not a.is_self_adjoint():
        raise PreconditionError("目标集只对自伴元定义", details={"tunnel": tunnel.name})
    config = config or SolverConfig()
    lip = tunnel.pivot.lip_sa
    constraint = tunnel.leg_domain.sa_matrix
    fiber = fiber_infimum(lip, constraint, a.sa_coords(), config)
    if fiber.infinite or fiber.value > level + TARGET_TOL * max(1.0, level) + fiber.tol:
        raise InfeasibleError(
            "l 低于纤维上的最小 Lip 值",
            details={"level": level, "fiber_infimum": fiber.value, "tunnel": tunnel.name},
        )
    d0 = fiber.certificate
    directions = null_space(constraint, rcond=1e-10)
    rng = np.random.default_rng(seed)
    fibers = [d0]
    if lip(d0) <= level and directions.shape[1]:
        for _ in range(max(0, count - 1)):
            step = directions @ rng.standard_normal(directions.shape[1])
            t_max = max_feasible_step(lip, d0, step, level)
            fibers.append(d0 + float(rng.uniform()) * t_max * step)
    return fibers


def target_set_points(
    tunnel: Tunnel,
    a: AlgebraElement,
    level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
) -> list[AlgebraElement]:
    """抽样目标集中的元素：纤维点在 π_𝔅 下的像"""
    fibers = fiber_points(tunnel, a, level, count, seed, config)
    image = tunnel.leg_codomain.sa_matrix
    out = [tunnel.codomain.shape.from_sa_coords(image @ d) for d in fibers]
    logger.debug(f"目标集抽样 tunnel={tunnel.name} level={level:.4g} points={len(out)}")
    return out


def target_set_diameter_check(
    tunnel: Tunnel,
    a: AlgebraElement,
    level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    tol: float = 1e-3,
) -> CheckReport:
    """
    diam t_τ(a|l) ≤ 2·l·χ 且 ‖b‖ ≤ ‖a‖ + l·χ，χ 为隧道的可证 extent 上界
    """
    points = target_set_points(tunnel, a, level, count, seed, config)
    diameter = max(
        ((p - q).norm() for i, p in enumerate(points) for q in points[i + 1 :]), default=0.0
    )
    largest = max(p.norm() for p in points)
    diam_bound = 2.0 * level * tunnel.figure + tol
    norm_bound = a.norm() + level * tunnel.figure + tol
    margin = min(diam_bound - diameter, norm_bound - largest)
    passed = margin >= 0
    if not passed:
        logger.warning(
            f"目标集界被违反 tunnel={tunnel.name} diameter={diameter:.6g} bound={diam_bound:.6g}"
        )
    return CheckReport(
        f"target_set[{tunnel.name}]",
        passed,
        margin,
        len(points),
        details={
            "diameter": diameter,
            "diameter_bound": diam_bound,
            "max_norm": largest,
            "norm_bound": norm_bound,
        },
    )
