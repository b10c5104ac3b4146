"""
模目标集 t_τ(ω|l) = {Θ_𝔅(ζ) : Θ_𝔄(ζ) = ω, D(ζ) ≤ l}

目标集的三条性质按抽样检查：K-直径、线性组合的成员关系、内积的相容性。
性质中的长度量同时按可证上界 figure 与数值 extent 两种读法给出余量，
通过与否以 figure 读法为准。
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from loguru import logger
from scipy.linalg import null_space

from proplab.bundles.kantorovich import modular_mk
from proplab.config import SolverConfig
from proplab.exceptions import InfeasibleError, StructuralError
from proplab.kernels.engine import fiber_infimum
from proplab.modular.tunnel import ModularTunnel
from proplab.qcms.target import max_feasible_step, target_set_points
from proplab.seminorms.checks import CheckReport, merge_reports

TARGET_TOL = 1e-6


def _fiber(
    tunnel: ModularTunnel,
    constraint: np.ndarray,
    target: np.ndarray,
    level: float,
    config: SolverConfig,
):
    est = fiber_infimum(tunnel.pivot.dnorm.seminorm, constraint, target, config)
    if est.infinite or est.value > level + TARGET_TOL * max(1.0, level) + est.tol:
        raise InfeasibleError(
            "l 低于纤维上的最小 D-范数",
            details={"level": level, "fiber_infimum": est.value, "tunnel": tunnel.name},
        )
    return est


def module_fiber_points(
    tunnel: ModularTunnel,
    omega: np.ndarray,
    level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
) -> list[np.ndarray]:
    """
    抽样模纤维 {ζ : Θ_𝔄(ζ) = ω, D(ζ) ≤ l}，返回枢纽模的坐标

    先取纤维上 D 最小的 ζ₀，再沿 ker Θ_𝔄 的随机方向做可行扰动。

    Raises:
        InfeasibleError: level 低于纤维下确界
        StructuralError: ω 不属于起点的模
    """
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (tunnel.domain.module.dim,):
        raise StructuralError(
            "元素不属于模隧道的起点",
            details={"tunnel": tunnel.name, "expected": tunnel.domain.module.dim},
        )
    config = config or SolverConfig()
    dnorm = tunnel.pivot.dnorm.seminorm
    constraint = tunnel.leg_domain.matrix
    z0 = _fiber(tunnel, constraint, omega, level, config).certificate
    directions = null_space(constraint, rcond=1e-10)
    rng = np.random.default_rng(seed)
    fibers = [z0]
    if dnorm(z0) <= level and directions.shape[1]:
        for _ in range(max(0, count - 1)):
            step = directions @ rng.standard_normal(directions.shape[1])
            t_max = max_feasible_step(dnorm, z0, step, level)
            fibers.append(z0 + float(rng.uniform()) * t_max * step)
    return fibers


def module_target_set(
    tunnel: ModularTunnel,
    omega: np.ndarray,
    level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
) -> list[np.ndarray]:
    """抽样模目标集：模纤维点在 Θ_𝔅 下的像"""
    fibers = module_fiber_points(tunnel, omega, level, count, seed, config)
    out = [tunnel.leg_codomain.matrix @ z for z in fibers]
    logger.debug(f"模目标集抽样 tunnel={tunnel.name} level={level:.4g} points={len(out)}")
    return out


# ------------------------------------------------------------------
# 三条性质
# ------------------------------------------------------------------


def _readings(
    name: str, observed: float, factor: float, figure: float, extent: float, tol: float, count: int
) -> CheckReport:
    bound = factor * figure + tol
    margin = bound - observed
    return CheckReport(
        name,
        margin >= 0,
        margin,
        count,
        details={
            "observed": observed,
            "bound": bound,
            "extent_bound": factor * extent + tol,
            "extent_margin": factor * extent + tol - observed,
        },
    )


def target_diameter_check(
    tunnel: ModularTunnel,
    omega: np.ndarray,
    level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    tol: float = 1e-3,
    extent: Optional[float] = None,
) -> CheckReport:
    """diam_K t_τ(ω|l) ≤ √2·H(2l, 1)·len(τ)"""
    config = config or SolverConfig()
    points = module_target_set(tunnel, omega, level, count, seed, config)
    diameter = max(
        (
            modular_mk(tunnel.codomain, p, q, config).value
            for i, p in enumerate(points)
            for q in points[i + 1 :]
        ),
        default=0.0,
    )
    if extent is None:
        extent = tunnel.extent(config).value
    factor = np.sqrt(2.0) * tunnel.pivot.triple.H(2.0 * level, 1.0)
    return _readings(
        f"target_diameter[{tunnel.name}]", diameter, factor, tunnel.figure, extent, tol, len(points)
    )


def target_combination_check(
    tunnel: ModularTunnel,
    omega: np.ndarray,
    other: np.ndarray,
    level: float,
    t: complex = 0.5,
    config: Optional[SolverConfig] = None,
    tol: float = 1e-3,
) -> CheckReport:
    """η + tη′ ∈ t_τ(ω + tω′ | l(1 + |t|))：联合纤维 {Θ_𝔄ζ = ω + tω′, Θ_𝔅ζ = η + tη′}"""
    config = config or SolverConfig()
    domain, codomain = tunnel.domain.module, tunnel.codomain.module
    eta = module_target_set(tunnel, omega, level, 1, config=config)[0]
    eta_other = module_target_set(tunnel, other, level, 1, config=config)[0]
    scalar_a, scalar_b = domain.base.scalar(t), codomain.base.scalar(t)
    source = omega + domain.act(scalar_a, other)
    image = eta + codomain.act(scalar_b, eta_other)
    constraint = np.vstack([tunnel.leg_domain.matrix, tunnel.leg_codomain.matrix])
    est = fiber_infimum(
        tunnel.pivot.dnorm.seminorm, constraint, np.concatenate([source, image]), config
    )
    budget = level * (1.0 + abs(t))
    margin = budget + tol - (float("inf") if est.infinite else est.value)
    return CheckReport(
        f"target_combination[{tunnel.name}]",
        margin >= 0,
        margin,
        1,
        details={"t": [float(np.real(t)), float(np.imag(t))], "fiber": est.value, "budget": budget},
    )


def target_inner_check(
    tunnel: ModularTunnel,
    omega: np.ndarray,
    level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    tol: float = 1e-3,
    extent: Optional[float] = None,
) -> CheckReport:
    """b ∈ t_{τ_♭}(⟨ω,ω⟩ | H(l,l))、η ∈ t_τ(ω|l) 时 ‖b − ⟨η,η⟩‖ ≤ 2H(l,l)·ext(τ)"""
    config = config or SolverConfig()
    h = tunnel.pivot.triple.H(level, level)
    domain, codomain = tunnel.domain.module, tunnel.codomain.module
    etas = module_target_set(tunnel, omega, level, count, seed, config)
    inner = domain.inner(omega, omega)
    bs = target_set_points(tunnel.base, inner, h, count, seed + 1, config)
    gap = max((b - codomain.inner(eta, eta)).norm() for b in bs for eta in etas)
    if extent is None:
        extent = tunnel.extent(config).value
    return _readings(
        f"target_inner[{tunnel.name}]", gap, 2.0 * h, tunnel.figure, extent, tol, len(etas)
    )


def module_target_checks(
    tunnel: ModularTunnel,
    omega: np.ndarray,
    other: np.ndarray,
    level: float,
    t: complex = 0.5,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    tol: float = 1e-3,
) -> CheckReport:
    """
    三条目标集性质的合并报告

    Raises:
        InfeasibleError: l 低于 D(ω) 或 D(ω′) 所需的纤维下确界
    """
    config = config or SolverConfig()
    extent = tunnel.extent(config).value
    reports = [
        target_diameter_check(tunnel, omega, level, count, seed, config, tol, extent),
        target_combination_check(tunnel, omega, other, level, t, config, tol),
        target_inner_check(tunnel, omega, level, count, seed, config, tol, extent),
    ]
    report = merge_reports(f"module_target[{tunnel.name}]", reports)
    report.details.update(
        {
            f"{r.name}.extent_margin": r.details["extent_margin"]
            for r in reports
            if "extent_margin" in r.details
        }
    )
    if not report.passed:
        logger.warning(f"模目标集性质被违反 tunnel={tunnel.name} worst={report.worst_margin:.3e}")
    return report
