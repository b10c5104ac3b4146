"""
凸求解引擎

两级求解：
- 多面体型半范数（交换情形的秩一原子）走线性规划，结果精确；
- 一般矩阵原子走光滑化：log-sum-exp 包络 + √(σ² + μ²) 奇异值光滑，
  μ 按配置逐级缩小，每级用 L-BFGS-B，最后以步长 c/√k 的次梯度精修，
  报告最好的精确值（可行点给出上界）。
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger
from scipy.linalg import lstsq, null_space
from scipy.optimize import minimize

from proplab.config import SolverConfig
from proplab.exceptions import StructuralError
from proplab.kernels.estimate import BoundKind, Estimate
from proplab.kernels.lp import LinearProgram
from proplab.kernels.projections import project_l1_ball
from proplab.seminorms.atoms import AtomicSeminorm

FEASIBILITY_TOL = 1e-8
KERNEL_TOL = 1e-9


class SmoothModel:
    """半范数的光滑近似 f_μ ≥ S，带梯度"""

    def __init__(self, seminorm: AtomicSeminorm):
        self.seminorm = seminorm
        self.pieces = sum(g.size * min(g.rows, g.cols) for g in seminorm.groups) + len(
            seminorm.l1_terms
        )

    def __call__(self, x: np.ndarray, mu: float) -> tuple[float, np.ndarray]:
        vals: list[np.ndarray] = []
        parts: list[tuple] = []
        for g in self.seminorm.groups:
            mats = g.apply(x)
            if g.is_vector:
                s = np.linalg.norm(mats.reshape(g.size, -1), axis=1)
                smooth = np.sqrt(s * s + mu * mu)
                vals.append(g.weights * smooth)
                parts.append(("vec", g, mats, s, smooth))
            else:
                u, s, vh = np.linalg.svd(mats, full_matrices=False)
                smooth = np.sqrt(s * s + mu * mu)
                vals.append((g.weights[:, None] * smooth).ravel())
                parts.append(("mat", g, (u, vh), s, smooth))
        for term in self.seminorm.l1_terms:
            px = term.matrix @ x
            smooth = np.sqrt(px * px + mu * mu)
            vals.append(np.array([term.weight * smooth.sum()]))
            parts.append(("l1", term, px, None, smooth))
        if not vals:
            return 0.0, np.zeros_like(x)
        flat = np.concatenate(vals)
        top = flat.max()
        expo = np.exp((flat - top) / mu)
        total = expo.sum()
        value = float(top + mu * np.log(total))
        weights = expo / total
        grad = np.zeros_like(x)
        pos = 0
        for kind, obj, data, s, smooth in parts:
            if kind == "vec":
                n = obj.size
                pi = weights[pos : pos + n]
                pos += n
                coeff = pi * obj.weights / smooth
                gm = coeff[:, None, None] * data
                grad += np.einsum("grc,grcn->n", gm.conj(), obj.tensor).real
            elif kind == "mat":
                u, vh = data
                n = s.size
                pi = weights[pos : pos + n].reshape(s.shape)
                pos += n
                coeff = pi * obj.weights[:, None] * s / smooth
                gm = np.einsum("grk,gk,gkc->grc", u, coeff, vh)
                grad += np.einsum("grc,grcn->n", gm.conj(), obj.tensor).real
            else:
                pi = weights[pos]
                pos += 1
                grad += pi * obj.weight * obj.matrix.T @ (data / smooth)
        return value, grad


# ------------------------------------------------------------------
# 仿射约束下的最小化
# ------------------------------------------------------------------


def _lp_minimize(
    seminorm: AtomicSeminorm, a_eq: np.ndarray, b_eq: np.ndarray, config: SolverConfig
) -> tuple[Estimate, Optional[np.ndarray]]:
    lp = LinearProgram(f"min[{seminorm.name}]")
    x = lp.variables(seminorm.total_dim)
    t = lp.variables(1, lower=0.0)
    if a_eq.shape[0]:
        lp.add_eq([(x, a_eq)], b_eq)
    lp.bound_seminorm(seminorm, x, t)
    lp.set_objective([(t, np.ones(1))])
    res = lp.solve(config.lp_method)
    if res.infeasible:
        return Estimate.infinity(metadata={"infeasible": True, "tier": "lp"}), None
    if not res.ok:
        logger.warning(f"LP 未收敛 name={seminorm.name} status={res.status}")
        return Estimate(float("nan"), BoundKind.APPROX, exhausted=True), None
    xs = res.x[x]
    value = seminorm.evaluate_total(xs)
    return (
        Estimate.exact(value, iterations=res.iterations, certificate=xs, metadata={"tier": "lp"}),
        xs,
    )


def _smooth_minimize(
    seminorm: AtomicSeminorm,
    x0: np.ndarray,
    basis: np.ndarray,
    config: SolverConfig,
) -> tuple[Estimate, np.ndarray]:
    model = SmoothModel(seminorm)
    scale = seminorm.evaluate_total(x0)
    if scale <= 0.0:
        return Estimate.exact(0.0, certificate=x0, metadata={"tier": "trivial"}), x0
    best_x, best = x0, scale
    z = np.zeros(basis.shape[1])
    per_stage = max(1, config.iterations // len(config.smoothing))
    iterations = 0
    mu_abs = config.smoothing[-1] * scale
    for rel in config.smoothing:
        mu_abs = rel * scale

        def fun(zz: np.ndarray) -> tuple[float, np.ndarray]:
            val, grad = model(x0 + basis @ zz, mu_abs)
            return val, basis.T @ grad

        res = minimize(fun, z, jac=True, method="L-BFGS-B", options={"maxiter": per_stage})
        z = res.x
        iterations += int(res.nit)
        cand = x0 + basis @ z
        val = seminorm.evaluate_total(cand)
        if val < best:
            best, best_x = val, cand
    # 次梯度精修
    step0 = 10.0 * mu_abs
    zz = z.copy()
    for k in range(1, config.polish_iterations + 1):
        g = basis.T @ seminorm.subgradient_total(x0 + basis @ zz)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            break
        zz = zz - (step0 / np.sqrt(k)) * g / norm
        val = seminorm.evaluate_total(x0 + basis @ zz)
        if val < best:
            best, best_x = val, x0 + basis @ zz
    iterations += config.polish_iterations
    tol = mu_abs * (np.log(max(model.pieces, 1)) + 1.0)
    return (
        Estimate(
            best,
            BoundKind.UPPER,
            tol=float(tol),
            iterations=iterations,
            certificate=best_x,
            metadata={"tier": "smooth"},
        ),
        best_x,
    )


def minimize_affine(
    seminorm: AtomicSeminorm,
    a_eq: np.ndarray,
    b_eq: np.ndarray,
    config: Optional[SolverConfig] = None,
    tier: str = "auto",
) -> Estimate:
    """
    min S(x) s.t. A x = b，x 为全部坐标（含辅助坐标）

    tier 为 "auto" 时多面体型走 LP；"smooth" 强制光滑化路径（用于交叉核对）。

    Returns:
        Estimate：多面体型为 exact，否则为 upper（可行点的精确值）；
        约束不可行时 infinite 且 metadata["infeasible"]=True
    """
    config = config or SolverConfig()
    a = np.atleast_2d(np.asarray(a_eq, dtype=float)).reshape(-1, seminorm.total_dim)
    b = np.asarray(b_eq, dtype=float).reshape(-1)
    if tier not in ("auto", "smooth"):
        raise StructuralError("未知的求解层级", details={"tier": tier})
    if tier == "auto" and seminorm.is_polyhedral:
        est, _ = _lp_minimize(seminorm, a, b, config)
        return est
    if a.shape[0]:
        x0, *_ = lstsq(a, b)
        residual = float(np.linalg.norm(a @ x0 - b))
        if residual > FEASIBILITY_TOL * max(1.0, float(np.linalg.norm(b))):
            return Estimate.infinity(metadata={"infeasible": True, "residual": residual})
        basis = null_space(a, rcond=1e-10)
    else:
        x0 = np.zeros(seminorm.total_dim)
        basis = np.eye(seminorm.total_dim)
    if basis.shape[1] == 0:
        return Estimate.exact(seminorm.evaluate_total(x0), certificate=x0)
    est, _ = _smooth_minimize(seminorm, x0, basis, config)
    return est


def minimize_aux(
    seminorm: AtomicSeminorm, v: np.ndarray, config: Optional[SolverConfig] = None
) -> Estimate:
    """带辅助坐标的半范数在可见坐标 v 处的值：对辅助坐标取下确界"""
    a = np.hstack([np.eye(seminorm.dim), np.zeros((seminorm.dim, seminorm.aux_dim))])
    return minimize_affine(seminorm, a, v, config)


def fiber_infimum(
    seminorm: AtomicSeminorm,
    constraint: np.ndarray,
    target: np.ndarray,
    config: Optional[SolverConfig] = None,
) -> Estimate:
    """
    inf{S(v) : Π v = w}

    Args:
        seminorm: 可见坐标上的半范数（可带辅助坐标）
        constraint: Π，形状 (m, dim)
        target: w
        config: 求解配置

    Returns:
        Estimate，certificate 为可见坐标上的最优点；metadata 记录 Π 的秩
    """
    pi = np.atleast_2d(np.asarray(constraint, dtype=float))
    w = np.asarray(target, dtype=float).reshape(-1)
    full = np.hstack([pi, np.zeros((pi.shape[0], seminorm.aux_dim))])
    est = minimize_affine(seminorm, full, w, config)
    rank = int(np.linalg.matrix_rank(pi, tol=1e-9))
    cert = est.certificate[: seminorm.dim] if est.certificate is not None else None
    return Estimate(
        est.value,
        est.kind,
        tol=est.tol,
        iterations=est.iterations,
        certificate=cert,
        infinite=est.infinite,
        exhausted=est.exhausted,
        metadata={**est.metadata, "rank": rank, "rows": pi.shape[0]},
    )


# ------------------------------------------------------------------
# 支撑函数
# ------------------------------------------------------------------


def support_function(
    seminorm: AtomicSeminorm,
    c: np.ndarray,
    config: Optional[SolverConfig] = None,
    tier: str = "auto",
) -> Estimate:
    """
    h(c) = sup{c·v : S(v) ≤ 1}

    c 不与核正交时返回 infinite；多面体型用 LP（精确），
    否则 h(c) = 1 / min{S(v) : c·v = 1}，以可行点给出下界。
    """
    config = config or SolverConfig()
    c = np.asarray(c, dtype=float).reshape(-1)
    norm_c = float(np.linalg.norm(c))
    if norm_c == 0.0:
        return Estimate.exact(0.0)
    kernel = seminorm.kernel_basis
    if kernel.shape[1] and np.linalg.norm(kernel.T @ c) > KERNEL_TOL * max(1.0, norm_c):
        return Estimate.infinity(metadata={"reason": "kernel"})
    if tier == "auto" and seminorm.is_polyhedral:
        lp = LinearProgram(f"support[{seminorm.name}]")
        x = lp.variables(seminorm.total_dim)
        lp.bound_seminorm(seminorm, x, bound=1.0)
        obj = np.concatenate([c, np.zeros(seminorm.aux_dim)])
        lp.set_objective([(x, obj)], maximize=True)
        res = lp.solve(config.lp_method)
        if res.unbounded:
            return Estimate.infinity(metadata={"reason": "unbounded"})
        if res.ok:
            return Estimate.exact(
                res.value, iterations=res.iterations, certificate=res.x[x][: seminorm.dim]
            )
        logger.warning(f"支撑函数 LP 失败 name={seminorm.name} status={res.status}")
    row = np.concatenate([c, np.zeros(seminorm.aux_dim)])[None, :]
    est = minimize_affine(seminorm, row, np.ones(1), config, tier="smooth")
    if est.infinite or not np.isfinite(est.value) or est.value <= 0.0:
        return Estimate.infinity(metadata={"reason": "degenerate"})
    value = 1.0 / est.value
    witness = None if est.certificate is None else est.certificate[: seminorm.dim] / est.value
    return Estimate(
        value,
        BoundKind.LOWER,
        tol=float(est.tol * value * value),
        iterations=est.iterations,
        certificate=witness,
        metadata={"tier": "smooth"},
    )


# ------------------------------------------------------------------
# 球上的搜索
# ------------------------------------------------------------------


def retraction_search(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    seminorm: AtomicSeminorm,
    starts: Sequence[np.ndarray],
    config: Optional[SolverConfig] = None,
    maximize: bool = True,
    iterations: Optional[int] = None,
) -> Estimate:
    """
    在 {S ≤ 1} 上做（超/次）梯度搜索，径向回缩 x ↦ x / max(1, S(x))

    球是平衡凸集，回缩后的点始终可行；返回找到的最好可行值。
    最大化时给出 lower，最小化时给出 upper。
    """
    config = config or SolverConfig()
    budget = iterations or config.ascent_iterations
    sign = 1.0 if maximize else -1.0
    best_val, best_x = -np.inf, None
    total = 0

    def retract(x: np.ndarray) -> np.ndarray:
        s = seminorm(x)
        return x / s if s > 1.0 else x

    for start in starts:
        x = retract(np.asarray(start, dtype=float))
        radius = max(float(np.linalg.norm(x)), 1e-3)
        val = sign * objective(x)
        if val > best_val:
            best_val, best_x = val, x
        for k in range(1, budget + 1):
            g = sign * gradient(x)
            gn = np.linalg.norm(g)
            if gn == 0.0:
                break
            x = retract(x + (0.5 * radius / np.sqrt(k)) * g / gn)
            val = sign * objective(x)
            total += 1
            if val > best_val:
                best_val, best_x = val, x
    kind = BoundKind.LOWER if maximize else BoundKind.UPPER
    return Estimate(
        float(sign * best_val),
        kind,
        iterations=total,
        certificate=best_x,
        metadata={"starts": len(starts)},
    )


def minimize_on_l1_ball(
    seminorm: AtomicSeminorm,
    base: np.ndarray,
    generators: np.ndarray,
    config: Optional[SolverConfig] = None,
) -> Estimate:
    """
    min_α S(base − W α)，约束 ‖α‖₁ ≤ 1（S 不带辅助坐标）

    光滑化后做带回溯的投影梯度，再用投影次梯度精修；
    certificate 为最优系数 α。
    """
    config = config or SolverConfig()
    w = np.asarray(generators, dtype=float)
    base = np.asarray(base, dtype=float)
    model = SmoothModel(seminorm)
    alpha = np.zeros(w.shape[1])
    best = seminorm.evaluate_total(base)
    best_alpha = alpha.copy()
    if best == 0.0 or w.shape[1] == 0:
        return Estimate.exact(best, certificate=best_alpha)
    # 起点：各生成元单独最优者
    for j in range(w.shape[1]):
        for sgn in (1.0, -1.0):
            cand = np.zeros(w.shape[1])
            cand[j] = sgn
            val = seminorm.evaluate_total(base - w @ cand)
            if val < best:
                best, best_alpha, alpha = val, cand, cand.copy()
    scale = max(best, 1e-12)
    per_stage = max(1, config.iterations // (4 * len(config.smoothing)))
    iterations = 0
    step = 1.0
    mu = config.smoothing[-1] * scale
    for rel in config.smoothing:
        mu = rel * scale
        for _ in range(per_stage):
            f, g = model(base - w @ alpha, mu)
            ga = -(w.T @ g)
            while True:
                cand = project_l1_ball(alpha - step * ga)
                fc, _ = model(base - w @ cand, mu)
                diff = cand - alpha
                if fc <= f + ga @ diff + (diff @ diff) / (2 * step) or step < 1e-12:
                    break
                step *= 0.5
            iterations += 1
            moved = np.linalg.norm(cand - alpha)
            alpha = cand
            val = seminorm.evaluate_total(base - w @ alpha)
            if val < best:
                best, best_alpha = val, alpha.copy()
            step *= 1.5
            if moved < 1e-14:
                break
    a = best_alpha.copy()
    step0 = 10.0 * mu
    for k in range(1, config.polish_iterations + 1):
        g = -(w.T @ seminorm.subgradient_total(base - w @ a))
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        a = project_l1_ball(a - (step0 / np.sqrt(k)) * g / gn)
        val = seminorm.evaluate_total(base - w @ a)
        if val < best:
            best, best_alpha = val, a.copy()
    tol = mu * (np.log(max(model.pieces, 1)) + 1.0)
    return Estimate(
        best,
        BoundKind.UPPER,
        tol=float(tol),
        iterations=iterations + config.polish_iterations,
        certificate=best_alpha,
    )
