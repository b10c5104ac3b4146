"""
Wasserstein-1 距离（交换情形的 Monge-Kantorovich 度量）

运输线性规划：min Σ d_ij P_ij，行和为 μ、列和为 ν、P ≥ 0。
"""
from __future__ import annotations

import numpy as np
from loguru import logger

from proplab.exceptions import StructuralError, ValidationError
from proplab.kernels.estimate import Estimate
from proplab.kernels.lp import LinearProgram
from proplab.seminorms.builders import validate_metric

MASS_TOL = 1e-9


def _probability(vec: np.ndarray, label: str) -> np.ndarray:
    p = np.asarray(vec, dtype=float).reshape(-1)
    if np.any(p < -MASS_TOL):
        raise ValidationError("概率向量含负分量", details={"which": label, "min": float(p.min())})
    if abs(p.sum() - 1.0) > MASS_TOL:
        raise ValidationError("概率向量之和不为 1", details={"which": label, "sum": float(p.sum())})
    return np.clip(p, 0.0, None)


def wasserstein1(
    mu: np.ndarray, nu: np.ndarray, dist: np.ndarray, method: str = "highs"
) -> Estimate:
    """
    W₁(μ, ν)

    Args:
        mu: 概率向量
        nu: 概率向量
        dist: 距离矩阵
        method: linprog 方法

    Returns:
        精确 Estimate，certificate 为展平的最优运输方案
    """
    d = validate_metric(dist)
    p = _probability(mu, "mu")
    q = _probability(nu, "nu")
    n = d.shape[0]
    if p.shape != (n,) or q.shape != (n,):
        raise StructuralError(
            "概率向量与距离矩阵维数不一致",
            details={"points": n, "mu": p.shape, "nu": q.shape},
        )
    if np.allclose(p, q, atol=1e-15):
        return Estimate.exact(0.0, certificate=np.diag(p).ravel())
    lp = LinearProgram("transport")
    plan = lp.variables(n * n, lower=0.0)
    rows = np.kron(np.eye(n), np.ones((1, n)))
    cols = np.kron(np.ones((1, n)), np.eye(n))
    lp.add_eq([(plan, rows)], p)
    lp.add_eq([(plan, cols)], q)
    lp.set_objective([(plan, d.ravel())])
    res = lp.solve(method)
    if not res.ok:
        raise ValidationError("运输规划求解失败", details={"status": res.status, "message": res.message})
    value = max(0.0, res.value)
    logger.debug(f"W1 points={n} value={value:.6g}")
    return Estimate.exact(value, iterations=res.iterations, certificate=res.x[plan])
