"""
Minkowski 规范函数

g(v) = inf{t > 0 : v/t ∈ C}，C 由成员判定给出（闭、平衡、凸）。
先倍增/减半找到括号，再二分；沿射线的全部判定记录在案，
出现"内点比外点更靠外"即报告不单调。
"""
from __future__ import annotations

from typing import Callable

import numpy as np
from loguru import logger

from proplab.exceptions import NonMonotoneOracleError
from proplab.kernels.estimate import BoundKind, Estimate

Membership = Callable[[np.ndarray], bool]

GAUGE_TOL = 1e-6
T_MAX = 1e6
T_MIN = 1e-12


def minkowski_gauge(
    membership: Membership,
    point: np.ndarray,
    tol: float = GAUGE_TOL,
    t_max: float = T_MAX,
) -> Estimate:
    """
    规范函数的二分估计

    Args:
        membership: 成员判定
        point: 待求点
        tol: 相对容差（区间宽度 ≤ tol·max(1, t)）
        t_max: 超过此值仍不在集合内则返回无穷

    Returns:
        Estimate，值为括号右端（v/t 已验证在集合内），kind=upper
    """
    v = np.asarray(point, dtype=float)
    if not np.any(v):
        return Estimate.exact(0.0)
    history: list[tuple[float, bool]] = []

    def inside(t: float) -> bool:
        ok = bool(membership(v / t))
        history.append((t, ok))
        return ok

    def check_monotone() -> None:
        ins = [t for t, ok in history if ok]
        outs = [t for t, ok in history if not ok]
        if ins and outs and min(ins) < max(outs):
            raise NonMonotoneOracleError(inside=min(ins), outside=max(outs))

    hi = 1.0
    if inside(hi):
        lo = hi / 2.0
        while inside(lo):
            hi = lo
            lo /= 2.0
            if lo < T_MIN:
                check_monotone()
                return Estimate(hi, BoundKind.UPPER, tol=hi, iterations=len(history))
    else:
        lo = hi
        hi = 2.0
        while not inside(hi):
            lo = hi
            hi *= 2.0
            if hi > t_max:
                check_monotone()
                logger.debug(f"规范函数超出上限 t_max={t_max}")
                return Estimate.infinity(iterations=len(history), metadata={"t_max": t_max})
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    check_monotone()
    return Estimate(hi, BoundKind.UPPER, tol=hi - lo, iterations=len(history))
