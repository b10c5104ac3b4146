"""
单纯形与 ℓ¹ 球上的欧氏投影（排序阈值法，O(n log n)）

用于锚点凸包系数 I(J) = {t : Σ|t_j| ≤ 1} 上的投影次梯度法。
"""
from __future__ import annotations

import numpy as np

from proplab.exceptions import StructuralError


def project_simplex(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """argmin ½‖w − v‖²，约束 Σw = radius、w ≥ 0"""
    if radius <= 0:
        raise StructuralError("单纯形半径必须为正", details={"radius": radius})
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise StructuralError("投影只接受一维向量", details={"shape": v.shape})
    if abs(v.sum() - radius) <= 1e-15 and np.all(v >= 0):
        return v.copy()
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > (cssv - radius))[0][-1]
    theta = (cssv[rho] - radius) / (rho + 1.0)
    return np.clip(v - theta, 0.0, None)


def project_l1_ball(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """argmin ½‖w − v‖²，约束 ‖w‖₁ ≤ radius"""
    v = np.asarray(v, dtype=float)
    u = np.abs(v)
    if u.sum() <= radius:
        return v.copy()
    return project_simplex(u, radius) * np.sign(v)
