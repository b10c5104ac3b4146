"""
容许函数三元组 (F, G, H)

F(x, y, l_x, l_y) ≥ x·l_y + y·l_x，H(x, y) ≥ 2xy，G(x, y, z) ≥ (x + y)z，
且各自在每个变量上弱递增。用户给出的函数是黑盒，因此在 [0,10]^arity 的
网格（约 10⁴ 点）上验证而非证明。
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from loguru import logger

from proplab.exceptions import ValidationError

FFunc = Callable[[float, float, float, float], float]
HFunc = Callable[[float, float], float]
GFunc = Callable[[float, float, float], float]

GRID_POINTS = 10_000
GRID_MAX = 10.0
GRID_TOL = 1e-9


def leibniz_f(x: float, y: float, lx: float, ly: float) -> float:
    return x * ly + y * lx


def leibniz_h(x: float, y: float) -> float:
    return 2.0 * x * y


def leibniz_g(x: float, y: float, z: float) -> float:
    return (x + y) * z


def _grid(arity: int) -> np.ndarray:
    per_axis = max(2, int(round(GRID_POINTS ** (1.0 / arity))))
    return np.linspace(0.0, GRID_MAX, per_axis)


def _tabulate(fn: Callable[..., float], arity: int) -> tuple[np.ndarray, list[np.ndarray]]:
    axis = _grid(arity)
    mesh = np.meshgrid(*([axis] * arity), indexing="ij")
    flat = [m.ravel() for m in mesh]
    values = np.array([fn(*pt) for pt in zip(*flat)], dtype=float).reshape(mesh[0].shape)
    return values, mesh


def _monotone_violation(values: np.ndarray) -> float:
    worst = 0.0
    for ax in range(values.ndim):
        diffs = np.diff(values, axis=ax)
        if diffs.size:
            worst = max(worst, float(-diffs.min()))
    return worst


@dataclass(frozen=True)
class PermissibleTriple:
    """容许三元组，name 用于报告"""

    F: FFunc = leibniz_f
    H: HFunc = leibniz_h
    G: GFunc = leibniz_g
    name: str = "leibniz"

    @classmethod
    def leibniz(cls) -> "PermissibleTriple":
        return cls()

    def with_h(self, h: HFunc, name: str) -> "PermissibleTriple":
        return PermissibleTriple(self.F, h, self.G, name)

    def margins(self) -> dict[str, float]:
        """网格上的最差余量（负值表示违反），以及单调性违反量"""
        f_vals, f_mesh = _tabulate(self.F, 4)
        x, y, lx, ly = f_mesh
        h_vals, h_mesh = _tabulate(self.H, 2)
        g_vals, g_mesh = _tabulate(self.G, 3)
        return {
            "F_lower": float((f_vals - (x * ly + y * lx)).min()),
            "H_lower": float((h_vals - 2.0 * h_mesh[0] * h_mesh[1]).min()),
            "G_lower": float((g_vals - (g_mesh[0] + g_mesh[1]) * g_mesh[2]).min()),
            "F_monotone": -_monotone_violation(f_vals),
            "H_monotone": -_monotone_violation(h_vals),
            "G_monotone": -_monotone_violation(g_vals),
        }

    def validate(self, tol: float = GRID_TOL) -> "PermissibleTriple":
        margins = self.margins()
        bad = {k: v for k, v in margins.items() if v < -tol}
        if bad:
            raise ValidationError("函数三元组不是容许的", details={"triple": self.name, **bad})
        logger.debug(f"容许三元组验证通过 name={self.name}")
        return self


def qvba_triple(base: PermissibleTriple, p: int) -> PermissibleTriple:
    """自由模 X^p 的 D-范数使用的 H(x, y) = 8p·F(x, y, x, y)"""
    f = base.F

    def h(x: float, y: float) -> float:
        return 8.0 * p * f(x, y, x, y)

    return base.with_h(h, f"{base.name}/qvba[p={p}]")


def free_module_triple(base: PermissibleTriple, p: int) -> PermissibleTriple:
    """自由模隧道枢纽使用的 H(x, y) = max{8p·F(x, y, x, y), 2p·x²y²}"""
    f = base.F

    def h(x: float, y: float) -> float:
        return max(8.0 * p * f(x, y, x, y), 2.0 * p * x * x * y * y)

    return base.with_h(h, f"{base.name}/free[p={p}]")
