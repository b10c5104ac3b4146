"""
稀疏线性规划装配器

按变量块登记约束，最后一次性拼成 scipy.sparse 矩阵交给 linprog（HiGHS）。
多面体型半范数的约束 S(x) ≤ t 由 bound_seminorm 展开：
每个秩一原子两条不等式，ℓ¹ 项引入松弛变量。
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.optimize import linprog

from proplab.exceptions import StructuralError
from proplab.seminorms.atoms import AtomicSeminorm

Term = tuple[slice, np.ndarray]


@dataclass
class LPResult:
    """线性规划求解结果"""

    status: int
    value: float
    x: Optional[np.ndarray]
    message: str = ""
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status == 0

    @property
    def infeasible(self) -> bool:
        return self.status == 2

    @property
    def unbounded(self) -> bool:
        return self.status == 3


class LinearProgram:
    """按块装配的线性规划（默认最小化）"""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.size = 0
        self._lower: list[np.ndarray] = []
        self._upper: list[np.ndarray] = []
        self._ub: list[tuple[list[Term], np.ndarray]] = []
        self._eq: list[tuple[list[Term], np.ndarray]] = []
        self._objective: list[Term] = []
        self._maximize = False

    # ------------------------------------------------------------------
    # 变量与约束
    # ------------------------------------------------------------------

    def variables(
        self, count: int, lower: Optional[float] = None, upper: Optional[float] = None
    ) -> slice:
        sl = slice(self.size, self.size + count)
        self.size += count
        self._lower.append(np.full(count, -np.inf if lower is None else lower))
        self._upper.append(np.full(count, np.inf if upper is None else upper))
        return sl

    def _check(self, terms: Sequence[Term], rhs: np.ndarray) -> np.ndarray:
        b = np.atleast_1d(np.asarray(rhs, dtype=float))
        for sl, m in terms:
            width = sl.stop - sl.start
            if m.shape != (b.shape[0], width):
                raise StructuralError(
                    "约束块尺寸不匹配",
                    details={"lp": self.name, "block": m.shape, "expected": (b.shape[0], width)},
                )
        return b

    def add_ub(self, terms: Sequence[Term], rhs: Union[float, np.ndarray]) -> None:
        """Σ M_i x_i ≤ rhs"""
        mats = [(sl, np.atleast_2d(np.asarray(m, dtype=float))) for sl, m in terms]
        self._ub.append((mats, self._check(mats, rhs)))

    def add_eq(self, terms: Sequence[Term], rhs: Union[float, np.ndarray]) -> None:
        """Σ M_i x_i = rhs"""
        mats = [(sl, np.atleast_2d(np.asarray(m, dtype=float))) for sl, m in terms]
        self._eq.append((mats, self._check(mats, rhs)))

    def set_objective(self, terms: Sequence[Term], maximize: bool = False) -> None:
        self._objective = [(sl, np.asarray(c, dtype=float).reshape(-1)) for sl, c in terms]
        self._maximize = maximize

    def bound_seminorm(
        self,
        seminorm: AtomicSeminorm,
        x: slice,
        t: Optional[slice] = None,
        bound: float = 1.0,
    ) -> None:
        """
        添加 S(x) ≤ t（t 为单变量块）或 S(x) ≤ bound

        x 必须覆盖半范数的全部坐标（含辅助坐标）。
        """
        rows = seminorm.polyhedral_rows
        if rows is None:
            raise StructuralError("半范数不是多面体型，不能写成线性约束", details={"name": seminorm.name})
        width = x.stop - x.start
        if width != seminorm.total_dim:
            raise StructuralError(
                "变量块与半范数维数不一致",
                details={"block": width, "total_dim": seminorm.total_dim},
            )

        def limit(count: int) -> tuple[list[Term], np.ndarray]:
            if t is None:
                return [], np.full(count, bound)
            return [(t, -np.ones((count, 1)))], np.zeros(count)

        if rows.shape[0]:
            extra, rhs = limit(rows.shape[0])
            self.add_ub([(x, rows)] + extra, rhs)
            self.add_ub([(x, -rows)] + extra, rhs)
        for term in seminorm.l1_terms:
            m = term.matrix
            s = self.variables(m.shape[0], lower=0.0)
            eye = np.eye(m.shape[0])
            self.add_ub([(x, m), (s, -eye)], np.zeros(m.shape[0]))
            self.add_ub([(x, -m), (s, -eye)], np.zeros(m.shape[0]))
            extra, rhs = limit(1)
            self.add_ub([(s, term.weight * np.ones((1, m.shape[0])))] + extra, rhs)

    # ------------------------------------------------------------------
    # 求解
    # ------------------------------------------------------------------

    def _assemble(self, blocks: list[tuple[list[Term], np.ndarray]]):
        if not blocks:
            return None, None
        mats, rhs = [], []
        for terms, b in blocks:
            row = sp.lil_matrix((b.shape[0], self.size))
            for sl, m in terms:
                row[:, sl] = m
            mats.append(row.tocsr())
            rhs.append(b)
        return sp.vstack(mats).tocsr(), np.concatenate(rhs)

    def solve(self, method: str = "highs") -> LPResult:
        c = np.zeros(self.size)
        for sl, coeffs in self._objective:
            c[sl] += coeffs
        if self._maximize:
            c = -c
        a_ub, b_ub = self._assemble(self._ub)
        a_eq, b_eq = self._assemble(self._eq)
        bounds = list(zip(np.concatenate(self._lower), np.concatenate(self._upper)))
        bounds = [
            (None if lo == -np.inf else lo, None if hi == np.inf else hi) for lo, hi in bounds
        ]
        res = linprog(
            c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method=method
        )
        value = float(res.fun) if res.status == 0 else float("nan")
        if self._maximize and res.status == 0:
            value = -value
        logger.debug(
            f"LP 求解 name={self.name} vars={self.size} status={res.status} value={value:.6g}"
        )
        return LPResult(
            status=int(res.status),
            value=value,
            x=np.asarray(res.x) if res.x is not None else None,
            message=str(res.message),
            iterations=int(getattr(res, "nit", 0) or 0),
        )
