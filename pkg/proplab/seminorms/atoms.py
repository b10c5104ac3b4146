"""
原子化半范数

S(x) = max( max_g w_g‖T_g x‖ , max_t w_t‖P_t x‖₁ )

- AtomGroup：同尺寸 (r, c) 的一批线性原子，张量形状 (G, r, c, n)，复值；
  r==1 或 c==1 时范数即向量 2-范数，否则为算子范数（批量 SVD）
- L1Term：实矩阵 P 的 ℓ¹ 项，用于规范函数中的系数范数
- aux_dim > 0 时坐标 = [可见坐标 | 辅助坐标]，值取辅助坐标上的下确界，
  用于以隐变量定义的 D-范数（Minkowski 规范、商范数）
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Callable, Iterable, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.linalg import null_space, orth

from proplab.exceptions import StructuralError, ValidationError

if TYPE_CHECKING:
    from proplab.config import SolverConfig

# 判定 Re/Im 行向量共线（秩一）的相对容差
RANK_ONE_TOL = 1e-12

# 隐变量半范数的求值缓存上限
CACHE_LIMIT = 4096

# 制表映射在随机组合上的相对线性误差上限
LINEARITY_TOL = 1e-8


@dataclass(frozen=True)
class AtomGroup:
    """一批尺寸相同的线性原子 x ↦ T_g x ∈ C^{r×c}"""

    tensor: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.tensor, dtype=complex)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if t.ndim != 4 or t.shape[0] != w.shape[0]:
            raise StructuralError(
                "原子张量形状应为 (G, r, c, n) 且与权重数量一致",
                details={"tensor": t.shape, "weights": w.shape},
            )
        if np.any(w <= 0):
            raise StructuralError("原子权重必须为正", details={"min_weight": float(w.min())})
        object.__setattr__(self, "tensor", t)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.tensor.shape[0]

    @property
    def rows(self) -> int:
        return self.tensor.shape[1]

    @property
    def cols(self) -> int:
        return self.tensor.shape[2]

    @property
    def dim(self) -> int:
        return self.tensor.shape[3]

    @property
    def is_vector(self) -> bool:
        return self.rows == 1 or self.cols == 1

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("grcn,n->grc", self.tensor, x)

    def norms(self, x: np.ndarray) -> np.ndarray:
        mats = self.apply(x)
        if self.is_vector:
            return np.linalg.norm(mats.reshape(self.size, -1), axis=1)
        return np.linalg.norm(mats, ord=2, axis=(1, 2))

    def values(self, x: np.ndarray) -> np.ndarray:
        return self.weights * self.norms(x)

    def compose(self, matrix: np.ndarray) -> "AtomGroup":
        return AtomGroup(np.einsum("grcn,nk->grck", self.tensor, matrix), self.weights)

    def scaled(self, factor: float) -> "AtomGroup":
        return AtomGroup(self.tensor, self.weights * factor)

    def real_rows(self) -> np.ndarray:
        flat = self.tensor.reshape(-1, self.dim)
        return np.vstack([flat.real, flat.imag])


@dataclass(frozen=True)
class L1Term:
    """w·‖P x‖₁"""

    matrix: np.ndarray
    weight: float = 1.0

    def __post_init__(self) -> None:
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if self.weight <= 0:
            raise StructuralError("ℓ¹ 项权重必须为正", details={"weight": self.weight})
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def value(self, x: np.ndarray) -> float:
        return float(self.weight * np.abs(self.matrix @ x).sum())

    def compose(self, matrix: np.ndarray) -> "L1Term":
        return L1Term(self.matrix @ matrix, self.weight)

    def scaled(self, factor: float) -> "L1Term":
        return L1Term(self.matrix, self.weight * factor)


class AtomicSeminorm:
    """原子的加权最大值（可带辅助坐标）"""

    def __init__(
        self,
        dim: int,
        groups: Sequence[AtomGroup] = (),
        l1_terms: Sequence[L1Term] = (),
        aux_dim: int = 0,
        name: str = "",
        solver: Optional["SolverConfig"] = None,
    ):
        self.dim = int(dim)
        self.aux_dim = int(aux_dim)
        total = self.dim + self.aux_dim
        merged: dict[tuple[int, int], list[AtomGroup]] = {}
        for g in groups:
            if g.dim != total:
                raise StructuralError(
                    "原子的坐标维数与半范数不一致",
                    details={"expected": total, "got": g.dim, "name": name},
                )
            merged.setdefault((g.rows, g.cols), []).append(g)
        self.groups: tuple[AtomGroup, ...] = tuple(
            AtomGroup(
                np.concatenate([g.tensor for g in gs], axis=0),
                np.concatenate([g.weights for g in gs]),
            )
            for gs in merged.values()
        )
        for term in l1_terms:
            if term.dim != total:
                raise StructuralError(
                    "ℓ¹ 项的坐标维数与半范数不一致",
                    details={"expected": total, "got": term.dim, "name": name},
                )
        self.l1_terms: tuple[L1Term, ...] = tuple(l1_terms)
        self.name = name or "S"
        self.solver = solver
        self._cache: dict[bytes, float] = {}
        self._lock = threading.Lock()

    # ------------------------------------------------------------------
    # 求值
    # ------------------------------------------------------------------

    @property
    def total_dim(self) -> int:
        return self.dim + self.aux_dim

    @property
    def num_atoms(self) -> int:
        return sum(g.size for g in self.groups) + len(self.l1_terms)

    def evaluate_total(self, x: np.ndarray) -> float:
        """在全部坐标（含辅助坐标）上求值"""
        x = np.asarray(x, dtype=float)
        best = 0.0
        for g in self.groups:
            if g.size:
                best = max(best, float(g.values(x).max()))
        for term in self.l1_terms:
            best = max(best, term.value(x))
        return best

    def value(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise StructuralError(
                "坐标维数与半范数不一致",
                details={"expected": self.dim, "got": v.shape, "name": self.name},
            )
        if self.aux_dim == 0:
            return self.evaluate_total(v)
        key = v.tobytes()
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        from proplab.kernels.engine import minimize_aux

        est = minimize_aux(self, v, self.solver)
        with self._lock:
            if len(self._cache) >= CACHE_LIMIT:
                self._cache.clear()
            self._cache[key] = est.value
        return est.value

    __call__ = value

    # ------------------------------------------------------------------
    # 变换
    # ------------------------------------------------------------------

    def compose(self, matrix: np.ndarray, name: str = "") -> "AtomicSeminorm":
        """沿线性映射拉回：u ↦ S(M u)，辅助坐标保持不变"""
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != self.dim:
            raise StructuralError(
                "拉回矩阵的行数必须等于半范数维数",
                details={"expected_rows": self.dim, "got": m.shape, "name": self.name},
            )
        full = np.zeros((self.total_dim, m.shape[1] + self.aux_dim))
        full[: self.dim, : m.shape[1]] = m
        full[self.dim :, m.shape[1] :] = np.eye(self.aux_dim)
        return AtomicSeminorm(
            m.shape[1],
            [g.compose(full) for g in self.groups],
            [t.compose(full) for t in self.l1_terms],
            aux_dim=self.aux_dim,
            name=name or self.name,
            solver=self.solver,
        )

    def with_hidden(
        self, visible: np.ndarray, hidden: np.ndarray, name: str = ""
    ) -> "AtomicSeminorm":
        """
        w ↦ inf_z S(V w + N z)：z 成为新的辅助坐标（排在原辅助坐标之前）

        Args:
            visible: V，形状 (dim, m)
            hidden: N，形状 (dim, k)
            name: 名称
        """
        v = np.asarray(visible, dtype=float)
        h = np.asarray(hidden, dtype=float)
        if h.ndim == 1:
            h = h[:, None]
        if v.ndim != 2 or v.shape[0] != self.dim or h.shape[0] != self.dim:
            raise StructuralError(
                "可见映射的行数必须等于半范数维数",
                details={"expected_rows": self.dim, "got": (v.shape, h.shape), "name": self.name},
            )
        m, k = v.shape[1], h.shape[1]
        full = np.zeros((self.total_dim, m + k + self.aux_dim))
        full[: self.dim, :m] = v
        full[: self.dim, m : m + k] = h
        full[self.dim :, m + k :] = np.eye(self.aux_dim)
        return AtomicSeminorm(
            m,
            [g.compose(full) for g in self.groups],
            [t.compose(full) for t in self.l1_terms],
            aux_dim=k + self.aux_dim,
            name=name or self.name,
            solver=self.solver,
        )

    def scaled(self, factor: float, name: str = "") -> "AtomicSeminorm":
        if factor <= 0:
            raise StructuralError("缩放因子必须为正", details={"factor": factor})
        return AtomicSeminorm(
            self.dim,
            [g.scaled(factor) for g in self.groups],
            [t.scaled(factor) for t in self.l1_terms],
            aux_dim=self.aux_dim,
            name=name or self.name,
            solver=self.solver,
        )

    def with_solver(self, solver: "SolverConfig") -> "AtomicSeminorm":
        return AtomicSeminorm(
            self.dim, self.groups, self.l1_terms, self.aux_dim, self.name, solver
        )

    # ------------------------------------------------------------------
    # 结构信息
    # ------------------------------------------------------------------

    @cached_property
    def polyhedral_rows(self) -> Optional[np.ndarray]:
        """
        全部原子为秩一实泛函时返回行矩阵 R（已乘权重），使 S = max|R x|；
        否则返回 None。ℓ¹ 项不计入，见 is_polyhedral。
        """
        rows = []
        for g in self.groups:
            if g.rows != 1 or g.cols != 1:
                return None
            flat = g.tensor.reshape(g.size, self.total_dim)
            for w, t in zip(g.weights, flat):
                pair = np.vstack([t.real, t.imag])
                _, s, vh = np.linalg.svd(pair, full_matrices=False)
                if s[0] == 0.0:
                    continue
                if s.size > 1 and s[1] > RANK_ONE_TOL * s[0]:
                    return None
                rows.append(w * s[0] * vh[0])
        if not rows:
            return np.zeros((0, self.total_dim))
        return np.vstack(rows)

    @property
    def is_polyhedral(self) -> bool:
        return self.polyhedral_rows is not None

    def stacked_real(self) -> np.ndarray:
        """全部原子线性部分的实堆叠矩阵，零空间即核"""
        blocks = [g.real_rows() for g in self.groups]
        blocks += [t.matrix for t in self.l1_terms]
        if not blocks:
            return np.zeros((0, self.total_dim))
        return np.vstack(blocks)

    @cached_property
    def kernel_basis(self) -> np.ndarray:
        """可见坐标上核的正交基，形状 (dim, k)"""
        stacked = self.stacked_real()
        if stacked.shape[0] == 0:
            return np.eye(self.dim)
        ns = null_space(stacked, rcond=1e-10)
        if ns.size == 0:
            return np.zeros((self.dim, 0))
        visible = ns[: self.dim]
        if np.allclose(visible, 0.0, atol=1e-12):
            return np.zeros((self.dim, 0))
        return orth(visible, rcond=1e-10)

    def subgradient_total(self, x: np.ndarray) -> np.ndarray:
        """取到最大值的原子给出的一个次梯度"""
        x = np.asarray(x, dtype=float)
        best, grad = -1.0, np.zeros(self.total_dim)
        for g in self.groups:
            if not g.size:
                continue
            mats = g.apply(x)
            vals = g.weights * (
                np.linalg.norm(mats.reshape(g.size, -1), axis=1)
                if g.is_vector
                else np.linalg.norm(mats, ord=2, axis=(1, 2))
            )
            i = int(np.argmax(vals))
            if vals[i] <= best:
                continue
            best = float(vals[i])
            m = mats[i]
            if vals[i] == 0.0:
                grad = np.zeros(self.total_dim)
                continue
            if g.is_vector:
                direction = m / np.linalg.norm(m)
            else:
                u, _, vh = np.linalg.svd(m)
                direction = np.outer(u[:, 0], vh[0])
            grad = g.weights[i] * np.einsum("rc,rck->k", direction.conj(), g.tensor[i]).real
        for term in self.l1_terms:
            val = term.value(x)
            if val > best:
                best = val
                grad = term.weight * term.matrix.T @ np.sign(term.matrix @ x)
        return grad

    def __repr__(self) -> str:
        return (
            f"AtomicSeminorm(name={self.name}, dim={self.dim}, aux={self.aux_dim}, "
            f"atoms={self.num_atoms})"
        )


Part = Union[AtomicSeminorm, tuple[AtomicSeminorm, float]]


def combine_max(parts: Iterable[Part], name: str = "") -> AtomicSeminorm:
    """
    加权最大值 max_i w_i S_i

    各部分的辅助坐标依次拼接，因而隐变量彼此独立。
    """
    items: list[tuple[AtomicSeminorm, float]] = []
    for p in parts:
        if isinstance(p, AtomicSeminorm):
            items.append((p, 1.0))
        else:
            items.append((p[0], float(p[1])))
    if not items:
        raise StructuralError("combine_max 至少需要一个分量")
    dim = items[0][0].dim
    for s, w in items:
        if s.dim != dim:
            raise StructuralError(
                "combine_max 分量的坐标空间不一致",
                details={"expected": dim, "got": s.dim, "part": s.name},
            )
        if w <= 0:
            raise StructuralError("combine_max 权重必须为正", details={"weight": w, "part": s.name})
    aux_total = sum(s.aux_dim for s, _ in items)
    groups: list[AtomGroup] = []
    terms: list[L1Term] = []
    pos = dim
    for s, w in items:
        embed = np.zeros((s.total_dim, dim + aux_total))
        embed[:dim, :dim] = np.eye(dim)
        embed[dim:, pos : pos + s.aux_dim] = np.eye(s.aux_dim)
        pos += s.aux_dim
        groups.extend(g.compose(embed).scaled(w) for g in s.groups)
        terms.extend(t.compose(embed).scaled(w) for t in s.l1_terms)
    solver = next((s.solver for s, _ in items if s.solver is not None), None)
    combined = AtomicSeminorm(
        dim, groups, terms, aux_dim=aux_total, name=name or "max", solver=solver
    )
    logger.debug(f"组合半范数 name={combined.name} parts={len(items)} aux={aux_total}")
    return combined


def zero_seminorm(dim: int, name: str = "0") -> AtomicSeminorm:
    return AtomicSeminorm(dim, name=name)


def check_linear(
    fn: Callable[[np.ndarray], Sequence[np.ndarray]],
    tensors: Sequence[np.ndarray],
    name: str = "",
    seed: int = 0,
) -> None:
    """在随机组合 x 上比较 fn(x) 与制表张量给出的 Σ x_i·M(e_i)"""
    dim = tensors[0].shape[-1]
    x = np.random.default_rng(seed).normal(size=dim)
    values = [np.atleast_2d(np.asarray(m, dtype=complex)) for m in fn(x)]
    if len(values) != len(tensors) or any(v.shape != t.shape[:-1] for v, t in zip(values, tensors)):
        raise ValidationError(
            "映射在随机组合上的输出结构与基向量上不一致",
            details={"name": name, "outputs": len(values), "expected": len(tensors)},
        )
    for idx, (v, t) in enumerate(zip(values, tensors)):
        expected = t @ x
        gap = float(np.abs(v - expected).max())
        scale = 1.0 + float(np.abs(expected).max())
        if gap > LINEARITY_TOL * scale:
            raise ValidationError(
                "制表映射不是线性的",
                details={"name": name, "output": idx, "gap": gap},
            )


def atoms_from_map(
    dim: int,
    fn: Callable[[np.ndarray], Sequence[np.ndarray]],
    name: str = "",
    weight: float = 1.0,
) -> AtomicSeminorm:
    """
    把实线性映射 x ↦ (M_1(x), …, M_k(x)) 在标准基上制表，得到 max_i ‖M_i(x)‖

    Args:
        dim: 输入坐标维数
        fn: 实线性映射，返回若干复矩阵（向量按列矩阵处理）
        name: 名称
        weight: 统一权重

    Raises:
        ValidationError: 映射在随机组合上与制表结果不一致（非线性）
    """
    eye = np.eye(dim)
    columns = [
        [np.atleast_2d(np.asarray(m, dtype=complex)) for m in fn(eye[i])] for i in range(dim)
    ]
    if dim == 0 or not columns[0]:
        return AtomicSeminorm(dim, name=name)
    tensors = [
        np.stack([columns[i][idx] for i in range(dim)], axis=-1) for idx in range(len(columns[0]))
    ]
    check_linear(fn, tensors, name)
    groups = [AtomGroup(t[None, ...], np.array([weight])) for t in tensors]
    return AtomicSeminorm(dim, groups, name=name)

