"""
有限维 C*-代数：形状与元素

代数 𝔄 = M_{n_1} ⊕ … ⊕ M_{n_K} 由块维数序列描述；元素以块列表存储。

实坐标约定：每个块按 [Re.ravel(), Im.ravel()] 展开后依次拼接，
因此直和的坐标就是各分量坐标的拼接。自伴部分使用正交的厄米基
（E_ii、(E_ij+E_ji)/√2、i(E_ij−E_ji)/√2），交换情形下自伴坐标即对角值。
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from proplab.exceptions import StructuralError

# 桌面规模上限：Σ n_k² ≤ 4096
MAX_TOTAL_DIM = 4096

# 自伴判定容差
SELF_ADJOINT_TOL = 1e-12

Scalar = Union[int, float, complex]


@dataclass(frozen=True)
class AlgebraShape:
    """块对角代数的形状 (n_1, …, n_K)"""

    block_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.block_dims)
        object.__setattr__(self, "block_dims", dims)
        if len(dims) < 1:
            raise StructuralError("代数至少需要一个块", details={"block_dims": dims})
        if any(n < 1 for n in dims):
            raise StructuralError("块维数必须为正整数", details={"block_dims": dims})
        if sum(n * n for n in dims) > MAX_TOTAL_DIM:
            raise StructuralError(
                "代数规模超出桌面上限",
                details={"total_dim": sum(n * n for n in dims), "limit": MAX_TOTAL_DIM},
            )

    # ------------------------------------------------------------------
    # 维数与偏移
    # ------------------------------------------------------------------

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    @property
    def dim(self) -> int:
        """复维数 Σ n_k²（也是自伴部分的实维数）"""
        return sum(n * n for n in self.block_dims)

    @property
    def real_dim(self) -> int:
        return 2 * self.dim

    @property
    def sa_dim(self) -> int:
        return self.dim

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """各块在实坐标中的起始位置"""
        out, pos = [], 0
        for n in self.block_dims:
            out.append(pos)
            pos += 2 * n * n
        return tuple(out)

    @cached_property
    def sa_offsets(self) -> tuple[int, ...]:
        out, pos = [], 0
        for n in self.block_dims:
            out.append(pos)
            pos += n * n
        return tuple(out)

    @property
    def label(self) -> str:
        return "⊕".join("C" if n == 1 else f"M{n}" for n in self.block_dims)

    def concat(self, other: "AlgebraShape") -> "AlgebraShape":
        """直和形状"""
        return AlgebraShape(self.block_dims + other.block_dims)

    # ------------------------------------------------------------------
    # 自伴基
    # ------------------------------------------------------------------

    @cached_property
    def sa_basis(self) -> np.ndarray:
        """实坐标中的自伴正交基，形状 (real_dim, sa_dim)"""
        basis = np.zeros((self.real_dim, self.sa_dim))
        for k, n in enumerate(self.block_dims):
            off, col0 = self.offsets[k], self.sa_offsets[k]
            col = col0
            for i in range(n):
                basis[off + i * n + i, col] = 1.0
                col += 1
            s = 1.0 / np.sqrt(2.0)
            for i in range(n):
                for j in range(i + 1, n):
                    # (E_ij + E_ji)/√2
                    basis[off + i * n + j, col] = s
                    basis[off + j * n + i, col] = s
                    col += 1
                    # i(E_ij − E_ji)/√2，实部为零，虚部 +s 于 (i,j)、−s 于 (j,i)
                    basis[off + n * n + i * n + j, col] = s
                    basis[off + n * n + j * n + i, col] = -s
                    col += 1
        return basis

    @cached_property
    def unit_coords(self) -> np.ndarray:
        return self.unit().coords()

    @cached_property
    def unit_sa_coords(self) -> np.ndarray:
        return self.sa_basis.T @ self.unit_coords

    # ------------------------------------------------------------------
    # 元素构造
    # ------------------------------------------------------------------

    def element(self, blocks: Sequence[np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self, blocks)

    def unit(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(n, dtype=complex) for n in self.block_dims])

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((n, n), dtype=complex) for n in self.block_dims])

    def scalar(self, value: Scalar) -> "AlgebraElement":
        return self.unit() * value

    def diagonal(self, values: Iterable[Scalar]) -> "AlgebraElement":
        """交换代数上的函数 (f_1, …, f_K)"""
        vals = list(values)
        if not self.is_commutative or len(vals) != self.num_blocks:
            raise StructuralError(
                "diagonal 仅适用于交换形状且长度匹配",
                details={"shape": self.label, "len": len(vals)},
            )
        return AlgebraElement(self, [np.array([[v]], dtype=complex) for v in vals])

    def from_coords(self, coords: np.ndarray) -> "AlgebraElement":
        v = np.asarray(coords, dtype=float)
        if v.shape != (self.real_dim,):
            raise StructuralError(
                "坐标维数与代数不匹配",
                details={"expected": self.real_dim, "got": v.shape},
            )
        blocks = []
        for k, n in enumerate(self.block_dims):
            off = self.offsets[k]
            re = v[off : off + n * n].reshape(n, n)
            im = v[off + n * n : off + 2 * n * n].reshape(n, n)
            blocks.append(re + 1j * im)
        return AlgebraElement(self, blocks)

    def from_sa_coords(self, coords: np.ndarray) -> "AlgebraElement":
        s = np.asarray(coords, dtype=float)
        if s.shape != (self.sa_dim,):
            raise StructuralError(
                "自伴坐标维数与代数不匹配",
                details={"expected": self.sa_dim, "got": s.shape},
            )
        return self.from_coords(self.sa_basis @ s)

    def matrix_units(self) -> list[tuple[int, int, int, "AlgebraElement"]]:
        """全部矩阵单位 (k, i, j, E_ij^{(k)})"""
        units = []
        for k, n in enumerate(self.block_dims):
            for i in range(n):
                for j in range(n):
                    blocks = [np.zeros((m, m), dtype=complex) for m in self.block_dims]
                    blocks[k][i, j] = 1.0
                    units.append((k, i, j, AlgebraElement(self, blocks)))
        return units

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "AlgebraElement":
        blocks = [
            scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            for n in self.block_dims
        ]
        return AlgebraElement(self, blocks)

    def random_self_adjoint(
        self, rng: np.random.Generator, scale: float = 1.0
    ) -> "AlgebraElement":
        return re_im(self.random_element(rng, scale))[0]


class AlgebraElement:
    """代数元素：复矩阵块列表（构造后视为不可变）"""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks: Sequence[np.ndarray]):
        if len(blocks) != shape.num_blocks:
            raise StructuralError(
                "块数量与形状不匹配",
                details={"shape": shape.label, "blocks": len(blocks)},
            )
        arrs = []
        for n, b in zip(shape.block_dims, blocks):
            arr = np.array(b, dtype=complex)
            if arr.shape != (n, n):
                raise StructuralError(
                    "块尺寸与形状不匹配",
                    details={"expected": (n, n), "got": arr.shape},
                )
            arr.setflags(write=False)
            arrs.append(arr)
        self.shape = shape
        self.blocks: tuple[np.ndarray, ...] = tuple(arrs)

    # ------------------------------------------------------------------
    # 代数运算
    # ------------------------------------------------------------------

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement) or other.shape != self.shape:
            raise StructuralError(
                "元素所属代数不一致",
                details={
                    "left": self.shape.label,
                    "right": getattr(getattr(other, "shape", None), "label", type(other).__name__),
                },
            )

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [-a for a in self.blocks])

    def __mul__(self, scalar: Scalar) -> "AlgebraElement":
        if isinstance(scalar, AlgebraElement):
            return self @ scalar
        return AlgebraElement(self.shape, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar: Scalar) -> "AlgebraElement":
        return self * (1.0 / scalar)

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [a.conj().T for a in self.blocks])

    def is_self_adjoint(self, tol: float = SELF_ADJOINT_TOL) -> bool:
        return all(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol for a in self.blocks)

    def allclose(self, other: "AlgebraElement", tol: float = 1e-10) -> bool:
        self._check(other)
        return all(
            np.max(np.abs(a - b), initial=0.0) <= tol for a, b in zip(self.blocks, other.blocks)
        )

    # ------------------------------------------------------------------
    # 坐标与范数
    # ------------------------------------------------------------------

    def coords(self) -> np.ndarray:
        parts = []
        for b in self.blocks:
            parts.append(b.real.ravel())
            parts.append(b.imag.ravel())
        return np.concatenate(parts)

    def sa_coords(self) -> np.ndarray:
        """自伴坐标（非自伴元素取其实部 Re a 的坐标）"""
        return self.shape.sa_basis.T @ self.coords()

    def norm(self) -> float:
        return opnorm(self.shape, self)

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def __repr__(self) -> str:
        return f"AlgebraElement(shape={self.shape.label}, norm={self.norm():.6g})"


def opnorm(shape: AlgebraShape, a: AlgebraElement) -> float:
    """C*-范数：各块最大奇异值的最大值"""
    if a.shape != shape:
        raise StructuralError(
            "元素与代数形状不匹配",
            details={"algebra": shape.label, "element": a.shape.label},
        )
    return float(max(np.linalg.norm(b, 2) for b in a.blocks))


def re_im(a: AlgebraElement) -> tuple[AlgebraElement, AlgebraElement]:
    """返回 (Re a, Im a)，满足 a = Re a + i·Im a 且二者自伴"""
    adj = a.adjoint()
    re = AlgebraElement(a.shape, [(x + y) / 2 for x, y in zip(a.blocks, adj.blocks)])
    im = AlgebraElement(a.shape, [(x - y) / 2j for x, y in zip(a.blocks, adj.blocks)])
    return re, im


def jordan_lie(a: AlgebraElement, b: AlgebraElement) -> tuple[AlgebraElement, AlgebraElement]:
    """(Re(ab), Im(ab))，即 Jordan 积与 Lie 积"""
    return re_im(a @ b)


def direct_sum_elements(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """(a, b) ∈ 𝔄⊕𝔅"""
    return AlgebraElement(a.shape.concat(b.shape), list(a.blocks) + list(b.blocks))
