"""
*-态射

有限维代数之间的 *-态射一律表示为实坐标上的实矩阵。
块式构造器描述目标块 j 上的像：

    π(a)_j = U_j · diag( I_l ⊗ a_k ⊗ I_r , …, 0 ) · U_j*

覆盖恒等、直和投影/嵌入、张量积的腿以及它们的复合。
代数性质在矩阵单位上数值验证。
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraElement, AlgebraShape
from proplab.algebra.states import State
from proplab.exceptions import StructuralError, ValidationError

MORPHISM_TOL = 1e-10

# (源块索引, 左重数 l, 右重数 r)
Summand = tuple[int, int, int]


@dataclass(frozen=True)
class MorphismReport:
    """态射性质的验证结果"""

    unital: bool
    star: bool
    multiplicative: bool
    injective: bool
    surjective: bool
    worst_residual: float

    @property
    def is_star_morphism(self) -> bool:
        return self.star and self.multiplicative


class StarMorphism:
    """实坐标上的 *-态射"""

    def __init__(
        self,
        source: AlgebraShape,
        target: AlgebraShape,
        matrix: np.ndarray,
        name: str = "",
    ):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (target.real_dim, source.real_dim):
            raise StructuralError(
                "态射矩阵尺寸与源/目标不匹配",
                details={"expected": (target.real_dim, source.real_dim), "got": m.shape},
            )
        m.setflags(write=False)
        self.source = source
        self.target = target
        self.matrix = m
        self.name = name or f"{source.label}→{target.label}"

    # ------------------------------------------------------------------
    # 作用
    # ------------------------------------------------------------------

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        return self.apply(a)

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.shape != self.source:
            raise StructuralError(
                "元素不属于态射的源代数",
                details={"source": self.source.label, "element": a.shape.label},
            )
        return self.target.from_coords(self.matrix @ a.coords())

    @cached_property
    def sa_matrix(self) -> np.ndarray:
        """自伴坐标上的矩阵 B_tᵀ M B_s"""
        return self.target.sa_basis.T @ self.matrix @ self.source.sa_basis

    def compose(self, inner: "StarMorphism") -> "StarMorphism":
        """self ∘ inner"""
        if inner.target != self.source:
            raise StructuralError(
                "态射无法复合",
                details={"inner_target": inner.target.label, "outer_source": self.source.label},
            )
        return StarMorphism(
            inner.source, self.target, self.matrix @ inner.matrix, f"{self.name}∘{inner.name}"
        )

    def pullback(self, phi: State) -> State:
        """φ∘π（要求 π 为单位态射）"""
        if phi.shape != self.target:
            raise StructuralError(
                "态不属于态射的目标代数",
                details={"target": self.target.label, "state": phi.shape.label},
            )
        return State.from_functional(self.source, self.matrix.T @ phi.functional())

    def pullback_functional(self, vector: np.ndarray) -> np.ndarray:
        """自伴坐标上的泛函拉回"""
        return self.sa_matrix.T @ vector

    # ------------------------------------------------------------------
    # 结构性质
    # ------------------------------------------------------------------

    @cached_property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix, tol=1e-9))

    @property
    def is_surjective(self) -> bool:
        return self.rank == self.target.real_dim

    @property
    def is_injective(self) -> bool:
        return self.rank == self.source.real_dim

    @cached_property
    def report(self) -> MorphismReport:
        return verify_morphism(self)

    @property
    def is_unital(self) -> bool:
        return self.report.unital

    def __repr__(self) -> str:
        return f"StarMorphism({self.name})"


def verify_morphism(pi: StarMorphism, tol: float = MORPHISM_TOL) -> MorphismReport:
    """在矩阵单位上验证 π(1)=1、π(a*)=π(a)*、π(ab)=π(a)π(b)"""
    unit_res = (pi(pi.source.unit()) - pi.target.unit()).norm()
    worst = 0.0
    units = pi.source.matrix_units()
    images = {(k, i, j): pi(e) for k, i, j, e in units}
    star_ok = True
    for k, i, j, e in units:
        res = (images[(k, j, i)] - images[(k, i, j)].adjoint()).norm()
        worst = max(worst, res)
        star_ok = star_ok and res <= tol
    mult_ok = True
    zero = pi.target.zero()
    for k, i, j, _ in units:
        left = images[(k, i, j)]
        for k2, i2, j2, _ in units:
            prod = left @ images[(k2, i2, j2)]
            if k == k2 and j == i2:
                expected = images[(k, i, j2)]
            else:
                expected = zero
            res = (prod - expected).norm()
            worst = max(worst, res)
            mult_ok = mult_ok and res <= tol
    report = MorphismReport(
        unital=unit_res <= tol,
        star=star_ok,
        multiplicative=mult_ok,
        injective=pi.is_injective,
        surjective=pi.is_surjective,
        worst_residual=float(max(worst, unit_res)),
    )
    logger.debug(f"态射验证 {pi.name} unital={report.unital} star={star_ok} mult={mult_ok}")
    return report


def from_blocks(
    source: AlgebraShape,
    target: AlgebraShape,
    summands: Sequence[Sequence[Summand]],
    unitaries: Optional[Sequence[Optional[np.ndarray]]] = None,
    name: str = "",
    validate: bool = True,
) -> StarMorphism:
    """
    由块式描述构造 *-态射

    Args:
        source: 源代数形状
        target: 目标代数形状
        summands: 每个目标块的 (源块, l, r) 列表
        unitaries: 每个目标块的酉共轭（None 表示单位阵）
        name: 名称
        validate: 是否验证为 *-态射
    """
    if len(summands) != target.num_blocks:
        raise StructuralError(
            "块式描述数量与目标块数不一致",
            details={"target_blocks": target.num_blocks, "given": len(summands)},
        )
    for j, parts in enumerate(summands):
        size = sum(l * source.block_dims[k] * r for k, l, r in parts)
        if size > target.block_dims[j]:
            raise StructuralError(
                "块式描述超出目标块尺寸",
                details={"block": j, "size": size, "target": target.block_dims[j]},
            )

    def image(a: AlgebraElement) -> list[np.ndarray]:
        out = []
        for j, parts in enumerate(summands):
            n = target.block_dims[j]
            block = np.zeros((n, n), dtype=complex)
            pos = 0
            for k, l, r in parts:
                piece = np.kron(np.eye(l), np.kron(a.blocks[k], np.eye(r)))
                m = piece.shape[0]
                block[pos : pos + m, pos : pos + m] = piece
                pos += m
            if unitaries is not None and unitaries[j] is not None:
                u = np.asarray(unitaries[j], dtype=complex)
                block = u @ block @ u.conj().T
            out.append(block)
        return out

    cols = np.empty((target.real_dim, source.real_dim))
    eye = np.eye(source.real_dim)
    for i in range(source.real_dim):
        cols[:, i] = target.element(image(source.from_coords(eye[i]))).coords()
    pi = StarMorphism(source, target, cols, name)
    if validate and not pi.report.is_star_morphism:
        raise ValidationError(
            "块式描述不是 *-态射", details={"name": pi.name, "residual": pi.report.worst_residual}
        )
    return pi


def identity_morphism(shape: AlgebraShape) -> StarMorphism:
    return StarMorphism(shape, shape, np.eye(shape.real_dim), f"id[{shape.label}]")


def coordinate_projection(
    source: AlgebraShape, target: AlgebraShape, block_indices: Sequence[int], name: str = ""
) -> StarMorphism:
    """按块选取的满射：目标第 j 块取源第 block_indices[j] 块"""
    return from_blocks(
        source, target, [[(k, 1, 1)] for k in block_indices], name=name, validate=False
    )


@dataclass(frozen=True)
class DirectSum:
    """𝔄⊕𝔅 及其典范投影与嵌入"""

    shape: AlgebraShape
    left: AlgebraShape
    right: AlgebraShape
    proj_left: StarMorphism
    proj_right: StarMorphism
    inj_left: StarMorphism
    inj_right: StarMorphism


def direct_sum(a: AlgebraShape, b: AlgebraShape) -> DirectSum:
    """
    直和 𝔄⊕𝔅

    投影是单位满射；嵌入是非单位的单射（另一分量补零）。
    """
    shape = a.concat(b)
    ka = a.num_blocks
    proj_left = coordinate_projection(shape, a, range(ka), name=f"ρ₁[{shape.label}]")
    proj_right = coordinate_projection(
        shape, b, range(ka, shape.num_blocks), name=f"ρ₂[{shape.label}]"
    )
    inj_left = from_blocks(
        a,
        shape,
        [[(k, 1, 1)] for k in range(ka)] + [[] for _ in range(b.num_blocks)],
        name=f"ι₁[{shape.label}]",
        validate=False,
    )
    inj_right = from_blocks(
        b,
        shape,
        [[] for _ in range(ka)] + [[(k, 1, 1)] for k in range(b.num_blocks)],
        name=f"ι₂[{shape.label}]",
        validate=False,
    )
    return DirectSum(shape, a, b, proj_left, proj_right, inj_left, inj_right)


@dataclass(frozen=True)
class TensorProduct:
    """𝔄⊗𝔅 及其两条单位单射腿 a ↦ a⊗1、b ↦ 1⊗b"""

    shape: AlgebraShape
    left: AlgebraShape
    right: AlgebraShape
    leg_left: StarMorphism
    leg_right: StarMorphism

    def block_index(self, i: int, j: int) -> int:
        return i * self.right.num_blocks + j


def tensor_product(a: AlgebraShape, b: AlgebraShape) -> TensorProduct:
    dims = tuple(n * m for n in a.block_dims for m in b.block_dims)
    shape = AlgebraShape(dims)
    left_parts: list[list[Summand]] = []
    right_parts: list[list[Summand]] = []
    for i, n in enumerate(a.block_dims):
        for j, m in enumerate(b.block_dims):
            left_parts.append([(i, 1, m)])
            right_parts.append([(j, n, 1)])
    leg_left = from_blocks(a, shape, left_parts, name=f"·⊗1[{shape.label}]", validate=False)
    leg_right = from_blocks(b, shape, right_parts, name=f"1⊗·[{shape.label}]", validate=False)
    return TensorProduct(shape, a, b, leg_left, leg_right)
