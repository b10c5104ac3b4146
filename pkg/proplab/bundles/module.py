"""
有限维代数上的 Hilbert 模

模由若干"槽"组成：每个槽是某个块代数上的自由模 𝔄ᵢ^{pᵢ}，整体是底代数
⊕𝔄ᵢ 上的模。Free(𝔄, p) 是单槽；DirectSum(ℳ, 𝒩) 把两侧的槽拼接起来，
底代数随之变为 𝔄⊕𝔅。模元素统一用实坐标向量表示：按槽、按分量依次
拼接各分量的代数坐标。

内积 ⟨ω, η⟩ = ⊕ᵢ Σ_j ω_{ij} η_{ij}*，对第一个变量左线性。
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger

from proplab.algebra.morphisms import StarMorphism, direct_sum, identity_morphism
from proplab.algebra.shape import AlgebraElement, AlgebraShape
from proplab.exceptions import NonSurjectiveError, StructuralError, ValidationError
from proplab.seminorms.atoms import AtomicSeminorm, atoms_from_map

MODULE_TOL = 1e-9

Components = list[list[AlgebraElement]]


@dataclass(frozen=True)
class ModuleSlot:
    """自由模 shape^rank"""

    shape: AlgebraShape
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise StructuralError("自由模的秩必须为正", details={"rank": self.rank})

    @property
    def dim(self) -> int:
        return self.rank * self.shape.real_dim

    @property
    def label(self) -> str:
        return f"Free({self.shape.label},{self.rank})"


class HilbertModule:
    """自由模槽的直和"""

    def __init__(self, slots: Sequence[ModuleSlot], name: str = ""):
        if not slots:
            raise StructuralError("Hilbert 模至少需要一个槽")
        self.slots: tuple[ModuleSlot, ...] = tuple(slots)
        base = self.slots[0].shape
        for slot in self.slots[1:]:
            base = base.concat(slot.shape)
        self.base = base
        self.name = name or self.label

    # ------------------------------------------------------------------
    # 结构
    # ------------------------------------------------------------------

    @property
    def label(self) -> str:
        return "⊕".join(s.label for s in self.slots)

    @property
    def dim(self) -> int:
        return sum(s.dim for s in self.slots)

    @property
    def uniform_rank(self) -> Optional[int]:
        """所有槽秩相同时返回该秩"""
        ranks = {s.rank for s in self.slots}
        return ranks.pop() if len(ranks) == 1 else None

    @cached_property
    def _block_ranges(self) -> list[tuple[int, int]]:
        ranges, start = [], 0
        for s in self.slots:
            ranges.append((start, start + s.shape.num_blocks))
            start += s.shape.num_blocks
        return ranges

    @cached_property
    def _coord_offsets(self) -> list[int]:
        offsets, pos = [], 0
        for s in self.slots:
            offsets.append(pos)
            pos += s.dim
        return offsets

    def same_as(self, other: "HilbertModule") -> bool:
        return self is other or self.slots == other.slots

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape != (self.dim,):
            raise StructuralError(
                "模元素坐标维数不一致",
                details={"module": self.name, "expected": self.dim, "got": v.shape},
            )
        return v

    # ------------------------------------------------------------------
    # 坐标与分量
    # ------------------------------------------------------------------

    def components(self, v: np.ndarray) -> Components:
        """坐标向量 → 每个槽的分量列表"""
        v = self._check(v)
        out = []
        for slot, off in zip(self.slots, self._coord_offsets):
            n = slot.shape.real_dim
            out.append(
                [
                    slot.shape.from_coords(v[off + j * n : off + (j + 1) * n])
                    for j in range(slot.rank)
                ]
            )
        return out

    def from_components(self, parts: Sequence[Sequence[AlgebraElement]]) -> np.ndarray:
        if len(parts) != len(self.slots):
            raise StructuralError(
                "分量的槽数与模不一致",
                details={"module": self.name, "expected": len(self.slots), "got": len(parts)},
            )
        coords = []
        for slot, comps in zip(self.slots, parts):
            if len(comps) != slot.rank:
                raise StructuralError(
                    "分量个数与槽的秩不一致",
                    details={"slot": slot.label, "expected": slot.rank, "got": len(comps)},
                )
            for c in comps:
                if c.shape != slot.shape:
                    raise StructuralError(
                        "分量不属于槽的代数",
                        details={"slot": slot.label, "component": c.shape.label},
                    )
                coords.append(c.coords())
        return np.concatenate(coords)

    def split_base(self, a: AlgebraElement) -> list[AlgebraElement]:
        """底代数元素按槽拆分"""
        if a.shape != self.base:
            raise StructuralError(
                "元素不属于模的底代数",
                details={"base": self.base.label, "got": a.shape.label},
            )
        return [
            slot.shape.element(a.blocks[lo:hi])
            for slot, (lo, hi) in zip(self.slots, self._block_ranges)
        ]

    def join_base(self, parts: Sequence[AlgebraElement]) -> AlgebraElement:
        blocks: list[np.ndarray] = []
        for p in parts:
            blocks.extend(p.blocks)
        return self.base.element(blocks)

    # ------------------------------------------------------------------
    # 模运算
    # ------------------------------------------------------------------

    def inner(self, omega: np.ndarray, eta: np.ndarray) -> AlgebraElement:
        """⟨ω, η⟩ ∈ 底代数"""
        parts = []
        for slot, om, et in zip(self.slots, self.components(omega), self.components(eta)):
            acc = slot.shape.zero()
            for a, b in zip(om, et):
                acc = acc + a @ b.adjoint()
            parts.append(acc)
        return self.join_base(parts)

    def norm(self, omega: np.ndarray) -> float:
        """‖ω‖ = √‖⟨ω, ω⟩‖"""
        return float(np.sqrt(max(self.inner(omega, omega).norm(), 0.0)))

    def act(self, a: AlgebraElement, omega: np.ndarray) -> np.ndarray:
        """左作用 a·ω"""
        pieces = self.split_base(a)
        comps = self.components(omega)
        return self.from_components([[p @ c for c in cs] for p, cs in zip(pieces, comps)])

    def _tabulate(self, fn: Callable[[np.ndarray], np.ndarray], rows: int) -> np.ndarray:
        eye = np.eye(self.dim)
        out = np.zeros((rows, self.dim))
        for i in range(self.dim):
            out[:, i] = fn(eye[i])
        return out

    def inner_matrix(self, eta: np.ndarray, side: str = "left") -> np.ndarray:
        """
        固定一个变量后内积的实线性矩阵

        side="left" 给出 ω ↦ coords⟨ω, η⟩，side="right" 给出 ζ ↦ coords⟨η, ζ⟩。
        """
        eta = self._check(eta)
        if side == "left":
            return self._tabulate(lambda w: self.inner(w, eta).coords(), self.base.real_dim)
        if side == "right":
            return self._tabulate(lambda z: self.inner(eta, z).coords(), self.base.real_dim)
        raise StructuralError("未知的内积方向", details={"side": side})

    @cached_property
    def norm_seminorm(self) -> AtomicSeminorm:
        """
        模范数的原子形式

        每个槽、每个块 k 上 ⟨ω,ω⟩ 的范数是行矩阵 [ω₁⁽ᵏ⁾ … ω_p⁽ᵏ⁾] 的算子范数的平方，
        所以 ‖ω‖ 是这些行矩阵的算子范数的最大值。
        """

        def rows(v: np.ndarray) -> list[np.ndarray]:
            mats = []
            for comps in self.components(v):
                for k in range(len(comps[0].blocks)):
                    mats.append(np.hstack([c.blocks[k] for c in comps]))
            return mats

        return atoms_from_map(self.dim, rows, name=f"‖·‖[{self.name}]")

    # ------------------------------------------------------------------
    # 特殊元素
    # ------------------------------------------------------------------

    def zero_element(self) -> np.ndarray:
        return np.zeros(self.dim)

    def unit_element(self) -> np.ndarray:
        """每个槽的第一个分量为单位，其余为零"""
        return self.from_components(
            [
                [slot.shape.unit()] + [slot.shape.zero() for _ in range(slot.rank - 1)]
                for slot in self.slots
            ]
        )

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return self.from_components(
            [
                [slot.shape.random_element(rng, scale) for _ in range(slot.rank)]
                for slot in self.slots
            ]
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "slots": [{"shape": s.shape.label, "rank": s.rank} for s in self.slots],
            "base": self.base.label,
            "dim": self.dim,
        }

    def __repr__(self) -> str:
        return f"HilbertModule(name={self.name}, label={self.label})"


def free_module(shape: AlgebraShape, rank: int = 1, name: str = "") -> HilbertModule:
    return HilbertModule([ModuleSlot(shape, rank)], name=name)


def direct_sum_module(left: HilbertModule, right: HilbertModule, name: str = "") -> HilbertModule:
    """ℳ⊕𝒩，底代数为 𝔄⊕𝔅"""
    return HilbertModule(
        left.slots + right.slots, name=name or f"{left.name}⊕{right.name}"
    )


# ------------------------------------------------------------------
# 模态射
# ------------------------------------------------------------------


class ModularMorphism:
    """
    (θ, Θ)：θ 为底代数的 *-态射，Θ 为模坐标上的实线性映射，
    满足 Θ(aω) = θ(a)Θ(ω)；inner_preserving 时还要求 θ(⟨ω,η⟩) = ⟨Θω, Θη⟩
    """

    def __init__(
        self,
        source: HilbertModule,
        target: HilbertModule,
        theta: StarMorphism,
        matrix: np.ndarray,
        inner_preserving: bool = True,
        name: str = "",
        validate: bool = True,
    ):
        m = np.asarray(matrix, dtype=float)
        if theta.source != source.base or theta.target != target.base:
            raise StructuralError(
                "θ 与模的底代数不匹配",
                details={
                    "theta": theta.name,
                    "source": source.base.label,
                    "target": target.base.label,
                },
            )
        if m.shape != (target.dim, source.dim):
            raise StructuralError(
                "Θ 的矩阵形状不正确",
                details={"expected": (target.dim, source.dim), "got": m.shape},
            )
        self.source = source
        self.target = target
        self.theta = theta
        self.matrix = m
        self.inner_preserving = inner_preserving
        self.name = name or f"({theta.name},Θ)"
        if validate:
            worst = verify_modular(self)
            if worst > MODULE_TOL:
                raise ValidationError(
                    "模态射律不成立",
                    details={"morphism": self.name, "worst": worst},
                )

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return self.matrix @ self.source._check(omega)

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix, tol=1e-9))

    @property
    def is_surjective(self) -> bool:
        return self.rank == self.target.dim

    def require_surjective(self) -> None:
        if not self.is_surjective:
            raise NonSurjectiveError(self.rank, self.target.dim)

    def compose(self, inner: "ModularMorphism") -> "ModularMorphism":
        """self ∘ inner"""
        if not inner.target.same_as(self.source):
            raise StructuralError(
                "模态射无法复合",
                details={"inner": inner.name, "outer": self.name},
            )
        return ModularMorphism(
            inner.source,
            self.target,
            self.theta.compose(inner.theta),
            self.matrix @ inner.matrix,
            self.inner_preserving and inner.inner_preserving,
            name=f"{self.name}∘{inner.name}",
            validate=False,
        )

    def __repr__(self) -> str:
        return f"ModularMorphism(name={self.name}, {self.source.label} → {self.target.label})"


def verify_modular(morphism: ModularMorphism) -> float:
    """
    在基上检查模态射律，返回最大偏差

    a 取遍底代数的矩阵单位 e 与 i·e，ω 取遍模坐标的标准基；
    内积保持性在标准基对上检查（内积对实坐标是实双线性的）。
    """
    src, dst = morphism.source, morphism.target
    eye = np.eye(src.dim)
    worst = 0.0
    units = [u for *_, u in src.base.matrix_units()]
    for e in units + [u * 1j for u in units]:
        image = morphism.theta(e)
        for i in range(src.dim):
            lhs = morphism(src.act(e, eye[i]))
            rhs = dst.act(image, morphism(eye[i]))
            worst = max(worst, float(np.max(np.abs(lhs - rhs), initial=0.0)))
    if morphism.inner_preserving:
        mapped = [morphism(eye[i]) for i in range(src.dim)]
        for i in range(src.dim):
            for j in range(src.dim):
                lhs = morphism.theta(src.inner(eye[i], eye[j]))
                rhs = dst.inner(mapped[i], mapped[j])
                diff = max(
                    np.max(np.abs(a - b), initial=0.0) for a, b in zip(lhs.blocks, rhs.blocks)
                )
                worst = max(worst, float(diff))
    logger.debug(f"模态射校验 morphism={morphism.name} worst={worst:.3e}")
    return worst


def identity_modular(module: HilbertModule) -> ModularMorphism:
    return ModularMorphism(
        module,
        module,
        identity_morphism(module.base),
        np.eye(module.dim),
        name=f"id[{module.name}]",
        validate=False,
    )


def lift(
    theta: StarMorphism, source: HilbertModule, target: HilbertModule, name: str = ""
) -> ModularMorphism:
    """
    把 θ 逐分量提升为 Θ(ω)_j = θ(ω_j)

    要求 source 为单槽自由模，target 各槽的秩都等于 source 的秩；
    θ(ω_j) 按 target 的槽拆分后填入第 j 个分量。
    """
    if len(source.slots) != 1 or target.uniform_rank != source.slots[0].rank:
        raise StructuralError(
            "只能提升到同秩的自由模",
            details={"source": source.label, "target": target.label},
        )
    rank = source.slots[0].rank

    def image(v: np.ndarray) -> np.ndarray:
        comps = source.components(v)[0]
        pieces = [target.split_base(theta(c)) for c in comps]
        return target.from_components(
            [[pieces[j][i] for j in range(rank)] for i in range(len(target.slots))]
        )

    matrix = np.column_stack([image(e) for e in np.eye(source.dim)])
    return ModularMorphism(source, target, theta, matrix, name=name or f"lift[{theta.name}]")


@dataclass
class ModuleDirectSum:
    """ℳ⊕𝒩 以及两个典范投影"""

    module: HilbertModule
    left: HilbertModule
    right: HilbertModule
    proj_left: ModularMorphism
    proj_right: ModularMorphism


def direct_sum_projections(
    left: HilbertModule, right: HilbertModule, name: str = ""
) -> ModuleDirectSum:
    """𝒫 = ℳ⊕𝒩 及其到两侧的投影 (p_𝔄, P_ℳ)、(p_𝔅, P_𝒩)"""
    total = direct_sum_module(left, right, name=name)
    alg = direct_sum(left.base, right.base)
    p_left = np.hstack([np.eye(left.dim), np.zeros((left.dim, right.dim))])
    p_right = np.hstack([np.zeros((right.dim, left.dim)), np.eye(right.dim)])
    return ModuleDirectSum(
        total,
        left,
        right,
        ModularMorphism(total, left, alg.proj_left, p_left, name=f"P[{left.name}]"),
        ModularMorphism(total, right, alg.proj_right, p_right, name=f"P[{right.name}]"),
    )
