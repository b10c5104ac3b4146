"""
桥 γ = (𝔇, x, π_𝔄, π_𝔅)

π_𝔄: 𝔄 → 𝔇、π_𝔅: 𝔅 → 𝔇 为单位单射 *-态射，x ∈ 𝔇 且 ‖x‖ = 1，
𝒮₁(𝔇|x) 非空（以见证态表示）。桥半范数 bn(a, b) = ‖π_𝔄(a)x − xπ_𝔅(b)‖。

统计量：
- height：两侧 𝒮(𝔄_j) 到 𝒮₁(𝔇|x) 拉回的单侧 Hausdorff 间隙
- reach：sup_{L_𝔄(a)≤1} inf_{L_𝔅(b)≤1} bn(a, b)，两侧取大
- length = max(height, reach)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from loguru import logger
from scipy.linalg import block_diag

from proplab.algebra.morphisms import StarMorphism, identity_morphism, tensor_product
from proplab.algebra.shape import AlgebraElement, AlgebraShape
from proplab.algebra.states import State, in_level_set, level_space, level_state
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError, StructuralError, ValidationError
from proplab.kernels.engine import retraction_search
from proplab.kernels.estimate import BoundKind, Estimate, combine_max
from proplab.kernels.lp import LinearProgram
from proplab.qcms.gaps import commutative_gap, pure_state_samples, state_gap
from proplab.qcms.space import QCMS
from proplab.seminorms.atoms import AtomicSeminorm, atoms_from_map

PIVOT_NORM_TOL = 1e-10


@dataclass
class Bridge:
    """两个有限维 C*-代数之间的桥"""

    pivot: AlgebraShape
    x: AlgebraElement
    pi_a: StarMorphism
    pi_b: StarMorphism
    witness: Optional[State] = None
    name: str = "bridge"
    certified_length: Optional[float] = None
    notes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for label, pi in (("pi_a", self.pi_a), ("pi_b", self.pi_b)):
            if pi.target != self.pivot:
                raise StructuralError(
                    "桥的嵌入必须落在枢纽代数中",
                    details={"leg": label, "target": pi.target.label, "pivot": self.pivot.label},
                )
            if not pi.is_injective:
                raise ValidationError("桥的嵌入必须是单射", details={"leg": label, "rank": pi.rank})
            if not pi.is_unital:
                raise ValidationError("桥的嵌入必须是单位的", details={"leg": label})
        if self.x.shape != self.pivot:
            raise StructuralError("枢纽元素不属于枢纽代数", details={"pivot": self.pivot.label})
        if abs(self.x.norm() - 1.0) > PIVOT_NORM_TOL:
            raise ValidationError("枢纽元素的范数必须为 1", details={"norm": self.x.norm()})
        if self.witness is None:
            self.witness = level_state(self.x)
            if self.witness is None:
                raise PreconditionError("𝒮₁(𝔇|x) 为空", details={"bridge": self.name})
        elif not in_level_set(self.witness, self.x):
            raise ValidationError("见证态不满足 φ(dx)=φ(xd)=φ(d)", details={"bridge": self.name})

    @property
    def domain_shape(self) -> AlgebraShape:
        return self.pi_a.source

    @property
    def codomain_shape(self) -> AlgebraShape:
        return self.pi_b.source

    def transposed(self) -> "Bridge":
        """交换两侧：(𝔇, x*, π_𝔅, π_𝔄)"""
        return Bridge(
            self.pivot,
            self.x.adjoint(),
            self.pi_b,
            self.pi_a,
            name=f"{self.name}ᵀ",
            certified_length=self.certified_length,
        )

    # ------------------------------------------------------------------
    # 桥半范数
    # ------------------------------------------------------------------

    def bn(self, a: AlgebraElement, b: AlgebraElement) -> float:
        """‖π_𝔄(a)x − xπ_𝔅(b)‖"""
        if a.shape != self.domain_shape or b.shape != self.codomain_shape:
            raise StructuralError(
                "桥半范数的参数形状不匹配",
                details={"a": a.shape.label, "b": b.shape.label},
            )
        return (self.pi_a(a) @ self.x - self.x @ self.pi_b(b)).norm()

    def bn_seminorm(self) -> AtomicSeminorm:
        """𝔄⊕𝔅 完整实坐标上的 bn"""
        na = self.domain_shape.real_dim
        xs = self.x.blocks

        def atoms(v: np.ndarray) -> list[np.ndarray]:
            pa = self.pivot.from_coords(self.pi_a.matrix @ v[:na]).blocks
            pb = self.pivot.from_coords(self.pi_b.matrix @ v[na:]).blocks
            return [p @ x - x @ q for p, q, x in zip(pa, pb, xs)]

        return atoms_from_map(na + self.codomain_shape.real_dim, atoms, name=f"bn[{self.name}]")

    def level_rows(self) -> list[int]:
        """交换枢纽上 𝒮₁(𝔇|x) 的支撑点"""
        return [k for k, w in enumerate(level_space(self.x)) if w.shape[1] > 0]

    def __repr__(self) -> str:
        return f"Bridge(name={self.name}, pivot={self.pivot.label})"


@dataclass
class BridgeStats:
    """桥的 height、reach 与 length"""

    height: Estimate
    reach: Estimate
    length: Estimate

    def to_dict(self) -> dict[str, Any]:
        return {
            "height": self.height.to_dict(),
            "reach": self.reach.to_dict(),
            "length": self.length.to_dict(),
        }


def _check_ends(bridge: Bridge, left: QCMS, right: QCMS) -> None:
    if left.shape != bridge.domain_shape or right.shape != bridge.codomain_shape:
        raise StructuralError(
            "桥两端与给定空间不一致",
            details={
                "bridge": bridge.name,
                "left": left.shape.label,
                "right": right.shape.label,
            },
        )


# ------------------------------------------------------------------
# height
# ------------------------------------------------------------------


def _side_height(
    bridge: Bridge, space: QCMS, pi: StarMorphism, config: SolverConfig
) -> Estimate:
    if space.is_commutative and bridge.pivot.is_commutative:
        return commutative_gap(space.lip_sa, pi.sa_matrix, bridge.level_rows(), config)
    states, exhaustive = pure_state_samples(space.shape, config.samples, config.seed)
    return state_gap(
        space.lip_sa,
        space.shape,
        bridge.pivot,
        pi.matrix @ space.shape.sa_basis,
        states,
        config,
        level=level_space(bridge.x),
    )


def bridge_height(
    bridge: Bridge, left: QCMS, right: QCMS, config: Optional[SolverConfig] = None
) -> Estimate:
    config = config or SolverConfig()
    _check_ends(bridge, left, right)
    parts = [
        _side_height(bridge, left, bridge.pi_a, config),
        _side_height(bridge, right, bridge.pi_b, config),
    ]
    return combine_max(parts, quantity="height")


# ------------------------------------------------------------------
# reach
# ------------------------------------------------------------------


def _sa_bn(bridge: Bridge, left: QCMS, right: QCMS) -> AtomicSeminorm:
    basis = block_diag(left.shape.sa_basis, right.shape.sa_basis)
    return bridge.bn_seminorm().compose(basis, name=f"bn[{bridge.name}]|sa")


def _outer_candidates(space: QCMS, config: SolverConfig, offset: int) -> list[np.ndarray]:
    """L-球中的候选点：距离函数（交换情形）与随机方向，缩放到 L = 1"""
    cands: list[np.ndarray] = []
    if space.metric is not None:
        cands.extend(space.metric[:, z].copy() for z in range(space.metric.shape[0]))
    rng = config.rng(offset)
    for _ in range(config.samples):
        cands.append(space.shape.random_self_adjoint(rng).sa_coords())
    out = []
    for v in cands:
        s = space.lip_sa(v)
        if s > 1e-12:
            out.append(v / s)
            out.append(-v / s)
    return out


def _inner_lp(
    bn_sa: AtomicSeminorm, lip_b: AtomicSeminorm, a: np.ndarray, config: SolverConfig
) -> Estimate:
    lp = LinearProgram("reach-inner")
    av = lp.variables(a.size)
    bv = lp.variables(lip_b.dim)
    t = lp.variables(1, lower=0.0)
    lp.add_eq([(av, np.eye(a.size))], a)
    lp.bound_seminorm(bn_sa, slice(av.start, bv.stop), t)
    lp.bound_seminorm(lip_b, bv, bound=1.0)
    lp.set_objective([(t, np.ones(1))])
    res = lp.solve(config.lp_method)
    if not res.ok:
        return Estimate(float("nan"), BoundKind.APPROX, exhausted=True)
    return Estimate.exact(res.value, certificate=res.x[bv])


def _inner_descent(
    bn_sa: AtomicSeminorm, lip_b: AtomicSeminorm, a: np.ndarray, config: SolverConfig
) -> Estimate:
    na = a.size

    def objective(b: np.ndarray) -> float:
        return bn_sa(np.concatenate([a, b]))

    def gradient(b: np.ndarray) -> np.ndarray:
        return bn_sa.subgradient_total(np.concatenate([a, b]))[na:]

    starts = [np.zeros(lip_b.dim)]
    return retraction_search(objective, gradient, lip_b, starts, config, maximize=False)


def _side_reach(
    bn_sa: AtomicSeminorm,
    outer: QCMS,
    inner: QCMS,
    swap: bool,
    exact_inner: bool,
    config: SolverConfig,
) -> Estimate:
    if swap:
        n_out = outer.shape.sa_dim
        perm = np.zeros((n_out + inner.shape.sa_dim,) * 2)
        # 交换坐标块，使外层变量在前
        perm[: inner.shape.sa_dim, n_out:] = np.eye(inner.shape.sa_dim)
        perm[inner.shape.sa_dim :, :n_out] = np.eye(n_out)
        seminorm = bn_sa.compose(perm)
    else:
        seminorm = bn_sa
    solve = _inner_lp if exact_inner else _inner_descent
    best: Optional[Estimate] = None
    for a in _outer_candidates(outer, config, offset=31 if swap else 29):
        est = solve(seminorm, inner.lip_sa, a, config)
        if best is None or est.value > best.value:
            best = est
    if best is None:
        return Estimate.exact(0.0)
    kind = BoundKind.LOWER if exact_inner else BoundKind.APPROX
    return Estimate(best.value, kind, tol=best.tol, certificate=best.certificate)


def bridge_reach(
    bridge: Bridge, left: QCMS, right: QCMS, config: Optional[SolverConfig] = None
) -> Estimate:
    config = config or SolverConfig()
    _check_ends(bridge, left, right)
    bn_sa = _sa_bn(bridge, left, right)
    exact_inner = bn_sa.is_polyhedral and left.lip_sa.is_polyhedral and right.lip_sa.is_polyhedral
    parts = [
        _side_reach(bn_sa, left, right, False, exact_inner, config),
        _side_reach(bn_sa, right, left, True, exact_inner, config),
    ]
    return combine_max(parts, quantity="reach")


def bridge_stats(
    bridge: Bridge, left: QCMS, right: QCMS, config: Optional[SolverConfig] = None
) -> BridgeStats:
    config = config or SolverConfig()
    height = bridge_height(bridge, left, right, config)
    reach = bridge_reach(bridge, left, right, config)
    length = combine_max([height, reach], quantity="length")
    logger.info(
        f"桥统计 name={bridge.name} height={height.value:.6g} reach={reach.value:.6g} "
        f"length={length.value:.6g} kind={length.kind.value}"
    )
    return BridgeStats(height, reach, length)


# ------------------------------------------------------------------
# 构造器
# ------------------------------------------------------------------


def identity_bridge(space: QCMS) -> Bridge:
    ident = identity_morphism(space.shape)
    return Bridge(
        space.shape,
        space.shape.unit(),
        ident,
        ident,
        name=f"id[{space.name}]",
        certified_length=0.0,
    )


def distortion(left: QCMS, right: QCMS, relation: Sequence[tuple[int, int]]) -> float:
    """dis(R) = max |d_X(i,i′) − d_Y(j,j′)|"""
    if left.metric is None or right.metric is None:
        raise PreconditionError("畸变只对有限度量空间定义")
    pairs = np.asarray(relation, dtype=int)
    dx = left.metric[np.ix_(pairs[:, 0], pairs[:, 0])]
    dy = right.metric[np.ix_(pairs[:, 1], pairs[:, 1])]
    return float(np.abs(dx - dy).max())


def correspondence_bridge(
    left: QCMS, right: QCMS, relation: Sequence[tuple[int, int]], name: str = ""
) -> Bridge:
    """
    枢纽 C(X×Y)，x 为关系 R 的示性函数

    R 是对应（两侧投影都满）时 height = 0 且 reach ≤ dis(R)/2。
    """
    if not (left.is_commutative and right.is_commutative):
        raise PreconditionError("对应桥只适用于交换空间")
    rel = [(int(i), int(j)) for i, j in relation]
    if not rel:
        raise PreconditionError("关系不能为空")
    tp = tensor_product(left.shape, right.shape)
    values = np.zeros(tp.shape.num_blocks)
    for i, j in rel:
        if not (0 <= i < left.shape.num_blocks and 0 <= j < right.shape.num_blocks):
            raise StructuralError("关系中的点越界", details={"pair": (i, j)})
        values[tp.block_index(i, j)] = 1.0
    covers = {i for i, _ in rel} == set(range(left.shape.num_blocks)) and {
        j for _, j in rel
    } == set(range(right.shape.num_blocks))
    certified = distortion(left, right, rel) / 2.0 if covers else None
    return Bridge(
        tp.shape,
        tp.shape.diagonal(values),
        tp.leg_left,
        tp.leg_right,
        name=name or f"corr[{left.name},{right.name}]",
        certified_length=certified,
        notes={"relation": rel, "correspondence": covers},
    )


def tensor_bridge(
    left: QCMS, right: QCMS, config: Optional[SolverConfig] = None, name: str = ""
) -> Bridge:
    """枢纽 𝔄⊗𝔅、x = 1：height 为 0，reach ≤ max(diam)/2"""
    tp = tensor_product(left.shape, right.shape)
    dl, dr = left.diameter(config), right.diameter(config)
    certified = max(dl.value, dr.value) / 2.0
    return Bridge(
        tp.shape,
        tp.shape.unit(),
        tp.leg_left,
        tp.leg_right,
        name=name or f"tensor[{left.name},{right.name}]",
        certified_length=certified,
        notes={"diameter_kind": [dl.kind.value, dr.kind.value]},
    )
