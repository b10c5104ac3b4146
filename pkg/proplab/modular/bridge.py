"""
模桥 γ = (𝔇, x, π_𝔄, π_𝔅, (ω_j), (η_j))

底桥 γ_♭ 加上一族锚点 ω_j ∈ ℳ 与余锚点 η_j ∈ 𝒩（D ≤ 1，下标集相同）。

- deck 范数 dn(ω, η) = max_j {bn(⟨ω,ω_j⟩, ⟨η,η_j⟩), bn(⟨ω_j,ω⟩, ⟨η_j,η⟩)}
- imprint：两侧 D-球到锚点集合（凸化后为其 ℓ¹ 凸包）的 Hausdorff 间隙
- 模 reach = max_j dn(ω_j, η_j)，模 length = max{length(γ_♭), imprint + reach}
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Optional, Sequence

import numpy as np
from loguru import logger
from scipy.linalg import block_diag

from proplab.bundles.bundle import MQVB, scale_to_unit_ball
from proplab.bundles.kantorovich import circular_radius, kantorovich_seminorm
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError, StructuralError, ValidationError
from proplab.kernels.engine import minimize_on_l1_ball
from proplab.kernels.estimate import BoundKind, Estimate, combine_max, combine_sum
from proplab.kernels.hausdorff import hausdorff_gap
from proplab.qcms.bridge import Bridge, bridge_stats, identity_bridge
from proplab.seminorms.atoms import AtomicSeminorm, combine_max as max_seminorm
from proplab.seminorms.checks import CheckReport

ANCHOR_TOL = 1e-9
CIRCLE_SAMPLES = 64


@dataclass(frozen=True)
class ConvexAnchorFamily:
    """
    锚点对的 ℓ¹ 凸包：α ∈ I(J) = {‖α‖₁ ≤ 1} 给出 (Σ α_j ω_j, Σ α_j η_j)

    列向量分别是锚点与余锚点。
    """

    anchors: np.ndarray
    coanchors: np.ndarray

    @property
    def size(self) -> int:
        return self.anchors.shape[1]

    @property
    def generators(self) -> np.ndarray:
        """(ω_j, η_j) 在 ℳ⊕𝒩 坐标上的列"""
        return np.vstack([self.anchors, self.coanchors])

    def combination(self, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a = np.asarray(alpha, dtype=float).reshape(-1)
        if a.shape != (self.size,):
            raise StructuralError("系数个数与锚点个数不一致", details={"size": self.size})
        if np.abs(a).sum() > 1.0 + ANCHOR_TOL:
            raise PreconditionError("系数不在 ℓ¹ 单位球内", details={"l1": float(np.abs(a).sum())})
        return self.anchors @ a, self.coanchors @ a

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """ℓ¹ 球中的随机系数：单纯形上的 Dirichlet 方向、随机符号与半径"""
        weights = rng.dirichlet(np.ones(self.size))
        signs = rng.choice([-1.0, 1.0], size=self.size)
        return float(rng.uniform()) * weights * signs

    def check(
        self, source: MQVB, target: MQVB, sample_count: int = 32, seed: int = 0
    ) -> CheckReport:
        """抽样确认 D(ω_α) ≤ 1、D(η_α) ≤ 1"""
        rng = np.random.default_rng(seed)
        worst, witnesses = float("inf"), []
        for _ in range(sample_count):
            alpha = self.sample(rng)
            omega, eta = self.combination(alpha)
            margin = 1.0 + ANCHOR_TOL - max(source.d_norm(omega), target.d_norm(eta))
            if margin < worst:
                worst = margin
            if margin < 0:
                witnesses.append({"alpha": alpha.tolist()})
        return CheckReport("anchor_hull", worst >= 0, worst, sample_count, witnesses[:5])


@dataclass
class ModularBridge:
    """source 与 target 之间的模桥；convex 为真时 imprint 使用锚点的凸包"""

    base: Bridge
    source: MQVB
    target: MQVB
    anchors: Sequence[np.ndarray]
    coanchors: Sequence[np.ndarray]
    name: str = ""
    convex: bool = False
    notes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.source.base.shape != self.base.domain_shape:
            raise StructuralError(
                "底桥的起点与 source 的底空间不一致",
                details={"bridge": self.base.name, "source": self.source.name},
            )
        if self.target.base.shape != self.base.codomain_shape:
            raise StructuralError(
                "底桥的终点与 target 的底空间不一致",
                details={"bridge": self.base.name, "target": self.target.name},
            )
        if not len(self.anchors):
            raise PreconditionError("模桥至少需要一个锚点", details={"bridge": self.base.name})
        if len(self.anchors) != len(self.coanchors):
            raise StructuralError(
                "锚点与余锚点的个数不一致",
                details={"anchors": len(self.anchors), "coanchors": len(self.coanchors)},
            )
        self.anchors = [self.source.module._check(w) for w in self.anchors]
        self.coanchors = [self.target.module._check(w) for w in self.coanchors]
        for j, (omega, eta) in enumerate(zip(self.anchors, self.coanchors)):
            d_omega, d_eta = self.source.d_norm(omega), self.target.d_norm(eta)
            if max(d_omega, d_eta) > 1.0 + ANCHOR_TOL:
                raise ValidationError(
                    "锚点的 D-范数超过 1",
                    details={"index": j, "anchor": d_omega, "coanchor": d_eta},
                )
        self.name = self.name or f"mbridge[{self.source.name},{self.target.name}]"

    @property
    def size(self) -> int:
        return len(self.anchors)

    @property
    def split(self) -> int:
        """ℳ⊕𝒩 坐标中 ℳ 部分的长度"""
        return self.source.module.dim

    @cached_property
    def family(self) -> ConvexAnchorFamily:
        return ConvexAnchorFamily(
            np.column_stack(self.anchors), np.column_stack(self.coanchors)
        )

    @cached_property
    def deck_seminorm(self) -> AtomicSeminorm:
        """ℳ⊕𝒩 坐标上的 dn_γ"""
        bn = self.base.bn_seminorm()
        left, right = self.source.module, self.target.module
        parts = []
        for omega, eta in zip(self.anchors, self.coanchors):
            for side in ("left", "right"):
                pairing = block_diag(left.inner_matrix(omega, side), right.inner_matrix(eta, side))
                parts.append(bn.compose(pairing))
        return max_seminorm(parts, name=f"dn[{self.name}]")

    def transposed(self) -> "ModularBridge":
        return ModularBridge(
            self.base.transposed(),
            self.target,
            self.source,
            self.coanchors,
            self.anchors,
            name=f"{self.name}ᵀ",
            convex=self.convex,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "base": self.base.name,
            "source": self.source.name,
            "target": self.target.name,
            "anchors": self.size,
            "convex": self.convex,
        }

    def __repr__(self) -> str:
        return f"ModularBridge(name={self.name}, anchors={self.size}, convex={self.convex})"


def deck_norm(bridge: ModularBridge, omega: np.ndarray, eta: np.ndarray) -> float:
    v = np.concatenate(
        [bridge.source.module._check(omega), bridge.target.module._check(eta)]
    )
    return bridge.deck_seminorm(v)


def convexify(bridge: ModularBridge) -> ModularBridge:
    """
    换成锚点的 ℓ¹ 凸包：deck 范数与模 reach 不变，imprint 不增
    """
    if bridge.convex:
        return bridge
    return replace(bridge, name=f"ĉ{bridge.name}", convex=True)


def identity_modular_bridge(
    bundle: MQVB, anchors: Optional[Sequence[np.ndarray]] = None
) -> ModularBridge:
    """恒等底桥，锚点与余锚点相同；缺省取 D 归一化的单位元"""
    if anchors is None:
        anchors = [scale_to_unit_ball(bundle)]
    return ModularBridge(
        identity_bridge(bundle.base),
        bundle,
        bundle,
        list(anchors),
        list(anchors),
        name=f"id[{bundle.name}]",
    )


# ------------------------------------------------------------------
# 统计量
# ------------------------------------------------------------------


def modular_reach(bridge: ModularBridge) -> Estimate:
    values = [deck_norm(bridge, w, e) for w, e in zip(bridge.anchors, bridge.coanchors)]
    j = int(np.argmax(values))
    return Estimate.exact(values[j], metadata={"quantity": "modular_reach", "witness": j})


def dball_samples(bundle: MQVB, count: int, seed: int = 0) -> list[np.ndarray]:
    """
    D-单位球中的样本：原点、随机方向的边界点及其一半

    圆形情形改用圆周上的等分点。
    """
    module = bundle.module
    points = [module.zero_element()]
    radius = circular_radius(bundle)
    if radius is not None:
        angles = np.linspace(0.0, 2 * np.pi, max(count, CIRCLE_SAMPLES), endpoint=False)
        points.extend(radius * np.array([np.cos(t), np.sin(t)]) for t in angles)
        return points
    rng = np.random.default_rng(seed)
    directions = list(np.eye(module.dim))
    directions.extend(module.random_element(rng) for _ in range(count))
    for v in directions:
        d = bundle.d_norm(v)
        if d > 0.0:
            points.append(v / d)
            points.append(0.5 * v / d)
    return points


def _side_gap(
    bundle: MQVB,
    anchors: np.ndarray,
    convex: bool,
    metric: AtomicSeminorm,
    samples: list[np.ndarray],
    config: SolverConfig,
    workers: int,
) -> Estimate:
    def distance(omega: np.ndarray) -> float:
        if convex:
            return minimize_on_l1_ball(metric, omega, anchors, config).value
        return min(metric(omega - anchors[:, j]) for j in range(anchors.shape[1]))

    return hausdorff_gap(samples, distance, workers=workers)


def _imprint_with(
    bridge: ModularBridge,
    metrics: tuple[AtomicSeminorm, AtomicSeminorm],
    config: SolverConfig,
    workers: int,
) -> Estimate:
    family = bridge.family
    parts = []
    for bundle, anchors, metric, offset in (
        (bridge.source, family.anchors, metrics[0], 0),
        (bridge.target, family.coanchors, metrics[1], 1),
    ):
        samples = dball_samples(bundle, config.samples, config.seed + offset)
        parts.append(
            _side_gap(bundle, anchors, bridge.convex, metric, samples, config, workers)
        )
    return combine_max(parts, quantity="imprint", convex=bridge.convex)


def imprint(
    bridge: ModularBridge, config: Optional[SolverConfig] = None, workers: int = 1
) -> Estimate:
    """
    imprint 的下界（K 取精确值或探针下界）

    metadata["exact_metric"] 表示两侧 K 都取精确原子形式。imprint 只作诊断，
    由桥构造隧道时默认使用凸化给出的可证半径 1。
    """
    config = config or SolverConfig()
    left, left_kind = kantorovich_seminorm(bridge.source, config)
    right, right_kind = kantorovich_seminorm(bridge.target, config)
    est = _imprint_with(bridge, (left, right), config, workers)
    exact = left_kind == BoundKind.EXACT and right_kind == BoundKind.EXACT
    logger.info(
        f"imprint bridge={bridge.name} lower={est.value:.6g} exact_metric={exact} "
        f"convex={bridge.convex}"
    )
    return Estimate(
        est.value,
        BoundKind.LOWER,
        iterations=est.iterations,
        metadata={"quantity": "imprint", "convex": bridge.convex, "exact_metric": exact},
    )


def base_length(bridge: ModularBridge, config: Optional[SolverConfig] = None) -> Estimate:
    """底桥的 length：有可证值时取之（上界），否则数值估计"""
    certified = bridge.base.certified_length
    if certified is not None:
        return Estimate(float(certified), BoundKind.UPPER, metadata={"source": "certified"})
    stats = bridge_stats(bridge.base, bridge.source.base, bridge.target.base, config)
    return stats.length


def modular_length(
    bridge: ModularBridge, config: Optional[SolverConfig] = None, workers: int = 1
) -> Estimate:
    """max{length(γ_♭), imprint + 模 reach}"""
    config = config or SolverConfig()
    total = combine_sum([imprint(bridge, config, workers), modular_reach(bridge)])
    est = combine_max([base_length(bridge, config), total], quantity="modular_length")
    logger.info(f"模桥 length bridge={bridge.name} value={est.value:.6g} kind={est.kind.value}")
    return est
