"""
隧道 τ = (𝔇, L_𝔇, π_𝔄, π_𝔅)

两条腿是从枢纽 (𝔇, L_𝔇) 出发的量子等距满射。构造时记录一个可证的 extent
上界 figure（桥构造为 λ，复合为 e₁+e₂+ε），数值 extent 另行估计，
两者分开报告。
"""
from __future__ import annotations

from typing import Any, Optional, Sequence

import numpy as np
from loguru import logger

from proplab.algebra.morphisms import (
    StarMorphism,
    coordinate_projection,
    direct_sum,
    identity_morphism,
)
from proplab.config import SolverConfig
from proplab.exceptions import (
    EndpointMismatchError,
    NonSurjectiveError,
    PreconditionError,
    StructuralError,
    ValidationError,
)
from proplab.kernels.engine import fiber_infimum
from proplab.kernels.estimate import BoundKind, Estimate, combine_max
from proplab.qcms.bridge import Bridge, bridge_stats, tensor_bridge
from proplab.qcms.gaps import commutative_gap, pure_state_samples, state_gap
from proplab.qcms.space import QCMS, metric_space
from proplab.seminorms.atoms import AtomicSeminorm, atoms_from_map, combine_max as max_seminorm
from proplab.seminorms.checks import CheckReport, merge_reports, sample_self_adjoint

ISOMETRY_SAMPLES = 12
ISOMETRY_TOL = 1e-6
LENGTH_TOL = 1e-6


def quantum_isometry_check(
    pi: StarMorphism,
    source: QCMS,
    target: QCMS,
    sample_count: int = ISOMETRY_SAMPLES,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    tol: float = ISOMETRY_TOL,
) -> CheckReport:
    """
    抽样检查 L_target(b) = inf{L_source(d) : π(d) = b}

    Raises:
        NonSurjectiveError: π 在自伴部分上不是满射
        StructuralError: π 的源/目标与空间不一致
    """
    if pi.source != source.shape or pi.target != target.shape:
        raise StructuralError(
            "态射与空间不匹配",
            details={"morphism": pi.name, "source": source.name, "target": target.name},
        )
    rank = int(np.linalg.matrix_rank(pi.sa_matrix, tol=1e-9))
    if rank != target.shape.sa_dim:
        raise NonSurjectiveError(rank, target.shape.sa_dim)
    config = config or SolverConfig()
    rng = np.random.default_rng(seed)
    worst, witnesses, iterations = float("inf"), [], 0
    for _ in range(sample_count):
        b = sample_self_adjoint(target.shape, rng).sa_coords()
        expected = target.lip_sa(b)
        est = fiber_infimum(source.lip_sa, pi.sa_matrix, b, config)
        iterations += est.iterations
        slack = tol * max(1.0, expected) + est.tol
        margin = slack - abs(est.value - expected)
        if margin < worst:
            worst = margin
        if margin < 0:
            witnesses.append({"fiber": est.value, "target": expected})
    passed = worst >= 0
    if not passed:
        logger.warning(f"量子等距校验失败 morphism={pi.name} worst={worst:.3e}")
    return CheckReport(
        f"isometry[{pi.name}]",
        passed,
        worst,
        sample_count,
        witnesses[-5:],
        {"iterations": iterations},
    )


class Tunnel:
    """从 domain 到 codomain 的隧道"""

    def __init__(
        self,
        pivot: QCMS,
        domain: QCMS,
        codomain: QCMS,
        leg_domain: StarMorphism,
        leg_codomain: StarMorphism,
        figure: float,
        name: str = "",
        stages: int = 1,
        certify: bool = True,
        config: Optional[SolverConfig] = None,
        sample_count: int = ISOMETRY_SAMPLES,
    ):
        for leg, end in ((leg_domain, domain), (leg_codomain, codomain)):
            if leg.source != pivot.shape or leg.target != end.shape:
                raise StructuralError(
                    "隧道的腿与枢纽或端点不匹配",
                    details={"leg": leg.name, "pivot": pivot.shape.label, "end": end.shape.label},
                )
        if figure < 0:
            raise ValidationError("extent 上界必须非负", details={"figure": figure})
        self.pivot = pivot
        self.domain = domain
        self.codomain = codomain
        self.leg_domain = leg_domain
        self.leg_codomain = leg_codomain
        self.figure = float(figure)
        self.name = name or f"tunnel[{domain.name}→{codomain.name}]"
        self.stages = stages
        self.report: Optional[CheckReport] = None
        self._extent: dict[str, Estimate] = {}
        if certify:
            self.report = self.certify(config, sample_count)
            if not self.report.passed:
                raise ValidationError(
                    "隧道的腿不是量子等距",
                    details={"tunnel": self.name, **self.report.details},
                )

    def certify(
        self, config: Optional[SolverConfig] = None, sample_count: int = ISOMETRY_SAMPLES
    ) -> CheckReport:
        reports = [
            quantum_isometry_check(
                self.leg_domain, self.pivot, self.domain, sample_count, 1, config
            ),
            quantum_isometry_check(
                self.leg_codomain, self.pivot, self.codomain, sample_count, 2, config
            ),
        ]
        return merge_reports(f"legs[{self.name}]", reports)

    def extent(self, config: Optional[SolverConfig] = None) -> Estimate:
        config = config or SolverConfig()
        key = config.model_dump_json()
        if key not in self._extent:
            self._extent[key] = tunnel_extent(self, config)
        return self._extent[key]

    def inverse(self) -> "Tunnel":
        return invert_tunnel(self)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "domain": self.domain.name,
            "codomain": self.codomain.name,
            "pivot": self.pivot.shape.label,
            "figure": self.figure,
            "stages": self.stages,
            "legs": None if self.report is None else self.report.to_dict(),
        }

    def __repr__(self) -> str:
        return f"Tunnel(name={self.name}, figure={self.figure:.6g})"


# ------------------------------------------------------------------
# extent
# ------------------------------------------------------------------


def _leg_extent(pivot: QCMS, leg: StarMorphism, config: SolverConfig) -> Estimate:
    if pivot.is_commutative and pivot.lip_sa.is_polyhedral:
        rows = list(range(leg.target.num_blocks))
        return commutative_gap(pivot.lip_sa, leg.sa_matrix, rows, config)
    states, exhaustive = pure_state_samples(pivot.shape, config.samples, config.seed)
    return state_gap(
        pivot.lip_sa,
        pivot.shape,
        leg.target,
        leg.matrix @ pivot.shape.sa_basis,
        states,
        config,
        exhaustive=exhaustive,
    )


def tunnel_extent(tunnel: Tunnel, config: Optional[SolverConfig] = None) -> Estimate:
    """max_j Haus(𝒮(𝔇), π_j*𝒮(𝔄_j))；交换枢纽上精确，否则为下界"""
    config = config or SolverConfig()
    parts = [
        _leg_extent(tunnel.pivot, tunnel.leg_domain, config),
        _leg_extent(tunnel.pivot, tunnel.leg_codomain, config),
    ]
    est = combine_max(parts, quantity="extent", tunnel=tunnel.name)
    if est.value > tunnel.figure + 1e-3:
        logger.warning(
            f"extent 估计超过可证上界 tunnel={tunnel.name} "
            f"estimate={est.value:.6g} figure={tunnel.figure:.6g}"
        )
    logger.debug(f"extent tunnel={tunnel.name} value={est.value:.6g} kind={est.kind.value}")
    return est


# ------------------------------------------------------------------
# 构造
# ------------------------------------------------------------------


def tunnel_from_bridge(
    bridge: Bridge,
    left: QCMS,
    right: QCMS,
    lam: Optional[float] = None,
    force: bool = False,
    config: Optional[SolverConfig] = None,
    certify: bool = True,
) -> Tunnel:
    """
    L(a, b) = max{L_𝔄(a), L_𝔅(b), bn(a, b)/λ}，枢纽为 𝔄⊕𝔅，extent ≤ λ

    Args:
        bridge: 桥
        left: 𝔄 端空间
        right: 𝔅 端空间
        lam: λ；None 时取桥的 length（可证值优先）
        force: 跳过 λ ≥ length 的数值检查
        config: 求解配置
        certify: 是否校验两条腿为量子等距

    Raises:
        PreconditionError: λ ≤ 0，或 λ 低于桥的 length
    """
    config = config or SolverConfig()
    certified = bridge.certified_length
    estimated: Optional[float] = None
    if lam is None:
        if certified is None:
            estimated = bridge_stats(bridge, left, right, config).length.value
        lam = max(float(certified if certified is not None else estimated), 1e-6)
    if lam <= 0:
        raise PreconditionError("λ 必须为正", details={"lambda": lam})
    if not force and (certified is None or lam < certified - LENGTH_TOL):
        if estimated is None:
            estimated = bridge_stats(bridge, left, right, config).length.value
        if lam < estimated - LENGTH_TOL:
            raise PreconditionError(
                "λ 低于桥的 length",
                details={"lambda": lam, "length": estimated, "bridge": bridge.name},
            )
    ds = direct_sum(left.shape, right.shape)
    lip = max_seminorm(
        [
            left.lip.compose(ds.proj_left.matrix),
            right.lip.compose(ds.proj_right.matrix),
            (bridge.bn_seminorm(), 1.0 / lam),
        ],
        name=f"L[{bridge.name},λ={lam:.4g}]",
    )
    pivot = QCMS(ds.shape, lip, left.triple, name=f"pivot[{bridge.name}]")
    tunnel = Tunnel(
        pivot,
        left,
        right,
        ds.proj_left,
        ds.proj_right,
        lam,
        name=f"tunnel[{bridge.name}]",
        certify=certify,
        config=config,
    )
    logger.info(f"由桥构造隧道 bridge={bridge.name} lambda={lam:.6g}")
    return tunnel


def identity_tunnel(space: QCMS) -> Tunnel:
    ident = identity_morphism(space.shape)
    return Tunnel(space, space, space, ident, ident, 0.0, name=f"id[{space.name}]", stages=0)


def invert_tunnel(tunnel: Tunnel) -> Tunnel:
    """τ⁻¹ = (𝔇, L, π_𝔅, π_𝔄)"""
    inv = Tunnel(
        tunnel.pivot,
        tunnel.codomain,
        tunnel.domain,
        tunnel.leg_codomain,
        tunnel.leg_domain,
        tunnel.figure,
        name=f"{tunnel.name}⁻¹",
        stages=tunnel.stages,
        certify=False,
    )
    inv.report = tunnel.report
    return inv


def _coupling_seminorm(first: Tunnel, second: Tunnel) -> AtomicSeminorm:
    """‖θ_𝔅(d₁) − π_𝔅(d₂)‖ on 𝔇₁⊕𝔇₂"""
    n1 = first.pivot.shape.real_dim
    mid = first.codomain.shape
    theta, pi = first.leg_codomain.matrix, second.leg_domain.matrix

    def atoms(v: np.ndarray) -> list[np.ndarray]:
        return list(mid.from_coords(theta @ v[:n1] - pi @ v[n1:]).blocks)

    return atoms_from_map(n1 + second.pivot.shape.real_dim, atoms, name="coupling")


def compose_tunnels(
    first: Tunnel,
    second: Tunnel,
    eps: float,
    config: Optional[SolverConfig] = None,
    certify: bool = True,
) -> Tunnel:
    """
    L(d₁, d₂) = max{L¹(d₁), L²(d₂), ‖θ_𝔅(d₁) − π_𝔅(d₂)‖/ε}

    Raises:
        EndpointMismatchError: first 的终点不是 second 的起点
        PreconditionError: ε ≤ 0
    """
    if not first.codomain.same_as(second.domain):
        raise EndpointMismatchError(first.codomain.name, second.domain.name)
    if eps <= 0:
        raise PreconditionError("ε 必须为正", details={"eps": eps})
    ds = direct_sum(first.pivot.shape, second.pivot.shape)
    lip = max_seminorm(
        [
            first.pivot.lip.compose(ds.proj_left.matrix),
            second.pivot.lip.compose(ds.proj_right.matrix),
            (_coupling_seminorm(first, second), 1.0 / eps),
        ],
        name=f"L[{first.name}∘{second.name}]",
    )
    pivot = QCMS(ds.shape, lip, first.pivot.triple, name=f"pivot[{first.name}∘{second.name}]")
    figure = first.figure + second.figure + eps
    tunnel = Tunnel(
        pivot,
        first.domain,
        second.codomain,
        first.leg_domain.compose(ds.proj_left),
        second.leg_codomain.compose(ds.proj_right),
        figure,
        name=f"{first.name}∘{second.name}",
        stages=first.stages + second.stages,
        certify=certify,
        config=config,
    )
    logger.info(f"复合隧道 name={tunnel.name} figure={figure:.6g} stages={tunnel.stages}")
    return tunnel


def disjoint_union_tunnel(
    space: QCMS,
    left_points: Sequence[int],
    right_points: Sequence[int],
    left_name: str = "",
    right_name: str = "",
    certify: bool = True,
) -> Tunnel:
    """
    有限度量空间 Z 上的度量隧道：两腿为到 X、Y 子空间的限制

    extent 等于 max_j max_{z∈Z} d(z, side_j)。
    """
    if space.metric is None:
        raise PreconditionError("度量隧道需要带距离矩阵的空间", details={"space": space.name})
    d = space.metric
    n = d.shape[0]
    xs, ys = [int(i) for i in left_points], [int(j) for j in right_points]
    if not xs or not ys or any(not 0 <= i < n for i in xs + ys):
        raise StructuralError("子空间的点不合法", details={"left": xs, "right": ys, "size": n})
    left = metric_space(d[np.ix_(xs, xs)], name=left_name or f"{space.name}|{xs}")
    right = metric_space(d[np.ix_(ys, ys)], name=right_name or f"{space.name}|{ys}")
    figure = max(float(d[:, xs].min(axis=1).max()), float(d[:, ys].min(axis=1).max()))
    return Tunnel(
        space,
        left,
        right,
        coordinate_projection(space.shape, left.shape, xs),
        coordinate_projection(space.shape, right.shape, ys),
        figure,
        name=f"union[{space.name}]",
        certify=certify,
    )


def fallback_tunnel(
    left: QCMS, right: QCMS, config: Optional[SolverConfig] = None, certify: bool = True
) -> Tunnel:
    """张量桥在 λ = max(diam)/2 处的隧道"""
    bridge = tensor_bridge(left, right, config)
    lam = max(float(bridge.certified_length or 0.0), 1e-6)
    return tunnel_from_bridge(bridge, left, right, lam, force=True, config=config, certify=certify)


def extent_report(tunnel: Tunnel, config: Optional[SolverConfig] = None) -> CheckReport:
    """
    数值 extent 不超过可证上界 + 1e-3

    下界估计直接比较；上界估计高于 figure 时 details["comparable"] 为 False 且不通过
    """
    est = tunnel.extent(config)
    margin = tunnel.figure + 1e-3 - est.value
    # 上界估计高于 figure 时无法判定真实 extent 是否越界
    comparable = est.kind is not BoundKind.UPPER or margin >= 0
    if not comparable:
        logger.warning(
            f"extent 上界估计高于 figure，无法比较 tunnel={tunnel.name} "
            f"estimate={est.value:.6g} figure={tunnel.figure:.6g}"
        )
    return CheckReport(
        f"extent[{tunnel.name}]",
        margin >= 0,
        margin,
        1,
        details={
            "estimate": est.to_dict(),
            "figure": tunnel.figure,
            "comparable": comparable,
        },
    )
