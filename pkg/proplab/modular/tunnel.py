"""
模隧道 τ = (𝔻, (θ_𝔄, Θ_𝔄), (θ_𝔅, Θ_𝔅))

枢纽 𝔻 是度量化量子向量丛，两条腿是模等距满射；底隧道 τ_♭ 由 θ 组成，
模隧道的 extent 就是底隧道的 extent。figure 为构造给出的可证上界。
"""
from __future__ import annotations

from typing import Any, Optional

import numpy as np
from loguru import logger

from proplab.bundles.bundle import DNorm, MQVB, modular_isometry_check
from proplab.bundles.kantorovich import gauge_metric
from proplab.bundles.module import ModularMorphism, direct_sum_projections, identity_modular
from proplab.config import SolverConfig
from proplab.exceptions import (
    EndpointMismatchError,
    PreconditionError,
    StructuralError,
    ValidationError,
)
from proplab.kernels.estimate import BoundKind, Estimate
from proplab.modular.bridge import (
    ModularBridge,
    base_length,
    modular_reach,
)
from proplab.modular.gauge import GaugeSet
from proplab.qcms.tunnel import (
    Tunnel,
    compose_tunnels,
    identity_tunnel,
    invert_tunnel,
    tunnel_from_bridge,
)
from proplab.seminorms.atoms import combine_max
from proplab.seminorms.checks import CheckReport, merge_reports

ISOMETRY_SAMPLES = 6
PIVOT_SAMPLES = 24
ZERO_LENGTH_EPS = 1e-6
# 凸包含 0 且 gauge 度量满足 d(ω, 0) ≤ D(ω)，D-单位球落在 0 的半径 1 之内
CONVEX_RADIUS = 1.0


class ModularTunnel:
    """从 domain 到 codomain 的模隧道"""

    def __init__(
        self,
        pivot: MQVB,
        domain: MQVB,
        codomain: MQVB,
        leg_domain: ModularMorphism,
        leg_codomain: ModularMorphism,
        base: Tunnel,
        figure: float,
        name: str = "",
        stages: int = 1,
        certify: bool = True,
        config: Optional[SolverConfig] = None,
        sample_count: int = ISOMETRY_SAMPLES,
    ):
        for leg, end, flat in (
            (leg_domain, domain, base.leg_domain),
            (leg_codomain, codomain, base.leg_codomain),
        ):
            if not leg.source.same_as(pivot.module) or not leg.target.same_as(end.module):
                raise StructuralError(
                    "模隧道的腿与枢纽或端点不匹配",
                    details={"leg": leg.name, "pivot": pivot.name, "end": end.name},
                )
            if leg.theta.matrix.shape != flat.matrix.shape or not np.allclose(
                leg.theta.matrix, flat.matrix
            ):
                raise StructuralError(
                    "模隧道腿的 θ 与底隧道的腿不一致",
                    details={"leg": leg.name, "base_leg": flat.name},
                )
        if not (base.domain.same_as(domain.base) and base.codomain.same_as(codomain.base)):
            raise StructuralError(
                "底隧道的端点与丛的底空间不一致",
                details={"base": base.name, "domain": domain.name, "codomain": codomain.name},
            )
        if figure < 0:
            raise ValidationError("extent 上界必须非负", details={"figure": figure})
        self.pivot = pivot
        self.domain = domain
        self.codomain = codomain
        self.leg_domain = leg_domain
        self.leg_codomain = leg_codomain
        self.base = base
        self.figure = float(figure)
        self.name = name or f"mtunnel[{domain.name}→{codomain.name}]"
        self.stages = stages
        self.report: Optional[CheckReport] = None
        self.notes: dict[str, Any] = {}
        if certify:
            self.report = self.certify(config, sample_count)
            if not self.report.passed:
                raise ValidationError(
                    "模隧道的腿不是模等距",
                    details={"tunnel": self.name, **self.report.details},
                    witnesses=self.report.witnesses,
                )

    def certify(
        self, config: Optional[SolverConfig] = None, sample_count: int = ISOMETRY_SAMPLES
    ) -> CheckReport:
        """两条腿的模等距校验；θ 部分由底隧道负责"""
        reports = [
            modular_isometry_check(
                self.leg_domain,
                self.pivot,
                self.domain,
                sample_count,
                seed=1,
                config=config,
                check_base=False,
            ),
            modular_isometry_check(
                self.leg_codomain,
                self.pivot,
                self.codomain,
                sample_count,
                seed=2,
                config=config,
                check_base=False,
            ),
        ]
        return merge_reports(f"legs[{self.name}]", reports)

    def extent(self, config: Optional[SolverConfig] = None) -> Estimate:
        return self.base.extent(config)

    def inverse(self) -> "ModularTunnel":
        return invert_modular(self)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "domain": self.domain.name,
            "codomain": self.codomain.name,
            "pivot": self.pivot.module.label,
            "figure": self.figure,
            "stages": self.stages,
            "base": self.base.to_dict(),
            "notes": self.notes,
            "legs": None if self.report is None else self.report.to_dict(),
        }

    def __repr__(self) -> str:
        return f"ModularTunnel(name={self.name}, figure={self.figure:.6g})"


def modular_extent(tunnel: ModularTunnel, config: Optional[SolverConfig] = None) -> Estimate:
    return tunnel.extent(config)


def identity_modular_tunnel(bundle: MQVB) -> ModularTunnel:
    ident = identity_modular(bundle.module)
    return ModularTunnel(
        bundle,
        bundle,
        bundle,
        ident,
        ident,
        identity_tunnel(bundle.base),
        0.0,
        name=f"id[{bundle.name}]",
        stages=0,
        certify=False,
    )


def invert_modular(tunnel: ModularTunnel) -> ModularTunnel:
    inv = ModularTunnel(
        tunnel.pivot,
        tunnel.codomain,
        tunnel.domain,
        tunnel.leg_codomain,
        tunnel.leg_domain,
        invert_tunnel(tunnel.base),
        tunnel.figure,
        name=f"{tunnel.name}⁻¹",
        stages=tunnel.stages,
        certify=False,
    )
    inv.report = tunnel.report
    return inv


# ------------------------------------------------------------------
# 由模桥构造
# ------------------------------------------------------------------


def bridge_gauge_set(
    bridge: ModularBridge, radius: float, config: Optional[SolverConfig] = None
) -> GaugeSet:
    metrics = (gauge_metric(bridge.source)[0], gauge_metric(bridge.target)[0])
    return GaugeSet(bridge.family, metrics, radius, config or SolverConfig())


def modular_tunnel_from_bridge(
    bridge: ModularBridge,
    lam: Optional[float] = None,
    eps: Optional[float] = None,
    radius: Optional[float] = None,
    config: Optional[SolverConfig] = None,
    certify: bool = True,
    sample_count: int = ISOMETRY_SAMPLES,
    pivot_samples: int = PIVOT_SAMPLES,
) -> ModularTunnel:
    """
    D(ω, η) = max{D_ℳ(ω), D_𝒩(η), dn(ω, η)/(λ+ε), 𝗉(ω, η)}
    L(a, b) = max{L_𝔄(a), L_𝔅(b), bn(a, b)/(λ+ε)}

    Args:
        bridge: 已凸化的模桥
        lam: λ；缺省取 max{length(γ_♭), r + 模 reach}
        eps: 松弛 ε ≥ 0；缺省在 λ = 0 时取 1e-6，否则为 0
        radius: 𝒟 的半径 r；缺省为凸化给出的可证半径 1
        config: 求解配置
        certify: 是否校验两条腿与枢纽的 D-范数
        sample_count: 腿校验的样本数
        pivot_samples: 枢纽 D-范数校验的样本数

    Raises:
        PreconditionError: 桥未凸化、λ 低于所需值，或 λ + ε = 0
    """
    if not bridge.convex:
        raise PreconditionError("由模桥构造隧道需要凸化的锚点族", details={"bridge": bridge.name})
    config = config or SolverConfig()
    source = "user"
    if radius is None:
        radius, source = CONVEX_RADIUS, "certified"
    reach = modular_reach(bridge).value
    length = base_length(bridge, config).value
    required = max(length, radius + reach)
    if lam is None:
        lam = required
    elif lam < required - 1e-9:
        raise PreconditionError(
            "λ 低于模桥的 length",
            details={"lambda": lam, "required": required, "bridge": bridge.name},
        )
    if eps is None:
        eps = ZERO_LENGTH_EPS if lam == 0 else 0.0
    if eps < 0 or lam + eps <= 0:
        raise PreconditionError("需要 ε ≥ 0 且 λ + ε > 0", details={"lambda": lam, "eps": eps})
    scale = lam + eps
    base = tunnel_from_bridge(
        bridge.base,
        bridge.source.base,
        bridge.target.base,
        scale,
        force=True,
        config=config,
        certify=certify,
    )
    dsum = direct_sum_projections(
        bridge.source.module,
        bridge.target.module,
        name=f"{bridge.source.name}⊕{bridge.target.name}",
    )
    gauge = bridge_gauge_set(bridge, radius, config)
    seminorm = combine_max(
        [
            bridge.source.dnorm.seminorm.compose(dsum.proj_left.matrix),
            bridge.target.dnorm.seminorm.compose(dsum.proj_right.matrix),
            (bridge.deck_seminorm, 1.0 / scale),
            gauge.seminorm,
        ],
        name=f"D[{bridge.name},λ={scale:.4g}]",
    ).with_solver(config)
    pivot = MQVB(
        dsum.module,
        DNorm(seminorm, dsum.module, name=seminorm.name),
        base.pivot,
        bridge.source.triple,
        name=f"pivot[{bridge.name}]",
        validate=certify,
        sample_count=pivot_samples,
    )
    tunnel = ModularTunnel(
        pivot,
        bridge.source,
        bridge.target,
        dsum.proj_left,
        dsum.proj_right,
        base,
        scale,
        name=f"mtunnel[{bridge.name}]",
        certify=certify,
        config=config,
        sample_count=sample_count,
    )
    tunnel.notes = {"lambda": lam, "eps": eps, "radius": radius, "radius_source": source}
    logger.info(
        f"由模桥构造模隧道 bridge={bridge.name} lambda={lam:.6g} eps={eps:.3g} "
        f"radius={radius:.6g} radius_source={source}"
    )
    return tunnel


# ------------------------------------------------------------------
# 复合
# ------------------------------------------------------------------


def compose_modular(
    first: ModularTunnel,
    second: ModularTunnel,
    eps: float,
    config: Optional[SolverConfig] = None,
    certify: bool = True,
    sample_count: int = ISOMETRY_SAMPLES,
    pivot_samples: int = PIVOT_SAMPLES,
) -> ModularTunnel:
    """
    D(ω, η) = max{D₁(ω), D₂(η), ‖Θ_𝔅(ω) − Π_𝔅(η)‖/ε}，figure = e₁ + e₂ + ε

    Raises:
        EndpointMismatchError: first 的终点不是 second 的起点
        PreconditionError: ε ≤ 0
    """
    if not first.codomain.same_as(second.domain):
        raise EndpointMismatchError(first.codomain.name, second.domain.name)
    if eps <= 0:
        raise PreconditionError("ε 必须为正", details={"eps": eps})
    config = config or SolverConfig()
    base = compose_tunnels(first.base, second.base, eps, config, certify)
    dsum = direct_sum_projections(
        first.pivot.module, second.pivot.module, name=f"{first.pivot.name}⊕{second.pivot.name}"
    )
    middle = first.codomain.module
    coupling = middle.norm_seminorm.compose(
        np.hstack([first.leg_codomain.matrix, -second.leg_domain.matrix]), name="coupling"
    )
    seminorm = combine_max(
        [
            first.pivot.dnorm.seminorm.compose(dsum.proj_left.matrix),
            second.pivot.dnorm.seminorm.compose(dsum.proj_right.matrix),
            (coupling, 1.0 / eps),
        ],
        name=f"D[{first.name}∘{second.name}]",
    ).with_solver(config)
    pivot = MQVB(
        dsum.module,
        DNorm(seminorm, dsum.module, name=seminorm.name),
        base.pivot,
        first.pivot.triple,
        name=f"pivot[{first.name}∘{second.name}]",
        validate=certify,
        sample_count=pivot_samples,
    )
    figure = first.figure + second.figure + eps
    tunnel = ModularTunnel(
        pivot,
        first.domain,
        second.codomain,
        first.leg_domain.compose(dsum.proj_left),
        second.leg_codomain.compose(dsum.proj_right),
        base,
        figure,
        name=f"{first.name}∘{second.name}",
        stages=first.stages + second.stages,
        certify=certify,
        config=config,
        sample_count=sample_count,
    )
    logger.info(f"复合模隧道 name={tunnel.name} figure={figure:.6g} stages={tunnel.stages}")
    return tunnel


def extent_consistency(
    tunnel: ModularTunnel, config: Optional[SolverConfig] = None
) -> CheckReport:
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
