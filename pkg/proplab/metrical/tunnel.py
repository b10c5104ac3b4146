"""
度量隧道 (τ, τ′)

τ 是两个底层度量化丛之间的模隧道，τ′ 是两个作用空间之间的隧道，
τ′ 的枢纽作用在 τ 的枢纽模上。可证上界 figure = max{figure(τ), figure(τ′)}，
数值 extent 同样取两者的最大值。
"""
from __future__ import annotations

from typing import Any, Optional

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraElement
from proplab.config import SolverConfig
from proplab.exceptions import (
    EndpointMismatchError,
    PreconditionError,
    StructuralError,
    ValidationError,
)
from proplab.kernels.engine import fiber_infimum
from proplab.kernels.estimate import Estimate, combine_max
from proplab.metrical.action import (
    ModuleAction,
    action_check,
    direct_sum_action,
    scalar_action,
)
from proplab.metrical.bundle import G_SAMPLES, MetricalQVB, g_condition_check
from proplab.modular.target import module_fiber_points
from proplab.modular.tunnel import (
    ModularTunnel,
    compose_modular,
    identity_modular_tunnel,
    invert_modular,
)
from proplab.qcms.target import fiber_points
from proplab.qcms.tunnel import Tunnel, compose_tunnels, identity_tunnel, invert_tunnel
from proplab.seminorms.checks import CheckReport, merge_reports

EQUIVARIANCE_TOL = 1e-8


class MetricalTunnel:
    """从 domain 到 codomain 的度量隧道"""

    def __init__(
        self,
        modular: ModularTunnel,
        acting: Tunnel,
        action: ModuleAction,
        domain: MetricalQVB,
        codomain: MetricalQVB,
        name: str = "",
        certify: bool = True,
        sample_count: int = G_SAMPLES,
        seed: int = 0,
    ):
        if not (modular.domain.same_as(domain.flat) and modular.codomain.same_as(codomain.flat)):
            raise StructuralError(
                "模隧道的端点与度量丛不一致",
                details={"tunnel": modular.name, "domain": domain.name, "codomain": codomain.name},
            )
        if not (acting.domain.same_as(domain.alt) and acting.codomain.same_as(codomain.alt)):
            raise StructuralError(
                "作用空间之间的隧道端点不一致",
                details={"tunnel": acting.name, "domain": domain.name, "codomain": codomain.name},
            )
        same_pivot = action.acting.same_as(acting.pivot)
        if not (same_pivot and action.module.same_as(modular.pivot.module)):
            raise StructuralError(
                "枢纽作用与两条隧道的枢纽不一致",
                details={"action": action.name, "modular": modular.name, "acting": acting.name},
            )
        self.modular = modular
        self.acting = acting
        self.domain = domain
        self.codomain = codomain
        self.name = name or f"met[{domain.name}→{codomain.name}]"
        self.pivot = MetricalQVB(
            modular.pivot,
            action,
            modular.pivot.triple,
            name=f"pivot[{self.name}]",
            validate=False,
        )
        self.report: Optional[CheckReport] = None
        if certify:
            self.report = self.certify(sample_count, seed)
            if not self.report.passed:
                raise ValidationError(
                    "度量隧道的枢纽作用不满足条件",
                    details={"tunnel": self.name, **self.report.details},
                    witnesses=self.report.witnesses,
                )

    @property
    def figure(self) -> float:
        return max(self.modular.figure, self.acting.figure)

    @property
    def stages(self) -> int:
        return max(self.modular.stages, self.acting.stages)

    def certify(self, sample_count: int = G_SAMPLES, seed: int = 0) -> CheckReport:
        """枢纽作用的 *-态射条件、D(dξ) ≤ G(‖d‖, L′(d), D(ξ)) 与两腿的等变性"""
        reports = [
            action_check(self.pivot.action, sample_count, seed),
            g_condition_check(self.pivot, sample_count, seed + 1),
            equivariance_check(self),
        ]
        return merge_reports(f"metrical[{self.name}]", reports)

    def extent(self, config: Optional[SolverConfig] = None) -> Estimate:
        return metrical_extent(self, config)

    def inverse(self) -> "MetricalTunnel":
        return invert_metrical(self)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "domain": self.domain.name,
            "codomain": self.codomain.name,
            "figure": self.figure,
            "stages": self.stages,
            "modular": self.modular.to_dict(),
            "acting": self.acting.to_dict(),
            "report": None if self.report is None else self.report.to_dict(),
        }

    def __repr__(self) -> str:
        return f"MetricalTunnel(name={self.name}, figure={self.figure:.6g})"


def equivariance_check(tunnel: MetricalTunnel, tol: float = EQUIVARIANCE_TOL) -> CheckReport:
    """Θ_j(dξ) = π^j(d)Θ_j(ξ)，在作用代数的实坐标基上逐项比较"""
    tensor = tunnel.pivot.action.tensor
    worst, witnesses = 0.0, []
    for leg, flat, end in (
        (tunnel.modular.leg_domain, tunnel.acting.leg_domain, tunnel.domain),
        (tunnel.modular.leg_codomain, tunnel.acting.leg_codomain, tunnel.codomain),
    ):
        theta, pi = leg.matrix, flat.matrix
        image = np.tensordot(pi.T, end.action.tensor, axes=1)
        for k in range(tensor.shape[0]):
            err = float(np.abs(theta @ tensor[k] - image[k] @ theta).max())
            if err > worst:
                worst = err
                if err > tol:
                    witnesses.append({"leg": leg.name, "direction": k, "deviation": err})
    return CheckReport(
        f"equivariance[{tunnel.name}]",
        worst <= tol,
        -worst,
        tensor.shape[0],
        witnesses[-5:],
    )


def metrical_extent(
    tunnel: MetricalTunnel, config: Optional[SolverConfig] = None
) -> Estimate:
    """max{ext(τ), ext(τ′)}"""
    return combine_max(
        [tunnel.modular.extent(config), tunnel.acting.extent(config)], tunnel=tunnel.name
    )


# ------------------------------------------------------------------
# 构造
# ------------------------------------------------------------------


def identity_metrical_tunnel(bundle: MetricalQVB) -> MetricalTunnel:
    return MetricalTunnel(
        identity_modular_tunnel(bundle.flat),
        identity_tunnel(bundle.alt),
        bundle.action,
        bundle,
        bundle,
        name=f"id[{bundle.name}]",
        certify=False,
    )


def scalar_metrical_tunnel(
    tunnel: ModularTunnel,
    domain: Optional[MetricalQVB] = None,
    codomain: Optional[MetricalQVB] = None,
    certify: bool = True,
    sample_count: int = G_SAMPLES,
) -> MetricalTunnel:
    """
    ℂ 作用下的度量隧道：τ′ 为 ℂ 上的恒等隧道，枢纽上 ℂ 按标量作用

    Raises:
        PreconditionError: 两端的作用空间不是同一个单点空间
    """
    domain = domain or MetricalQVB(tunnel.domain, scalar_action(tunnel.domain.module))
    codomain = codomain or MetricalQVB(
        tunnel.codomain, scalar_action(tunnel.codomain.module, domain.alt)
    )
    if domain.alt.shape.block_dims != (1,) or not domain.alt.same_as(codomain.alt):
        raise PreconditionError(
            "标量度量隧道要求两端由同一个 ℂ 作用",
            details={"domain": domain.alt.name, "codomain": codomain.alt.name},
        )
    action = scalar_action(tunnel.pivot.module, domain.alt)
    return MetricalTunnel(
        tunnel,
        identity_tunnel(domain.alt),
        action,
        domain,
        codomain,
        name=f"scalar[{tunnel.name}]",
        certify=certify,
        sample_count=sample_count,
    )


def invert_metrical(tunnel: MetricalTunnel) -> MetricalTunnel:
    inv = MetricalTunnel(
        invert_modular(tunnel.modular),
        invert_tunnel(tunnel.acting),
        tunnel.pivot.action,
        tunnel.codomain,
        tunnel.domain,
        name=f"{tunnel.name}⁻¹",
        certify=False,
    )
    inv.report = tunnel.report
    return inv


def compose_metrical(
    first: MetricalTunnel,
    second: MetricalTunnel,
    eps: float,
    config: Optional[SolverConfig] = None,
    certify: bool = True,
    sample_count: int = G_SAMPLES,
) -> MetricalTunnel:
    """
    模部分用 compose_modular，作用部分用 compose_tunnels，枢纽作用分块对角

    figure ≤ e₁ + e₂ + ε；certify 时重新抽样检查 G 条件。

    Raises:
        EndpointMismatchError: first 的终点不是 second 的起点
        PreconditionError: ε ≤ 0
    """
    if not first.codomain.same_as(second.domain):
        raise EndpointMismatchError(first.codomain.name, second.domain.name)
    if eps <= 0:
        raise PreconditionError("ε 必须为正", details={"eps": eps})
    modular = compose_modular(first.modular, second.modular, eps, config, certify)
    acting = compose_tunnels(first.acting, second.acting, eps, config, certify)
    action = direct_sum_action(first.pivot.action, second.pivot.action, acting.pivot)
    tunnel = MetricalTunnel(
        modular,
        acting,
        action,
        first.domain,
        second.codomain,
        name=f"{first.name}∘{second.name}",
        certify=certify,
        sample_count=sample_count,
    )
    logger.info(
        f"复合度量隧道 name={tunnel.name} figure={tunnel.figure:.6g} "
        f"modular={modular.figure:.6g} acting={acting.figure:.6g}"
    )
    return tunnel


# ------------------------------------------------------------------
# 作用与目标集
# ------------------------------------------------------------------


def _pairs(
    tunnel: MetricalTunnel,
    a: AlgebraElement,
    omega: np.ndarray,
    level: float,
    alt_level: float,
    count: int,
    seed: int,
    config: SolverConfig,
) -> list[tuple[AlgebraElement, np.ndarray]]:
    """纤维点对 (d, ξ)：π¹(d) = a、L′(d) ≤ l′，Θ¹(ξ) = ω、D(ξ) ≤ l"""
    shape = tunnel.acting.pivot.shape
    ds = fiber_points(tunnel.acting, a, alt_level, count, seed + 1, config)
    xis = module_fiber_points(tunnel.modular, omega, level, count, seed, config)
    return [
        (shape.from_sa_coords(ds[i % len(ds)]), xis[i % len(xis)])
        for i in range(max(len(ds), len(xis)))
    ]


def action_target_points(
    tunnel: MetricalTunnel,
    a: AlgebraElement,
    omega: np.ndarray,
    level: float,
    alt_level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
) -> list[np.ndarray]:
    """bη，其中 b ∈ t_τ′(a|l′)、η ∈ t_τ(ω|l) 来自同一组纤维点"""
    config = config or SolverConfig()
    end = tunnel.codomain
    out = []
    for d, xi in _pairs(tunnel, a, omega, level, alt_level, count, seed, config):
        b = end.alt.shape.from_coords(tunnel.acting.leg_codomain.matrix @ d.coords())
        out.append(end.action.apply(b, tunnel.modular.leg_codomain.matrix @ xi))
    return out


def action_target_check(
    tunnel: MetricalTunnel,
    a: AlgebraElement,
    omega: np.ndarray,
    level: float,
    alt_level: float,
    count: int = 8,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    tol: float = 1e-6,
) -> CheckReport:
    """
    bη ∈ t_τ(aω | G(‖a‖ + 2l′·figure(τ′), l′, l))

    dξ 是显式见证：等变性给出 Θ¹(dξ) = aω、Θ²(dξ) = bη，偏差记为 witness_residual。
    对每一对纤维点在 (Θ¹(dξ), Θ²(dξ)) 处求解叠加约束下 D 的最小值并与预算比较；
    数值 extent 读法的预算只记录。

    Raises:
        InfeasibleError: l 或 l′ 低于对应纤维的下确界
    """
    config = config or SolverConfig()
    g = tunnel.pivot.triple.G
    budget = g(a.norm() + 2.0 * alt_level * tunnel.acting.figure, alt_level, level)
    extent_budget = g(
        a.norm() + 2.0 * alt_level * tunnel.acting.extent(config).value, alt_level, level
    )
    modular = tunnel.modular
    constraint = np.vstack([modular.leg_domain.matrix, modular.leg_codomain.matrix])
    a_omega = tunnel.domain.action.apply(a, omega)
    end = tunnel.codomain
    observed, witness_norm, residual = 0.0, 0.0, 0.0
    pairs = _pairs(tunnel, a, omega, level, alt_level, count, seed, config)
    for d, xi in pairs:
        b = end.alt.shape.from_coords(tunnel.acting.leg_codomain.matrix @ d.coords())
        b_eta = end.action.apply(b, modular.leg_codomain.matrix @ xi)
        witness = tunnel.pivot.action.apply(d, xi)
        image = constraint @ witness
        residual = max(
            residual, float(np.abs(image - np.concatenate([a_omega, b_eta])).max())
        )
        est = fiber_infimum(modular.pivot.dnorm.seminorm, constraint, image, config)
        observed = max(observed, est.value - est.tol)
        witness_norm = max(witness_norm, tunnel.pivot.d_norm(witness))
    margin = budget + tol * max(1.0, budget) - observed
    logger.debug(
        f"作用目标集检查 tunnel={tunnel.name} observed={observed:.6g} budget={budget:.6g}"
    )
    return CheckReport(
        f"action_target[{tunnel.name}]",
        margin >= 0,
        margin,
        len(pairs),
        details={
            "observed": observed,
            "budget": budget,
            "extent_budget": extent_budget,
            "extent_margin": extent_budget + tol * max(1.0, extent_budget) - observed,
            "witness_dnorm": witness_norm,
            "witness_residual": residual,
        },
    )
