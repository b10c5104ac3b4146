"""
对偶模邻近度的上界：候选模隧道可证 extent 的最小值

候选为空，或最优候选的 figure 超过 max{2, diam 𝔄, diam 𝔅} 时加入单锚点的回退隧道，
其 extent 不超过该值。
"""
from __future__ import annotations

from typing import Optional, Sequence

from loguru import logger

from proplab.bundles.bundle import MQVB, scale_to_unit_ball
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError
from proplab.kernels.estimate import BoundKind, Estimate
from proplab.modular.bridge import ModularBridge, convexify
from proplab.modular.tunnel import CONVEX_RADIUS, ModularTunnel, modular_tunnel_from_bridge
from proplab.qcms.bridge import tensor_bridge
from proplab.qcms.propinquity import propinquity_ub
from proplab.seminorms.checks import CheckReport

FALLBACK_FLOOR = 2.0


def connects(tunnel: ModularTunnel, left: MQVB, right: MQVB) -> bool:
    return tunnel.domain.same_as(left) and tunnel.codomain.same_as(right)


def fallback_modular_bridge(
    left: MQVB, right: MQVB, config: Optional[SolverConfig] = None
) -> ModularBridge:
    """张量底桥，唯一的锚点对为两侧 D 归一化的单位元"""
    base = tensor_bridge(left.base, right.base, config)
    bridge = ModularBridge(
        base,
        left,
        right,
        [scale_to_unit_ball(left)],
        [scale_to_unit_ball(right)],
        name=f"fallback[{left.name},{right.name}]",
    )
    return convexify(bridge)


def fallback_modular_tunnel(
    left: MQVB,
    right: MQVB,
    config: Optional[SolverConfig] = None,
    certify: bool = True,
) -> ModularTunnel:
    """
    单锚点凸化桥上的模隧道

    凸包含 0 且 ρ(ω) ≤ D(ω)，D-单位球落在 0 的 ρ-半径 1 之内，
    因此 𝒟 的半径取可证值 1；λ = max{length(γ_♭), 1 + 模 reach}。
    """
    bridge = fallback_modular_bridge(left, right, config)
    tunnel = modular_tunnel_from_bridge(
        bridge, radius=CONVEX_RADIUS, config=config, certify=certify
    )
    tunnel.notes["fallback"] = True
    return tunnel


def fallback_ceiling(
    left: MQVB, right: MQVB, config: Optional[SolverConfig] = None
) -> float:
    """max{2, diam 𝔄, diam 𝔅}；非交换底空间的直径取其下界估计"""
    return max(
        FALLBACK_FLOOR,
        left.base.diameter(config).value,
        right.base.diameter(config).value,
    )


def modular_candidate_pool(
    left: MQVB,
    right: MQVB,
    candidates: Sequence[ModularTunnel] = (),
    config: Optional[SolverConfig] = None,
    certify: bool = True,
) -> list[ModularTunnel]:
    """
    校验候选并按需加入回退隧道

    最优 figure 不超过 2 时无需计算直径；否则与 max{2, diam 𝔄, diam 𝔅} 比较。

    Raises:
        PreconditionError: 有候选不连接 left 与 right
    """
    pool = list(candidates)
    for t in pool:
        if not connects(t, left, right):
            raise PreconditionError(
                "候选模隧道不连接给定的两个丛",
                details={"tunnel": t.name, "left": left.name, "right": right.name},
            )
    if pool:
        best = min(t.figure for t in pool)
        if best <= FALLBACK_FLOOR or best <= fallback_ceiling(left, right, config):
            return pool
        logger.debug(
            f"候选 figure 超过直径上限，加入回退隧道 left={left.name} right={right.name} "
            f"best={best:.6g}"
        )
    pool.append(fallback_modular_tunnel(left, right, config, certify))
    return pool


def dual_modular_propinquity_ub(
    left: MQVB,
    right: MQVB,
    candidates: Sequence[ModularTunnel] = (),
    config: Optional[SolverConfig] = None,
    certify: bool = True,
) -> Estimate:
    """
    min figure；相同 figure 时取复合级数较少者

    结果总不超过 max{2, diam 𝔄, diam 𝔅}。

    Raises:
        PreconditionError: 有候选不连接 left 与 right
    """
    pool = modular_candidate_pool(left, right, candidates, config, certify)
    best = min(pool, key=lambda t: (t.figure, t.stages))
    fallback = bool(best.notes.get("fallback", False))
    logger.info(
        f"模邻近度上界 left={left.name} right={right.name} value={best.figure:.6g} "
        f"tunnel={best.name} candidates={len(pool)} fallback={fallback}"
    )
    return Estimate(
        best.figure,
        BoundKind.UPPER,
        metadata={
            "tunnel": best.name,
            "stages": best.stages,
            "candidates": len(pool),
            "fallback": fallback,
        },
    )


def base_modular_consistency(
    left: MQVB,
    right: MQVB,
    candidates: Sequence[ModularTunnel],
    config: Optional[SolverConfig] = None,
    tol: float = 1e-9,
) -> CheckReport:
    """底空间的邻近度上界不超过同一批候选（含回退隧道）给出的模邻近度上界"""
    pool = modular_candidate_pool(left, right, candidates, config, certify=False)
    modular = dual_modular_propinquity_ub(left, right, pool, config, certify=False)
    base = propinquity_ub(left.base, right.base, [t.base for t in pool])
    margin = modular.value + tol - base.value
    return CheckReport(
        f"base_consistency[{left.name},{right.name}]",
        margin >= 0,
        margin,
        len(pool),
        details={"base": base.value, "modular": modular.value},
    )
