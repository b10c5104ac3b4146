"""
由隧道构造自由模之间的模隧道

给定 F-隧道 τ = (𝔇, L_𝔇, π_𝔄, π_𝔅)，extent 上界 λ，秩 p：
枢纽模 𝒫 = 𝔄^p ⊕ 𝔇^p ⊕ 𝔅^p，底代数 𝔈 = 𝔄 ⊕ 𝔇 ⊕ 𝔅，

    γ = √(1 + 4p·F(1+2λ, 1+2λ, 1, 1)·λ)，c = γ/(γ − 1)
    D(ω, η, ζ) = max{D_𝔄^p(ω), D_𝔇^p(η), D_𝔅^p(ζ), c‖ω − π_𝔄^p(η)‖, c‖ζ − π_𝔅^p(η)‖}
    L(a, d, b) = max{L_𝔄(a), L_𝔇(d), L_𝔅(b), c‖a − π_𝔄(d)‖, c‖b − π_𝔅(d)‖}

extent 上界为 2(γ − 1)/γ + λ，H(x, y) = max{8p·F(x, y, x, y), 2p·x²y²}。
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from loguru import logger

from proplab.algebra.morphisms import coordinate_projection
from proplab.bundles.bundle import DNorm, MQVB, qvba
from proplab.bundles.module import ModularMorphism, direct_sum_module, lift
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError, StructuralError
from proplab.modular.tunnel import (
    ISOMETRY_SAMPLES,
    PIVOT_SAMPLES,
    ModularTunnel,
    identity_modular_tunnel,
)
from proplab.qcms.space import QCMS
from proplab.qcms.tunnel import Tunnel
from proplab.seminorms.atoms import atoms_from_map, combine_max
from proplab.seminorms.permissible import FFunc, free_module_triple

BASE_SAMPLES = 48


def free_gamma(lam: float, p: int, F: FFunc) -> float:
    return math.sqrt(1.0 + 4.0 * p * F(1 + 2 * lam, 1 + 2 * lam, 1.0, 1.0) * lam)


def free_tunnel_figure(lam: float, p: int, F: FFunc) -> float:
    """2(γ − 1)/γ + λ"""
    gamma = free_gamma(lam, p, F)
    return 2.0 * (gamma - 1.0) / gamma + lam


def _selector(offset: int, size: int, total: int) -> np.ndarray:
    m = np.zeros((size, total))
    m[:, offset : offset + size] = np.eye(size)
    return m


def free_module_tunnel(
    tunnel: Tunnel,
    p: int = 1,
    domain: Optional[MQVB] = None,
    codomain: Optional[MQVB] = None,
    config: Optional[SolverConfig] = None,
    certify: bool = True,
    sample_count: int = ISOMETRY_SAMPLES,
    pivot_samples: int = PIVOT_SAMPLES,
) -> ModularTunnel:
    """
    Args:
        tunnel: 底空间之间的隧道，λ 取其 figure
        p: 自由模的秩
        domain: 起点丛，缺省为 qvba(tunnel.domain, p)
        codomain: 终点丛，缺省为 qvba(tunnel.codomain, p)
        config: 求解配置
        certify: 是否校验枢纽与两条腿
        sample_count: 腿校验的样本数
        pivot_samples: 枢纽校验的样本数

    Raises:
        PreconditionError: p < 1，或 λ = 0 而两端的底空间不同
        StructuralError: 给定的丛不是两端空间上的秩 p 自由模
    """
    if p < 1:
        raise PreconditionError("自由模的秩必须至少为 1", details={"p": p})
    config = config or SolverConfig()
    domain = domain or qvba(tunnel.domain, p, validate=False)
    codomain = codomain or qvba(tunnel.codomain, p, validate=False)
    for bundle, space in ((domain, tunnel.domain), (codomain, tunnel.codomain)):
        if not bundle.base.same_as(space) or bundle.module.uniform_rank != p:
            raise StructuralError(
                "丛与隧道端点或秩不一致",
                details={"bundle": bundle.name, "space": space.name, "p": p},
            )
    lam = tunnel.figure
    if lam == 0.0:
        if not domain.same_as(codomain):
            raise PreconditionError(
                "λ = 0 时只能连接相同的丛",
                details={"domain": domain.name, "codomain": codomain.name},
            )
        return identity_modular_tunnel(domain)

    gamma = free_gamma(lam, p, tunnel.domain.triple.F)
    c = gamma / (gamma - 1.0)
    figure = 2.0 * (gamma - 1.0) / gamma + lam

    # 底隧道：𝔈 = 𝔄 ⊕ 𝔇 ⊕ 𝔅
    a_shape, d_shape, b_shape = tunnel.domain.shape, tunnel.pivot.shape, tunnel.codomain.shape
    e_shape = a_shape.concat(d_shape).concat(b_shape)
    ka, kd = a_shape.num_blocks, d_shape.num_blocks
    na, nd, nb = a_shape.real_dim, d_shape.real_dim, b_shape.real_dim
    total = na + nd + nb
    sel_a = _selector(0, na, total)
    sel_d = _selector(na, nd, total)
    sel_b = _selector(na + nd, nb, total)
    pi_a, pi_b = tunnel.leg_domain.matrix, tunnel.leg_codomain.matrix

    def left_gap(v: np.ndarray) -> list[np.ndarray]:
        return list(a_shape.from_coords(sel_a @ v - pi_a @ (sel_d @ v)).blocks)

    def right_gap(v: np.ndarray) -> list[np.ndarray]:
        return list(b_shape.from_coords(sel_b @ v - pi_b @ (sel_d @ v)).blocks)

    lip = combine_max(
        [
            tunnel.domain.lip.compose(sel_a),
            tunnel.pivot.lip.compose(sel_d),
            tunnel.codomain.lip.compose(sel_b),
            atoms_from_map(total, left_gap, name="‖a−π(d)‖", weight=c),
            atoms_from_map(total, right_gap, name="‖b−π(d)‖", weight=c),
        ],
        name=f"L[free:{tunnel.name}]",
    )
    e_space = QCMS(
        e_shape,
        lip,
        tunnel.pivot.triple,
        name=f"E[{tunnel.name}]",
        validate=certify,
        sample_count=BASE_SAMPLES,
    )
    theta_a = coordinate_projection(e_shape, a_shape, range(ka), name="θ_𝔄")
    theta_b = coordinate_projection(
        e_shape, b_shape, range(ka + kd, e_shape.num_blocks), name="θ_𝔅"
    )
    base = Tunnel(
        e_space,
        tunnel.domain,
        tunnel.codomain,
        theta_a,
        theta_b,
        figure,
        name=f"free-base[{tunnel.name}]",
        stages=tunnel.stages,
        certify=certify,
        config=config,
    )

    # 枢纽模：𝒫 = 𝔄^p ⊕ 𝔇^p ⊕ 𝔅^p
    middle = qvba(tunnel.pivot, p, validate=False)
    am, dm, bm = domain.module, middle.module, codomain.module
    module = direct_sum_module(direct_sum_module(am, dm), bm, name=f"P[{tunnel.name},p={p}]")
    ma = _selector(0, am.dim, module.dim)
    md = _selector(am.dim, dm.dim, module.dim)
    mb = _selector(am.dim + dm.dim, bm.dim, module.dim)
    lift_a = lift(tunnel.leg_domain, dm, am, name="π_𝔄^p").matrix
    lift_b = lift(tunnel.leg_codomain, dm, bm, name="π_𝔅^p").matrix
    seminorm = combine_max(
        [
            domain.dnorm.seminorm.compose(ma),
            middle.dnorm.seminorm.compose(md),
            codomain.dnorm.seminorm.compose(mb),
            (am.norm_seminorm.compose(ma - lift_a @ md), c),
            (bm.norm_seminorm.compose(mb - lift_b @ md), c),
        ],
        name=f"D[free:{tunnel.name},p={p}]",
    ).with_solver(config)
    pivot = MQVB(
        module,
        DNorm(seminorm, module, name=seminorm.name),
        e_space,
        free_module_triple(tunnel.domain.triple, p),
        name=f"pivot[free:{tunnel.name}]",
        validate=certify,
        sample_count=pivot_samples,
    )
    result = ModularTunnel(
        pivot,
        domain,
        codomain,
        ModularMorphism(module, am, theta_a, ma, name="Θ_𝔄", validate=certify),
        ModularMorphism(module, bm, theta_b, mb, name="Θ_𝔅", validate=certify),
        base,
        figure,
        name=f"free[{tunnel.name},p={p}]",
        stages=tunnel.stages,
        certify=certify,
        config=config,
        sample_count=sample_count,
    )
    result.notes = {"lambda": lam, "gamma": gamma, "p": p}
    logger.info(
        f"自由模隧道 base={tunnel.name} p={p} lambda={lam:.6g} gamma={gamma:.6g} "
        f"figure={figure:.6g}"
    )
    return result
