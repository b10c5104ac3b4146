"""
模 Monge-Kantorovich 度量

K_D(ω, η) = sup{‖⟨ω − η, ζ⟩‖ : D(ζ) ≤ 1}

目标函数 ζ ↦ ‖⟨δ, ζ⟩‖ 是凸函数，在 D-球上求其最大值只能给出下界：
先在探针集合上筛选起点，再做带径向回缩的次梯度上升。
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraShape
from proplab.bundles.bundle import MQVB
from proplab.config import SolverConfig
from proplab.exceptions import UnsupportedModeError
from proplab.kernels.engine import retraction_search
from proplab.kernels.estimate import BoundKind, Estimate
from proplab.seminorms.atoms import AtomicSeminorm, atoms_from_map

CIRCLE_DIRECTIONS = 16
CIRCLE_TOL = 1e-9
FRAME_TOL = 1e-9


def pairing_seminorm(bundle: MQVB, delta: np.ndarray) -> AtomicSeminorm:
    """ζ ↦ ‖⟨δ, ζ⟩‖ 的原子形式（对 ζ 实线性）"""
    module = bundle.module
    return atoms_from_map(
        module.dim, lambda z: list(module.inner(delta, z).blocks), name="pairing"
    )


def circular_radius(bundle: MQVB) -> Optional[float]:
    """
    Free(ℂ, 1) 上 D = c·|·| 时返回 sup{|ζ| : D(ζ) ≤ 1} = 1/c，否则返回 None
    """
    module = bundle.module
    if len(module.slots) != 1:
        return None
    slot = module.slots[0]
    if slot.rank != 1 or slot.shape != AlgebraShape((1,)):
        return None
    angles = np.linspace(0.0, 2 * np.pi, CIRCLE_DIRECTIONS, endpoint=False)
    values = np.array([bundle.d_norm(np.array([np.cos(t), np.sin(t)])) for t in angles])
    if values.min() <= 0.0 or values.max() - values.min() > CIRCLE_TOL * values.max():
        return None
    return float(1.0 / values.mean())


def constant_frame(bundle: MQVB) -> Optional[np.ndarray]:
    """
    自由模 Free(A, p) 的常值截面 u·1（u ∈ ℂ^p）的实坐标基，形状 (dim, 2p)；
    非自由模返回 None
    """
    module = bundle.module
    if len(module.slots) != 1:
        return None
    slot = module.slots[0]
    columns = []
    for j in range(slot.rank):
        for c in (1.0, 1j):
            comps = [
                slot.shape.scalar(c) if k == j else slot.shape.zero() for k in range(slot.rank)
            ]
            columns.append(module.from_components([comps]))
    return np.column_stack(columns)


def frame_bound(seminorm: AtomicSeminorm, frame: np.ndarray) -> float:
    """
    sup{S(E u) : |u| ≤ 1} 的上界

    向量原子取实堆叠矩阵的谱范数（精确），矩阵原子以 Frobenius 范数放大，
    ℓ¹ 项取各行 2-范数之和。
    """
    best = 0.0
    for g in seminorm.groups:
        restricted = np.einsum("grcn,nk->grck", g.tensor, frame)
        for w, atom in zip(g.weights, restricted):
            flat = atom.reshape(-1, frame.shape[1])
            stacked = np.vstack([flat.real, flat.imag])
            best = max(best, float(w * np.linalg.norm(stacked, ord=2)))
    for term in seminorm.l1_terms:
        rows = term.matrix @ frame
        best = max(best, float(term.weight * np.linalg.norm(rows, axis=1).sum()))
    return best


def norm_is_kantorovich(bundle: MQVB, tol: float = FRAME_TOL) -> bool:
    """
    K_D(δ, 0) = ‖δ‖ 是否有证明

    K ≤ ‖·‖ 总成立（D ≥ ‖·‖）。另一方向取 ζ = u·1：
    秩一时只需 D(1) ≤ 1，此时 ⟨δ, 1⟩ = δ；交换底上需要 D(u·1) ≤ |u| 对所有 u 成立，
    逐点取 u 即得 ‖⟨δ, u·1⟩‖ = max_x |δ(x)| = ‖δ‖。
    """
    frame = constant_frame(bundle)
    if frame is None or bundle.dnorm.seminorm.aux_dim:
        return False
    slot = bundle.module.slots[0]
    if slot.rank == 1:
        return bundle.d_norm(bundle.module.unit_element()) <= 1.0 + tol
    if slot.shape.is_commutative:
        return frame_bound(bundle.dnorm.seminorm, frame) <= 1.0 + tol
    return False


def modular_probes(
    bundle: MQVB, delta: np.ndarray, config: Optional[SolverConfig] = None
) -> list[np.ndarray]:
    """
    上升法的起点：δ、i·δ、单位元、坐标基与随机样本回缩到 D-球后，
    按目标值取前 restarts 个
    """
    config = config or SolverConfig()
    module = bundle.module
    objective = pairing_seminorm(bundle, delta)
    i_delta = module.act(module.base.scalar(1j), delta)
    candidates = [delta, i_delta, module.unit_element()]
    candidates.extend(np.eye(module.dim))
    rng = config.rng(23)
    candidates.extend(module.random_element(rng) for _ in range(config.probes))
    scored = []
    for c in candidates:
        d = bundle.d_norm(c)
        if d <= 0.0:
            continue
        z = c / d
        scored.append((objective(z), z))
    scored.sort(key=lambda item: -item[0])
    return [z for _, z in scored[: config.restarts]]


def modular_mk(
    bundle: MQVB,
    omega: np.ndarray,
    eta: np.ndarray,
    config: Optional[SolverConfig] = None,
) -> Estimate:
    """
    模 Monge-Kantorovich 距离

    Free(ℂ,1) 上圆形 D-范数有闭式 |ω − η|/c（exact）；norm_is_kantorovich 成立时
    K 即模范数（exact）；一般情形为下界，
    metadata["upper"] 记录 Cauchy-Schwarz 上界 ‖ω − η‖。
    """
    config = config or SolverConfig()
    module = bundle.module
    delta = module._check(omega) - module._check(eta)
    upper = module.norm(delta)
    if upper == 0.0:
        return Estimate.exact(0.0, metadata={"method": "trivial", "upper": 0.0})
    radius = circular_radius(bundle)
    if radius is not None:
        return Estimate.exact(upper * radius, metadata={"method": "circular", "upper": upper})
    if norm_is_kantorovich(bundle):
        return Estimate.exact(upper, metadata={"method": "constant_frame", "upper": upper})
    objective = pairing_seminorm(bundle, delta)
    starts = modular_probes(bundle, delta, config)
    est = retraction_search(
        objective, objective.subgradient_total, bundle.dnorm.seminorm, starts, config
    )
    logger.debug(
        f"模 MK 距离 bundle={bundle.name} value={est.value:.6g} upper={upper:.6g} "
        f"iterations={est.iterations}"
    )
    return Estimate(
        est.value,
        BoundKind.LOWER,
        iterations=est.iterations,
        certificate=est.certificate,
        metadata={"method": "ascent", "upper": upper, "starts": len(starts)},
    )


# ------------------------------------------------------------------
# K 的原子形式
# ------------------------------------------------------------------


def kantorovich_seminorm(
    bundle: MQVB, config: Optional[SolverConfig] = None
) -> tuple[AtomicSeminorm, BoundKind]:
    """
    δ ↦ K_D(δ, 0) 的原子形式

    圆形情形与 norm_is_kantorovich 成立时精确；一般情形取探针集合 Z ⊂ {D ≤ 1} 上的 max_z ‖⟨δ, z⟩‖，是下界。
    """
    module = bundle.module
    radius = circular_radius(bundle)
    if radius is not None:
        return module.norm_seminorm.scaled(radius, name=f"K[{bundle.name}]"), BoundKind.EXACT
    if norm_is_kantorovich(bundle):
        return module.norm_seminorm, BoundKind.EXACT
    config = config or SolverConfig()
    unit = module.unit_element()
    candidates = [unit, module.act(module.base.scalar(1j), unit)]
    candidates.extend(np.eye(module.dim))
    rng = config.rng(29)
    candidates.extend(module.random_element(rng) for _ in range(config.probes))
    probes = []
    for c in candidates:
        d = bundle.d_norm(c)
        if d > 0.0:
            probes.append(c / d)

    def atoms(delta: np.ndarray) -> list[np.ndarray]:
        return [blk for z in probes for blk in module.inner(delta, z).blocks]

    seminorm = atoms_from_map(module.dim, atoms, name=f"K̃[{bundle.name}]")
    logger.debug(f"K 的探针下界 bundle={bundle.name} probes={len(probes)}")
    return seminorm, BoundKind.LOWER


def gauge_metric(bundle: MQVB) -> tuple[AtomicSeminorm, BoundKind]:
    """
    K_D(·, 0) 的精确原子形式，供规范集合 𝒟 使用

    Raises:
        UnsupportedModeError: 既非圆形，也无法证明 K 等于模范数
    """
    radius = circular_radius(bundle)
    if radius is not None:
        return (
            bundle.module.norm_seminorm.scaled(radius, name=f"K[{bundle.name}]"),
            BoundKind.EXACT,
        )
    if norm_is_kantorovich(bundle):
        return bundle.module.norm_seminorm, BoundKind.EXACT
    raise UnsupportedModeError(
        "K 只在圆形丛、D(1) ≤ 1 的秩一自由模或常值截面等距的交换底自由模上有精确原子形式",
        details={"bundle": bundle.name, "module": bundle.module.label},
    )
