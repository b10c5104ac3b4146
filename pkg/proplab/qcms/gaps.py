"""
态空间之间的单侧 Hausdorff 间隙

隧道的 extent 与桥的 height 都形如

    sup_{φ ∈ P} inf_{ψ ∈ Q} mk(φ, ψ) = sup_{L(f) ≤ 1} [φ(f) − sup_{ψ ∈ Q} ψ(f)]

其中 Q 是经 *-态射拉回的态集合。交换情形对每个纯态解一个 LP（精确）；
一般情形对抽样纯态在 L-球上做凹函数上升（下界）。
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraShape
from proplab.algebra.states import State, pure_states, random_pure_state
from proplab.config import SolverConfig
from proplab.kernels.engine import retraction_search
from proplab.kernels.estimate import BoundKind, Estimate
from proplab.kernels.hausdorff import hausdorff_gap
from proplab.kernels.lp import LinearProgram
from proplab.seminorms.atoms import AtomicSeminorm


def commutative_gap(
    lip_sa: AtomicSeminorm,
    matrix: np.ndarray,
    rows: Sequence[int],
    config: Optional[SolverConfig] = None,
    workers: int = 1,
) -> Estimate:
    """
    max_i sup{f_i − max_{y ∈ rows} (M f)_y : L(f) ≤ 1}

    Args:
        lip_sa: 源空间（交换）自伴坐标上的 Lip-范数，须为多面体型
        matrix: 源自伴坐标 → 目标点值的实矩阵
        rows: 参与最大值的目标点
        config: 求解配置
        workers: 并行线程数
    """
    config = config or SolverConfig()
    m = np.asarray(matrix, dtype=float)[list(rows)]
    n = lip_sa.dim

    def point(i: int) -> Estimate:
        lp = LinearProgram(f"gap[{i}]")
        f = lp.variables(n)
        s = lp.variables(1)
        lp.add_ub([(f, m), (s, -np.ones((m.shape[0], 1)))], np.zeros(m.shape[0]))
        lp.bound_seminorm(lip_sa, f, bound=1.0)
        obj = np.zeros(n)
        obj[i] = 1.0
        lp.set_objective([(f, obj), (s, -np.ones(1))], maximize=True)
        res = lp.solve(config.lp_method)
        if res.unbounded:
            return Estimate.infinity()
        if not res.ok:
            logger.warning(f"间隙 LP 失败 point={i} status={res.status}")
            return Estimate(float("nan"), BoundKind.APPROX, exhausted=True)
        return Estimate.exact(max(0.0, res.value), certificate=res.x[f])

    return hausdorff_gap(list(range(n)), point, exhaustive=True, workers=workers)


def _top_eigen(
    target: AlgebraShape, coords: np.ndarray, level: Optional[Sequence[np.ndarray]]
) -> tuple[float, np.ndarray]:
    """(λ_max, ρ)：压缩到 level 后的最大特征值及其秩一密度（目标实坐标中的泛函）"""
    blocks = target.from_coords(coords).blocks
    best, rho_block = -np.inf, None
    for k, b in enumerate(blocks):
        herm = (b + b.conj().T) / 2
        if level is not None:
            w = level[k]
            if w.shape[1] == 0:
                continue
            vals, vecs = np.linalg.eigh(w.conj().T @ herm @ w)
            vec = w @ vecs[:, -1]
        else:
            vals, vecs = np.linalg.eigh(herm)
            vec = vecs[:, -1]
        if vals[-1] > best:
            best, rho_block = float(vals[-1]), (k, vec)
    rho = [np.zeros((n, n), dtype=complex) for n in target.block_dims]
    k, vec = rho_block
    rho[k] = np.outer(vec, vec.conj())
    return best, target.element(rho).coords()


def state_gap(
    lip_sa: AtomicSeminorm,
    source: AlgebraShape,
    target: AlgebraShape,
    matrix: np.ndarray,
    states: Sequence[State],
    config: Optional[SolverConfig] = None,
    level: Optional[Sequence[np.ndarray]] = None,
    exhaustive: bool = False,
    workers: int = 1,
) -> Estimate:
    """
    对每个态 φ 求 sup{φ(f) − λ_max(C(M f)) : L(f) ≤ 1}，再取最大

    目标函数是凹的（线性减凸），上升得到的每个可行点都是下界。

    Args:
        lip_sa: 源空间自伴坐标上的 Lip-范数
        source: 源代数形状
        target: 目标代数形状
        matrix: 源自伴坐标 → 目标实坐标
        states: 源代数上的态样本
        config: 求解配置
        level: 目标各块上的压缩基（None 表示不压缩）
        exhaustive: 样本是否取遍纯态且问题精确
        workers: 并行线程数
    """
    config = config or SolverConfig()
    m = np.asarray(matrix, dtype=float)
    rng = config.rng(23)
    shared_starts = [source.random_self_adjoint(rng).sa_coords() for _ in range(2)]

    def one(phi: State) -> Estimate:
        c = phi.sa_functional()

        def objective(f: np.ndarray) -> float:
            lam, _ = _top_eigen(target, m @ f, level)
            return float(c @ f) - lam

        def gradient(f: np.ndarray) -> np.ndarray:
            _, rho = _top_eigen(target, m @ f, level)
            return c - m.T @ rho

        starts = [c.copy()] + shared_starts
        return retraction_search(objective, gradient, lip_sa, starts, config)

    est = hausdorff_gap(list(states), one, exhaustive=False, workers=workers)
    kind = BoundKind.LOWER if not exhaustive else est.kind
    return Estimate(
        max(0.0, est.value),
        kind,
        tol=est.tol,
        iterations=est.iterations,
        certificate=est.certificate,
        metadata=est.metadata,
    )


def pure_state_samples(shape: AlgebraShape, count: int, seed: int = 0) -> tuple[list[State], bool]:
    """交换情形返回全部纯态（穷举），否则返回抽样纯态"""
    if shape.is_commutative:
        return pure_states(shape), True
    rng = np.random.default_rng(seed)
    return [random_pure_state(shape, rng) for _ in range(count)], False
