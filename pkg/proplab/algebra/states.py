"""
态（密度矩阵）

φ(a) = Σ_k trace(ρ_k a_k)。对厄米的 ρ，实线性泛函 a ↦ Re φ(a) 在实坐标下
恰为 coords(ρ)，因此态、拉回与 Monge-Kantorovich 目标泛函都以向量处理。
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraElement, AlgebraShape
from proplab.exceptions import StructuralError, UnsupportedModeError, ValidationError

PSD_TOL = 1e-10
TRACE_TOL = 1e-10


class State:
    """代数上的态"""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks: Sequence[np.ndarray], validate: bool = True):
        element = AlgebraElement(shape, blocks)
        self.shape = shape
        self.blocks = element.blocks
        if validate:
            self._validate()

    def _validate(self) -> None:
        total = 0.0
        for k, rho in enumerate(self.blocks):
            if np.max(np.abs(rho - rho.conj().T), initial=0.0) > PSD_TOL:
                raise ValidationError("密度矩阵不是厄米矩阵", details={"block": k})
            low = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
            if low < -PSD_TOL:
                raise ValidationError(
                    "密度矩阵不是半正定的", details={"block": k, "min_eig": low}
                )
            total += float(np.trace(rho).real)
        if abs(total - 1.0) > TRACE_TOL:
            raise ValidationError("态的迹不为 1", details={"trace": total})

    # ------------------------------------------------------------------
    # 求值与泛函
    # ------------------------------------------------------------------

    def __call__(self, a: AlgebraElement) -> complex:
        return state_eval(self, a)

    def functional(self) -> np.ndarray:
        """实坐标上的泛函向量 c，满足 c·coords(a) = Re φ(a)"""
        return self.density().coords()

    def sa_functional(self) -> np.ndarray:
        """自伴坐标上的泛函向量"""
        return self.density().sa_coords()

    def density(self) -> AlgebraElement:
        return AlgebraElement(self.shape, self.blocks)

    @classmethod
    def from_functional(cls, shape: AlgebraShape, vector: np.ndarray) -> "State":
        """由实坐标泛函恢复密度矩阵（泛函须为正、单位化）"""
        rho = shape.from_coords(np.asarray(vector, dtype=float))
        herm = [(b + b.conj().T) / 2 for b in rho.blocks]
        return cls(shape, herm)

    @classmethod
    def from_sa_functional(cls, shape: AlgebraShape, vector: np.ndarray) -> "State":
        return cls(shape, shape.from_sa_coords(np.asarray(vector, dtype=float)).blocks)

    @classmethod
    def point_mass(cls, shape: AlgebraShape, index: int) -> "State":
        if not shape.is_commutative:
            raise UnsupportedModeError(
                "点质量态仅适用于交换代数", details={"shape": shape.label}
            )
        if not 0 <= index < shape.num_blocks:
            raise StructuralError("点索引越界", details={"index": index, "K": shape.num_blocks})
        blocks = [np.zeros((1, 1), dtype=complex) for _ in shape.block_dims]
        blocks[index][0, 0] = 1.0
        return cls(shape, blocks)

    @classmethod
    def vector_state(cls, shape: AlgebraShape, block: int, vector: np.ndarray) -> "State":
        """块 block 上由单位向量给出的纯态"""
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        blocks = [np.zeros((n, n), dtype=complex) for n in shape.block_dims]
        blocks[block] = np.outer(v, v.conj())
        return cls(shape, blocks)

    @classmethod
    def probability(cls, shape: AlgebraShape, weights: Sequence[float]) -> "State":
        """交换代数上的概率向量"""
        if not shape.is_commutative:
            raise UnsupportedModeError("概率向量态仅适用于交换代数", details={"shape": shape.label})
        w = np.asarray(weights, dtype=float)
        if w.shape != (shape.num_blocks,):
            raise StructuralError("概率向量长度不匹配", details={"K": shape.num_blocks})
        return cls(shape, [np.array([[x]], dtype=complex) for x in w])

    @classmethod
    def tracial(cls, shape: AlgebraShape) -> "State":
        """归一化迹"""
        total = sum(shape.block_dims)
        return cls(shape, [np.eye(n, dtype=complex) / total for n in shape.block_dims])

    def weights(self) -> np.ndarray:
        """交换情形的概率向量"""
        if not self.shape.is_commutative:
            raise UnsupportedModeError("weights 仅适用于交换代数", details={"shape": self.shape.label})
        return np.array([b[0, 0].real for b in self.blocks])

    def __repr__(self) -> str:
        return f"State(shape={self.shape.label})"


def state_eval(phi: State, a: AlgebraElement) -> complex:
    """φ(a) = Σ_k trace(ρ_k a_k)"""
    if phi.shape != a.shape:
        raise StructuralError(
            "态与元素的代数不一致",
            details={"state": phi.shape.label, "element": a.shape.label},
        )
    return complex(sum(np.trace(r @ b) for r, b in zip(phi.blocks, a.blocks)))


def mixture(states: Sequence[State], weights: Sequence[float]) -> State:
    """态的凸组合"""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    shape = states[0].shape
    blocks = [sum(wi * s.blocks[k] for wi, s in zip(w, states)) for k in range(shape.num_blocks)]
    return State(shape, blocks)


def pure_states(shape: AlgebraShape) -> list[State]:
    """交换代数的全部纯态（K 个点质量）"""
    if not shape.is_commutative:
        raise UnsupportedModeError(
            "非交换代数的纯态不能有限枚举", details={"shape": shape.label}
        )
    return [State.point_mass(shape, j) for j in range(shape.num_blocks)]


def random_pure_state(shape: AlgebraShape, rng: np.random.Generator) -> State:
    dims = np.array(shape.block_dims, dtype=float)
    block = int(rng.choice(shape.num_blocks, p=dims / dims.sum()))
    n = shape.block_dims[block]
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return State.vector_state(shape, block, v)


def sample_states(shape: AlgebraShape, count: int, seed: int = 0) -> list[State]:
    """
    采样态：随机秩一纯态与随机凸组合交替，同一种子结果相同

    Args:
        shape: 代数形状
        count: 数量（≥1）
        seed: 随机种子
    """
    if count < 1:
        raise ValidationError("采样数量必须 ≥ 1", details={"count": count})
    rng = np.random.default_rng(seed)
    out: list[State] = []
    for i in range(count):
        if i % 2 == 0:
            out.append(random_pure_state(shape, rng))
        else:
            parts = [random_pure_state(shape, rng) for _ in range(3)]
            out.append(mixture(parts, rng.dirichlet(np.ones(len(parts)))))
    return out


# ------------------------------------------------------------------
# 𝒮₁(𝔇|x)：满足 φ(dx) = φ(xd) = φ(d) 的态
# ------------------------------------------------------------------


def level_space(x: AlgebraElement, tol: float = 1e-8) -> list[np.ndarray]:
    """
    每块上 ker(x−1) ∩ ker(x*−1) 的正交基

    φ(dx)=φ(xd)=φ(d) 对全部 d 成立当且仅当 ρx = xρ = ρ，
    即 ρ 的值域落在 x 与 x* 的公共不动空间中。
    """
    bases = []
    for b in x.blocks:
        n = b.shape[0]
        stacked = np.vstack([b - np.eye(n), b.conj().T - np.eye(n)])
        _, s, vh = np.linalg.svd(stacked)
        rank = int(np.sum(s > tol))
        bases.append(vh[rank:].conj().T)
    return bases


def level_state(x: AlgebraElement, tol: float = 1e-8) -> Optional[State]:
    """𝒮₁(𝔇|x) 中的一个见证态（公共不动空间上的归一化投影），空时返回 None"""
    bases = level_space(x, tol)
    total = sum(w.shape[1] for w in bases)
    if total == 0:
        logger.debug(f"𝒮₁ 为空 shape={x.shape.label}")
        return None
    blocks = [w @ w.conj().T / total for w in bases]
    return State(x.shape, blocks)


def in_level_set(phi: State, x: AlgebraElement, tol: float = 1e-8) -> bool:
    """在矩阵单位上验证 φ(ax) = φ(xa) = φ(a)"""
    for _, _, _, e in x.shape.matrix_units():
        base = phi(e)
        if abs(phi(e @ x) - base) > tol or abs(phi(x @ e) - base) > tol:
            return False
    return True
