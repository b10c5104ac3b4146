"""
常用 Lip-范数的构造器

- lipschitz_seminorm：有限度量空间上的 Lipschitz 半范数（逐对原子）
- commutator_seminorm：max_i ‖[D_i, ρ(a)]‖，ρ 为块对角表示
- fuzzy_sphere_seminorm：M_n 上自旋 (n−1)/2 生成元的交换子半范数
- pauli_seminorm：M_2 上 max(‖[σx,a]‖, ‖[σz,a]‖)
"""
from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np
from loguru import logger

from proplab.algebra.morphisms import StarMorphism, identity_morphism
from proplab.algebra.shape import AlgebraShape
from proplab.exceptions import StructuralError, ValidationError
from proplab.seminorms.atoms import AtomGroup, AtomicSeminorm, atoms_from_map

METRIC_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def validate_metric(dist: np.ndarray, tol: float = METRIC_TOL) -> np.ndarray:
    """检查对称、零对角、非对角为正以及三角不等式，返回浮点矩阵"""
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError("距离矩阵必须是方阵", details={"shape": d.shape})
    n = d.shape[0]
    if n == 0:
        raise ValidationError("度量空间至少需要一个点")
    if not np.allclose(d, d.T, atol=tol):
        raise ValidationError("距离矩阵不对称")
    if np.any(np.abs(np.diag(d)) > tol):
        raise ValidationError("距离矩阵对角线必须为 0")
    off = d[~np.eye(n, dtype=bool)]
    if off.size and off.min() <= 0:
        raise ValidationError("不同点之间的距离必须为正", details={"min": float(off.min())})
    # d[i,k] ≤ d[i,j] + d[j,k]
    slack = d[:, None, :] - d[:, :, None] - d[None, :, :]
    worst = float(slack.max()) if n > 1 else 0.0
    if worst > tol * max(1.0, float(d.max())):
        i, j, k = np.unravel_index(int(np.argmax(slack)), slack.shape)
        raise ValidationError(
            "距离矩阵违反三角不等式",
            details={"excess": worst},
            witnesses=[(int(i), int(j), int(k))],
        )
    return d


def lipschitz_seminorm(dist: np.ndarray, name: str = "Lip") -> AtomicSeminorm:
    """
    L(f) = max_{x<y} |f(x) − f(y)| / d(x, y)

    作用在交换代数 ℂ^n 的完整实坐标上（复值函数取模）。

    Args:
        dist: n×n 距离矩阵
        name: 名称
    """
    d = validate_metric(dist)
    n = d.shape[0]
    shape = AlgebraShape((1,) * n)
    iu, ju = np.triu_indices(n, k=1)
    if iu.size == 0:
        return AtomicSeminorm(shape.real_dim, name=name)
    tensor = np.zeros((iu.size, 1, 1, shape.real_dim), dtype=complex)
    for p, (i, j) in enumerate(zip(iu, ju)):
        w = 1.0 / d[i, j]
        tensor[p, 0, 0, 2 * i] = w
        tensor[p, 0, 0, 2 * j] = -w
        tensor[p, 0, 0, 2 * i + 1] = 1j * w
        tensor[p, 0, 0, 2 * j + 1] = -1j * w
    logger.debug(f"Lipschitz 半范数 points={n} atoms={iu.size}")
    return AtomicSeminorm(shape.real_dim, [AtomGroup(tensor, np.ones(iu.size))], name=name)


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    pos = 0
    for b in blocks:
        m = b.shape[0]
        out[pos : pos + m, pos : pos + m] = b
        pos += m
    return out


def commutator_seminorm(
    shape: AlgebraShape,
    operators: Union[np.ndarray, Sequence[np.ndarray]],
    representation: Optional[StarMorphism] = None,
    name: str = "comm",
) -> AtomicSeminorm:
    """
    max_i ‖[D_i, ρ(a)]‖

    ρ(a) 取表示目标代数中的块对角矩阵；未给出表示时使用恒等表示。

    Args:
        shape: 代数形状
        operators: 单个自伴矩阵或其列表
        representation: 源为 shape 的 *-态射
        name: 名称
    """
    rep = representation or identity_morphism(shape)
    if rep.source != shape:
        raise StructuralError(
            "表示的源代数与给定形状不一致",
            details={"shape": shape.label, "source": rep.source.label},
        )
    if representation is not None and not rep.report.is_star_morphism:
        raise ValidationError("表示不是 *-态射", details={"name": rep.name})
    ops = [operators] if isinstance(operators, np.ndarray) and operators.ndim == 2 else operators
    mats = [np.asarray(op, dtype=complex) for op in ops]
    size = sum(rep.target.block_dims)
    for k, m in enumerate(mats):
        if m.shape != (size, size):
            raise StructuralError(
                "算子尺寸与表示空间不一致",
                details={"index": k, "expected": size, "got": m.shape},
            )
        if not np.allclose(m, m.conj().T, atol=1e-12):
            raise ValidationError("交换子半范数要求自伴算子", details={"index": k})

    def atoms(x: np.ndarray) -> list[np.ndarray]:
        rho = _block_diag(rep.target.from_coords(rep.matrix @ x).blocks)
        return [m @ rho - rho @ m for m in mats]

    return atoms_from_map(shape.real_dim, atoms, name=name)


def spin_generators(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """自旋 j=(n−1)/2 的不可约表示 (J_x, J_y, J_z)"""
    if n < 1:
        raise StructuralError("矩阵尺寸必须为正", details={"n": n})
    j = (n - 1) / 2.0
    m = j - np.arange(n)
    jz = np.diag(m).astype(complex)
    jp = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, jz


def fuzzy_sphere_seminorm(n: int, name: str = "") -> AtomicSeminorm:
    """M_n 上 max_i ‖[J_i, a]‖，表示不可约故核为 ℂ1"""
    shape = AlgebraShape((n,))
    return commutator_seminorm(shape, list(spin_generators(n)), name=name or f"fuzzy[{n}]")


def pauli_seminorm(name: str = "pauli") -> AtomicSeminorm:
    """M_2 上 max(‖[σx, a]‖, ‖[σz, a]‖)，直径 √2"""
    return commutator_seminorm(AlgebraShape((2,)), [PAULI_X, PAULI_Z], name=name)


def opnorm_seminorm(shape: AlgebraShape, name: str = "‖·‖") -> AtomicSeminorm:
    """C*-范数本身，作为组合 Lip-范数中的耦合原子"""

    def blocks(x: np.ndarray) -> list[np.ndarray]:
        return list(shape.from_coords(x).blocks)

    return atoms_from_map(shape.real_dim, blocks, name=name)
