"""
量子紧度量空间 (𝔄, L)

Lip-范数保存在完整实坐标上；自伴坐标上的限制 lip_sa 供 LP 与上升法使用。
交换情形可附带距离矩阵，Monge-Kantorovich 距离直接走 Wasserstein 线性规划。
"""
from __future__ import annotations

from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraShape
from proplab.algebra.states import State, pure_states, sample_states
from proplab.config import SolverConfig
from proplab.exceptions import StructuralError, ValidationError
from proplab.kernels.engine import retraction_search, support_function
from proplab.kernels.estimate import BoundKind, Estimate
from proplab.kernels.transport import wasserstein1
from proplab.seminorms.atoms import AtomicSeminorm
from proplab.seminorms.builders import (
    fuzzy_sphere_seminorm,
    lipschitz_seminorm,
    pauli_seminorm,
    validate_metric,
)
from proplab.seminorms.checks import CheckReport, kernel_check, merge_reports, quasi_leibniz_check
from proplab.seminorms.permissible import PermissibleTriple

CONSTRUCTION_SAMPLES = 200


class QCMS:
    """有限维量子紧度量空间"""

    def __init__(
        self,
        shape: AlgebraShape,
        lip: AtomicSeminorm,
        triple: Optional[PermissibleTriple] = None,
        name: str = "",
        metric: Optional[np.ndarray] = None,
        validate: bool = True,
        sample_count: int = CONSTRUCTION_SAMPLES,
        seed: int = 0,
    ):
        if lip.dim != shape.real_dim:
            raise StructuralError(
                "Lip-范数维数与代数不一致",
                details={"shape": shape.label, "expected": shape.real_dim, "got": lip.dim},
            )
        if metric is not None and not shape.is_commutative:
            raise StructuralError("只有交换空间可以附带距离矩阵", details={"shape": shape.label})
        self.shape = shape
        self.lip = lip
        self.triple = triple or PermissibleTriple.leibniz()
        self.name = name or lip.name
        self.metric = None if metric is None else validate_metric(metric)
        self.report: Optional[CheckReport] = None
        if validate:
            self.report = self.validate(sample_count, seed)
            if not self.report.passed:
                raise ValidationError(
                    "Lip-范数不满足量子紧度量空间的条件",
                    details={"space": self.name, **self.report.details},
                )

    # ------------------------------------------------------------------
    # 基本属性
    # ------------------------------------------------------------------

    @cached_property
    def lip_sa(self) -> AtomicSeminorm:
        """自伴坐标上的 Lip-范数"""
        return self.lip.compose(self.shape.sa_basis, name=f"{self.lip.name}|sa")

    @property
    def is_commutative(self) -> bool:
        return self.shape.is_commutative

    @property
    def key(self) -> tuple[str, tuple[int, ...]]:
        """端点比较使用的标识"""
        return self.name, self.shape.block_dims

    def same_as(self, other: "QCMS") -> bool:
        return self is other or self.key == other.key

    def validate(self, sample_count: int = CONSTRUCTION_SAMPLES, seed: int = 0) -> CheckReport:
        """核校验 + 拟 Leibniz 抽样校验"""
        kern = kernel_check(self.lip, self.shape)
        ql = quasi_leibniz_check(self.lip, self.triple.F, self.shape, sample_count, seed)
        report = merge_reports(f"qcms[{self.name}]", [kern, ql])
        logger.debug(f"QCMS 校验 name={self.name} passed={report.passed}")
        return report

    def __repr__(self) -> str:
        return f"QCMS(name={self.name}, shape={self.shape.label})"

    # ------------------------------------------------------------------
    # Monge-Kantorovich 距离与直径
    # ------------------------------------------------------------------

    def mk_distance(
        self, phi: State, psi: State, config: Optional[SolverConfig] = None
    ) -> Estimate:
        """sup{|φ(a) − ψ(a)| : L(a) ≤ 1}"""
        for s in (phi, psi):
            if s.shape != self.shape:
                raise StructuralError(
                    "态不属于该空间",
                    details={"space": self.shape.label, "state": s.shape.label},
                )
        if self.metric is not None:
            return wasserstein1(phi.weights(), psi.weights(), self.metric)
        c = phi.sa_functional() - psi.sa_functional()
        return support_function(self.lip_sa, c, config)

    def diameter(self, config: Optional[SolverConfig] = None) -> Estimate:
        """
        态空间的 MK 直径

        交换情形在纯态对上精确取最大；一般情形在 L-球上最大化谱宽度
        λ_max(a) − λ_min(a)，给出下界。
        """
        config = config or SolverConfig()
        if self.shape.is_commutative:
            points = pure_states(self.shape)
            if len(points) < 2:
                return Estimate.exact(0.0)
            if self.metric is not None:
                return Estimate.exact(float(self.metric.max()))
            best = Estimate.exact(0.0)
            for i in range(len(points)):
                for j in range(i + 1, len(points)):
                    est = self.mk_distance(points[i], points[j], config)
                    if est.value > best.value:
                        best = est
            return best
        shape = self.shape

        def spread(v: np.ndarray) -> float:
            blocks = shape.from_sa_coords(v).blocks
            eigs = np.concatenate([np.linalg.eigvalsh(b) for b in blocks])
            return float(eigs.max() - eigs.min())

        def spread_grad(v: np.ndarray) -> np.ndarray:
            blocks = shape.from_sa_coords(v).blocks
            top, bottom = (-np.inf, None), (np.inf, None)
            for k, b in enumerate(blocks):
                w, vecs = np.linalg.eigh(b)
                if w[-1] > top[0]:
                    top = (w[-1], (k, vecs[:, -1]))
                if w[0] < bottom[0]:
                    bottom = (w[0], (k, vecs[:, 0]))
            rho = [np.zeros((n, n), dtype=complex) for n in shape.block_dims]
            k, v1 = top[1]
            rho[k] = rho[k] + np.outer(v1, v1.conj())
            k, v0 = bottom[1]
            rho[k] = rho[k] - np.outer(v0, v0.conj())
            return shape.element(rho).sa_coords()

        rng = config.rng(11)
        starts = [shape.random_self_adjoint(rng).sa_coords() for _ in range(config.restarts)]
        est = retraction_search(spread, spread_grad, self.lip_sa, starts, config)
        return Estimate(
            est.value,
            BoundKind.LOWER,
            iterations=est.iterations,
            certificate=est.certificate,
            metadata={"method": "ascent"},
        )

    def sample_states(self, count: int, seed: int = 0) -> list[State]:
        return sample_states(self.shape, count, seed)


# ------------------------------------------------------------------
# 构造器
# ------------------------------------------------------------------


def metric_space(
    dist: np.ndarray, name: str = "", triple: Optional[PermissibleTriple] = None
) -> QCMS:
    """有限度量空间 (C(X), Lip_d)"""
    d = validate_metric(dist)
    n = d.shape[0]
    shape = AlgebraShape((1,) * n)
    lip = lipschitz_seminorm(d, name=name or f"Lip[{n}]")
    return QCMS(shape, lip, triple, name=name or f"metric[{n}]", metric=d)


def points_space(points: Sequence[float], name: str = "") -> QCMS:
    """实直线上的有限点集，距离为 |x − y|"""
    p = np.asarray(points, dtype=float).reshape(-1)
    return metric_space(np.abs(p[:, None] - p[None, :]), name=name)


def grid_space(level: int) -> QCMS:
    """[0,1] 的二进网格 {k/2ⁿ}，共 2ⁿ+1 个点"""
    if level < 0:
        raise StructuralError("网格层数必须非负", details={"level": level})
    return points_space(np.linspace(0.0, 1.0, 2**level + 1), name=f"grid[{level}]")


def one_point(name: str = "point") -> QCMS:
    return metric_space(np.zeros((1, 1)), name=name)


def matrix_space(kind: str = "pauli", n: int = 2, name: str = "") -> QCMS:
    """
    矩阵代数上的交换子 Lip-范数

    Args:
        kind: "pauli"（M₂，[σx,·] 与 [σz,·]）或 "fuzzy"（M_n 上的自旋生成元）
        n: fuzzy 情形的矩阵尺寸
        name: 名称
    """
    if kind == "pauli":
        return QCMS(AlgebraShape((2,)), pauli_seminorm(), name=name or "pauli")
    if kind == "fuzzy":
        return QCMS(AlgebraShape((n,)), fuzzy_sphere_seminorm(n), name=name or f"fuzzy[{n}]")
    raise StructuralError("未知的矩阵空间类型", details={"kind": kind})
