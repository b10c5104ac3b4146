"""
度量化量子向量丛 (ℳ, ⟨·,·⟩, D, 𝔄, L)

D-范数是模坐标上的原子化半范数；以下确界定义的 D-范数（商范数）带辅助坐标，
求值即一次纤维最小化，结果按求值点缓存。
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from loguru import logger
from scipy.linalg import null_space

from proplab.algebra.shape import re_im
from proplab.bundles.module import HilbertModule, ModularMorphism, free_module
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError, StructuralError, ValidationError
from proplab.kernels.engine import fiber_infimum
from proplab.qcms.space import QCMS
from proplab.qcms.tunnel import quantum_isometry_check
from proplab.seminorms.atoms import AtomicSeminorm, combine_max
from proplab.seminorms.checks import CheckReport, merge_reports
from proplab.seminorms.permissible import PermissibleTriple, qvba_triple

DNORM_SAMPLES = 200
DNORM_TOL = 1e-8
ISOMETRY_SAMPLES = 8
ISOMETRY_TOL = 1e-6


@dataclass
class DNorm:
    """模上的 D-范数"""

    seminorm: AtomicSeminorm
    module: HilbertModule
    name: str = "D"

    def __post_init__(self) -> None:
        if self.seminorm.dim != self.module.dim:
            raise StructuralError(
                "D-范数维数与模不一致",
                details={
                    "module": self.module.name,
                    "expected": self.module.dim,
                    "got": self.seminorm.dim,
                },
            )

    @property
    def is_exact(self) -> bool:
        """不带隐变量时求值是闭式的"""
        return self.seminorm.aux_dim == 0

    def __call__(self, omega: np.ndarray) -> float:
        return self.seminorm(self.module._check(omega))

    def scaled(self, factor: float, name: str = "") -> "DNorm":
        return DNorm(self.seminorm.scaled(factor), self.module, name or f"{factor:g}·{self.name}")

    def with_solver(self, config: SolverConfig) -> "DNorm":
        return DNorm(self.seminorm.with_solver(config), self.module, self.name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "module": self.module.name,
            "atoms": self.seminorm.num_atoms,
            "hidden": self.seminorm.aux_dim,
        }


class MQVB:
    """度量化量子向量丛"""

    def __init__(
        self,
        module: HilbertModule,
        dnorm: DNorm,
        base: QCMS,
        triple: Optional[PermissibleTriple] = None,
        name: str = "",
        validate: bool = True,
        sample_count: int = DNORM_SAMPLES,
        seed: int = 0,
    ):
        if module.base != base.shape:
            raise StructuralError(
                "模的底代数与量子紧度量空间不一致",
                details={"module": module.base.label, "base": base.shape.label},
            )
        if not dnorm.module.same_as(module):
            raise StructuralError(
                "D-范数不属于该模",
                details={"module": module.name, "dnorm": dnorm.module.name},
            )
        self.module = module
        self.dnorm = dnorm
        self.base = base
        self.triple = triple or base.triple
        self.name = name or module.name
        self.report: Optional[CheckReport] = None
        if validate:
            self.report = dnorm_validate(self, sample_count, seed)
            if not self.report.passed:
                raise ValidationError(
                    "D-范数不满足度量化丛的条件",
                    details={"bundle": self.name, **self.report.details},
                    witnesses=self.report.witnesses,
                )

    def inner(self, omega: np.ndarray, eta: np.ndarray):
        return self.module.inner(omega, eta)

    def norm(self, omega: np.ndarray) -> float:
        return self.module.norm(omega)

    def d_norm(self, omega: np.ndarray) -> float:
        return self.dnorm(omega)

    def same_as(self, other: "MQVB") -> bool:
        return self is other or (self.name == other.name and self.module.same_as(other.module))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "module": self.module.to_dict(),
            "dnorm": self.dnorm.to_dict(),
            "base": self.base.name,
            "triple": self.triple.name,
            "report": self.report.to_dict() if self.report else None,
        }

    def __repr__(self) -> str:
        return f"MQVB(name={self.name}, module={self.module.label}, base={self.base.name})"


# ------------------------------------------------------------------
# 基本运算
# ------------------------------------------------------------------


def inner_product(module: HilbertModule, omega: np.ndarray, eta: np.ndarray):
    return module.inner(omega, eta)


def module_norm(module: HilbertModule, omega: np.ndarray) -> float:
    return module.norm(omega)


def component_maps(module: HilbertModule) -> list[tuple[np.ndarray, np.ndarray]]:
    """每个分量 b_j 的 (Re b_j, Im b_j) 坐标矩阵，按槽依次排列"""
    maps = []
    for s, slot in enumerate(module.slots):
        for j in range(slot.rank):
            re_map, im_map = (
                module._tabulate(
                    lambda v: re_im(module.components(v)[s][j])[which].coords(),
                    slot.shape.real_dim,
                )
                for which in (0, 1)
            )
            maps.append((re_map, im_map))
    return maps


def qvba(space: QCMS, p: int = 1, name: str = "", validate: bool = True) -> MQVB:
    """
    自由模 X^p 上的典范丛

    D(b) = max{‖b‖, L(Re b_j), L(Im b_j)}，其中 ‖b‖ 取模范数（p = 1 时即 ‖b₁‖），
    内积 Σ b_j c_j*，H(x, y) = 8p·F(x, y, x, y)。
    """
    if p < 1:
        raise PreconditionError("自由模的秩必须至少为 1", details={"p": p})
    module = free_module(space.shape, p, name=name or f"{space.name}^{p}")
    parts: list[AtomicSeminorm] = [module.norm_seminorm]
    for re_map, im_map in component_maps(module):
        parts.append(space.lip.compose(re_map))
        parts.append(space.lip.compose(im_map))
    seminorm = combine_max(parts, name=f"D^{p}[{space.name}]")
    dnorm = DNorm(seminorm, module, name=seminorm.name)
    bundle = MQVB(
        module, dnorm, space, qvba_triple(space.triple, p), name=module.name, validate=validate
    )
    logger.info(f"构造典范丛 space={space.name} p={p} dim={module.dim}")
    return bundle


# ------------------------------------------------------------------
# 校验
# ------------------------------------------------------------------


def sample_module_element(module: HilbertModule, rng: np.random.Generator) -> np.ndarray:
    """混合尺度的随机模元素：纯随机与单位附近的小扰动交替出现"""
    omega = module.random_element(rng, scale=float(rng.uniform(0.1, 2.0)))
    if int(rng.integers(0, 2)):
        omega = module.unit_element() * float(rng.normal(scale=2.0)) + 0.1 * omega
    return omega


def scale_to_unit_ball(bundle: MQVB, omega: Optional[np.ndarray] = None) -> np.ndarray:
    """
    ω / D(ω)，缺省取单位元；结果落在 D-单位球面上

    Raises:
        PreconditionError: D(ω) = 0
    """
    omega = bundle.module.unit_element() if omega is None else np.asarray(omega, dtype=float)
    value = bundle.d_norm(omega)
    if value <= 0.0:
        raise PreconditionError("零元素不能归一化", details={"bundle": bundle.name})
    return omega / value


def dnorm_validate(
    bundle: MQVB,
    sample_count: int = DNORM_SAMPLES,
    seed: int = 0,
    tol: float = DNORM_TOL,
) -> CheckReport:
    """
    抽样检查 D ≥ ‖·‖、D(0) = 0、Cauchy-Schwarz 与内积拟 Leibniz 不等式

    失败只写入报告，不抛异常。
    """
    module, lip, h = bundle.module, bundle.base.lip, bundle.triple.H
    rng = np.random.default_rng(seed)
    lower, cauchy, leibniz = float("inf"), float("inf"), float("inf")
    witnesses: list[dict[str, Any]] = []
    for _ in range(sample_count):
        omega = sample_module_element(module, rng)
        eta = sample_module_element(module, rng)
        d_omega, d_eta = bundle.d_norm(omega), bundle.d_norm(eta)
        n_omega, n_eta = module.norm(omega), module.norm(eta)
        margin = (d_omega - n_omega) / max(1.0, n_omega)
        if margin < lower:
            lower = margin
            if margin < -tol:
                witnesses.append({"check": "lower_bound", "D": d_omega, "norm": n_omega})
        pairing = module.inner(omega, eta)
        cs = n_omega * n_eta
        cauchy = min(cauchy, (cs - pairing.norm()) / max(1.0, cs))
        re, im = re_im(pairing)
        lhs = max(lip(re.coords()), lip(im.coords()))
        rhs = h(d_omega, d_eta)
        margin = (rhs - lhs) / max(1.0, abs(rhs))
        if margin < leibniz:
            leibniz = margin
            if margin < -tol:
                witnesses.append({"check": "inner_leibniz", "lhs": lhs, "rhs": rhs})
    zero = -bundle.d_norm(module.zero_element())
    reports = [
        CheckReport("lower_bound", lower >= -tol, lower, sample_count),
        CheckReport("zero", zero >= -tol, zero, 1),
        CheckReport("cauchy_schwarz", cauchy >= -tol, cauchy, sample_count),
        CheckReport("inner_leibniz", leibniz >= -tol, leibniz, sample_count),
    ]
    report = merge_reports(f"dnorm[{bundle.name}]", reports)
    report.witnesses = witnesses[-5:]
    if not report.passed:
        logger.warning(f"D-范数校验失败 bundle={bundle.name} worst={report.worst_margin:.3e}")
    return report


def modular_isometry_check(
    morphism: ModularMorphism,
    source: MQVB,
    target: MQVB,
    sample_count: int = ISOMETRY_SAMPLES,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    tol: float = ISOMETRY_TOL,
    check_base: bool = True,
) -> CheckReport:
    """
    抽样检查 D_target(ω) = inf{D_source(η) : Θ(η) = ω}

    check_base 为真时同时检查 θ 是底空间之间的量子等距，两份报告合并。

    Raises:
        NonSurjectiveError: Θ 不是满射
        StructuralError: 态射与丛不匹配
    """
    if not morphism.source.same_as(source.module) or not morphism.target.same_as(target.module):
        raise StructuralError(
            "模态射与丛不匹配",
            details={"morphism": morphism.name, "source": source.name, "target": target.name},
        )
    morphism.require_surjective()
    config = config or SolverConfig()
    rng = np.random.default_rng(seed)
    worst, witnesses, iterations = float("inf"), [], 0
    for _ in range(sample_count):
        omega = sample_module_element(target.module, rng)
        expected = target.d_norm(omega)
        est = fiber_infimum(source.dnorm.seminorm, morphism.matrix, omega, config)
        iterations += est.iterations
        slack = tol * max(1.0, expected) + est.tol
        margin = slack - abs(est.value - expected)
        worst = min(worst, margin)
        if margin < 0:
            witnesses.append({"fiber": est.value, "target": expected})
    report = CheckReport(
        f"modular_isometry[{morphism.name}]",
        worst >= 0,
        worst,
        sample_count,
        witnesses[-5:],
        {"iterations": iterations},
    )
    if check_base:
        base = quantum_isometry_check(
            morphism.theta, source.base, target.base, seed=seed, config=config
        )
        report = merge_reports(report.name, [report, base])
    if not report.passed:
        logger.warning(f"模等距校验失败 morphism={morphism.name} worst={report.worst_margin:.3e}")
    return report


def quotient_dnorm(
    morphism: ModularMorphism,
    dnorm: DNorm,
    name: str = "",
    config: Optional[SolverConfig] = None,
    base: Optional[tuple[QCMS, QCMS]] = None,
) -> DNorm:
    """
    商 D-范数 D′(ω) = inf{D(η) : Θ(η) = ω}

    以 Θ 的伪逆 V 与零空间 N 写成 ω ↦ inf_z D(Vω + Nz)；
    给出 base = (源空间, 目标空间) 时先确认 θ 是量子等距。

    Raises:
        NonSurjectiveError: Θ 不是满射
        PreconditionError: θ 不是量子等距
    """
    if not dnorm.module.same_as(morphism.source):
        raise StructuralError(
            "D-范数与模态射的源不一致",
            details={"dnorm": dnorm.module.name, "source": morphism.source.name},
        )
    morphism.require_surjective()
    if base is not None:
        report = quantum_isometry_check(morphism.theta, base[0], base[1], config=config)
        if not report.passed:
            raise PreconditionError(
                "θ 不是量子等距，商 D-范数没有意义",
                details={"theta": morphism.theta.name, "worst": report.worst_margin},
            )
    visible = np.linalg.pinv(morphism.matrix)
    hidden = null_space(morphism.matrix, rcond=1e-10)
    label = name or f"{dnorm.name}/{morphism.name}"
    seminorm = dnorm.seminorm.with_hidden(visible, hidden, name=label)
    if config is not None:
        seminorm = seminorm.with_solver(config)
    logger.debug(f"商 D-范数 name={label} hidden={hidden.shape[1]}")
    return DNorm(seminorm, morphism.target, name=label)
