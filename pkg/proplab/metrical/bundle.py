"""
度量量子向量丛 (ℳ, ⟨·,·⟩, D, 𝔄, L_𝔄, 𝔅′, L′)

在度量化丛 𝕄_♭ 之上再加一个由 𝔅′ 给出的可伴作用，并要求
D(bω) ≤ G(‖b‖, L′(b), D(ω))。另一种读法把第三个变量换成 ‖ω‖_ℳ，
它的余量只记录在报告里。
"""
from __future__ import annotations

from typing import Any, Optional, Union

import numpy as np
from loguru import logger

from proplab.bundles.bundle import MQVB, sample_module_element
from proplab.exceptions import StructuralError, ValidationError
from proplab.metrical.action import ActionFn, ModuleAction, action_check
from proplab.qcms.space import QCMS
from proplab.seminorms.checks import CheckReport, merge_reports, sample_self_adjoint
from proplab.seminorms.permissible import PermissibleTriple

G_SAMPLES = 48
G_TOL = 1e-8


class MetricalQVB:
    """度量量子向量丛"""

    def __init__(
        self,
        bundle: MQVB,
        action: ModuleAction,
        triple: Optional[PermissibleTriple] = None,
        name: str = "",
        validate: bool = True,
        sample_count: int = G_SAMPLES,
        seed: int = 0,
    ):
        if not action.module.same_as(bundle.module):
            raise StructuralError(
                "作用的模与丛的模不一致",
                details={"bundle": bundle.name, "action": action.name},
            )
        self.bundle = bundle
        self.action = action
        self.triple = triple or bundle.triple
        self.name = name or f"{bundle.name}⟲{action.acting.name}"
        self.report: Optional[CheckReport] = None
        if validate:
            self.report = self.validate(sample_count, seed)
            if not self.report.passed:
                raise ValidationError(
                    "作用不满足度量丛的条件",
                    details={"bundle": self.name, **self.report.details},
                    witnesses=self.report.witnesses,
                )

    @property
    def flat(self) -> MQVB:
        """𝕄_♭：忘掉作用后的度量化丛"""
        return self.bundle

    @property
    def alt(self) -> QCMS:
        """作用在模上的空间 (𝔅′, L′)"""
        return self.action.acting

    @property
    def module(self):
        return self.bundle.module

    @property
    def base(self) -> QCMS:
        return self.bundle.base

    def d_norm(self, omega: np.ndarray) -> float:
        return self.bundle.d_norm(omega)

    def validate(self, sample_count: int = G_SAMPLES, seed: int = 0) -> CheckReport:
        reports = [
            action_check(self.action, sample_count, seed),
            g_condition_check(self, sample_count, seed + 1),
        ]
        return merge_reports(f"metrical[{self.name}]", reports)

    def same_as(self, other: "MetricalQVB") -> bool:
        return self is other or (
            self.name == other.name
            and self.bundle.same_as(other.bundle)
            and self.alt.same_as(other.alt)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "bundle": self.bundle.to_dict(),
            "action": self.action.to_dict(),
            "triple": self.triple.name,
            "report": self.report.to_dict() if self.report else None,
        }

    def __repr__(self) -> str:
        return f"MetricalQVB(name={self.name}, acting={self.alt.name})"


def g_condition_check(
    metrical: MetricalQVB,
    sample_count: int = G_SAMPLES,
    seed: int = 0,
    tol: float = G_TOL,
) -> CheckReport:
    """
    抽样检查 D(bω) ≤ G(‖b‖, L′(b), D(ω))，b 为自伴元

    details 里同时给出 ‖ω‖_ℳ 读法的最差余量（norm_reading），不参与判定。
    """
    module, acting, g = metrical.module, metrical.alt, metrical.triple.G
    rng = np.random.default_rng(seed)
    worst, norm_worst = float("inf"), float("inf")
    witnesses: list[dict[str, Any]] = []
    for _ in range(sample_count):
        b = sample_self_adjoint(acting.shape, rng)
        omega = sample_module_element(module, rng)
        lhs = metrical.d_norm(metrical.action.apply(b, omega))
        b_norm, b_lip = b.norm(), acting.lip(b.coords())
        rhs = g(b_norm, b_lip, metrical.d_norm(omega))
        margin = (rhs - lhs) / max(1.0, abs(rhs))
        if margin < worst:
            worst = margin
            if margin < -tol:
                witnesses.append({"check": "g_condition", "lhs": lhs, "rhs": rhs})
        alt_rhs = g(b_norm, b_lip, module.norm(omega))
        norm_worst = min(norm_worst, (alt_rhs - lhs) / max(1.0, abs(alt_rhs)))
    passed = worst >= -tol
    if not passed:
        logger.warning(f"G 条件校验失败 bundle={metrical.name} worst={worst:.3e}")
    return CheckReport(
        f"g_condition[{metrical.name}]",
        passed,
        worst,
        sample_count,
        witnesses[-5:],
        {"dnorm_reading": worst, "norm_reading": norm_worst},
    )


def make_metrical(
    bundle: MQVB,
    acting: QCMS,
    action: Union[ModuleAction, ActionFn],
    triple: Optional[PermissibleTriple] = None,
    name: str = "",
    sample_count: int = G_SAMPLES,
    seed: int = 0,
) -> MetricalQVB:
    """
    由度量化丛、作用空间与作用构造度量丛

    action 可以是现成的 ModuleAction，也可以是实双线性函数 fn(b, ω)。
    显式给出的三元组先在网格上验证容许性。

    Raises:
        StructuralError: 作用的空间或模与参数不一致
        ValidationError: 作用不是可伴 *-态射，或 G 条件被违反
    """
    if not isinstance(action, ModuleAction):
        action = ModuleAction.tabulate(acting, bundle.module, action)
    if not action.acting.same_as(acting):
        raise StructuralError(
            "作用的空间与给定空间不一致",
            details={"action": action.name, "acting": acting.name},
        )
    if triple is not None:
        triple.validate()
    metrical = MetricalQVB(
        bundle, action, triple, name=name, sample_count=sample_count, seed=seed
    )
    logger.info(
        f"构造度量丛 name={metrical.name} acting={acting.name} module={bundle.module.label}"
    )
    return metrical
