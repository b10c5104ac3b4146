"""
第二个量子紧度量空间 𝔅′ 在 Hilbert 模上的作用

作用以张量 T 存储：T[k] 是 𝔅′ 第 k 个实坐标方向在模实坐标上的算子，
b ↦ Σ_k b_k T[k] 在实坐标上线性。有限维自由模上的可伴算子就是底代数上的
矩阵，因此这里不区分"可伴算子"与"模实坐标上的线性映射 + 抽样条件"。
"""
from __future__ import annotations

from typing import Any, Callable, Optional

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraElement
from proplab.bundles.bundle import MQVB, sample_module_element
from proplab.bundles.module import HilbertModule, direct_sum_module
from proplab.exceptions import PreconditionError, StructuralError
from proplab.qcms.space import QCMS, one_point
from proplab.seminorms.checks import CheckReport, merge_reports

ACTION_SAMPLES = 24
ACTION_TOL = 1e-8
SCALAR_NAME = "ℂ"

ActionFn = Callable[[AlgebraElement, np.ndarray], np.ndarray]


class ModuleAction:
    """𝔅′ → 可伴算子 的 *-态射"""

    def __init__(self, acting: QCMS, module: HilbertModule, tensor: np.ndarray, name: str = ""):
        t = np.asarray(tensor, dtype=float)
        expected = (acting.shape.real_dim, module.dim, module.dim)
        if t.shape != expected:
            raise StructuralError(
                "作用张量的形状与空间或模不一致",
                details={"expected": expected, "got": t.shape},
            )
        self.acting = acting
        self.module = module
        self.tensor = t
        self.name = name or f"act[{acting.name}↷{module.name}]"

    @classmethod
    def tabulate(
        cls, acting: QCMS, module: HilbertModule, fn: ActionFn, name: str = ""
    ) -> "ModuleAction":
        """在两组实坐标基上逐项求值 fn(b, ω)"""
        shape = acting.shape
        rows, dim = shape.real_dim, module.dim
        eye_b, eye_m = np.eye(rows), np.eye(dim)
        tensor = np.zeros((rows, dim, dim))
        for k in range(rows):
            b = shape.from_coords(eye_b[k])
            for i in range(dim):
                tensor[k, :, i] = np.asarray(fn(b, eye_m[i]), dtype=float)
        return cls(acting, module, tensor, name=name)

    def operator(self, b: AlgebraElement) -> np.ndarray:
        if b.shape != self.acting.shape:
            raise StructuralError(
                "元素不属于作用代数",
                details={"action": self.name, "got": b.shape.label},
            )
        return np.tensordot(b.coords(), self.tensor, axes=1)

    def apply(self, b: AlgebraElement, omega: np.ndarray) -> np.ndarray:
        return self.operator(b) @ np.asarray(omega, dtype=float)

    def __call__(self, b: AlgebraElement, omega: np.ndarray) -> np.ndarray:
        return self.apply(b, omega)

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "acting": self.acting.name, "module": self.module.label}

    def __repr__(self) -> str:
        return f"ModuleAction(name={self.name})"


# ------------------------------------------------------------------
# 常用作用
# ------------------------------------------------------------------


def scalar_space() -> QCMS:
    """ℂ，L′ = 0"""
    return one_point(SCALAR_NAME)


def scalar_action(module: HilbertModule, acting: Optional[QCMS] = None) -> ModuleAction:
    """ℂ 按标量乘法作用"""
    acting = acting or scalar_space()
    if acting.shape.block_dims != (1,):
        raise PreconditionError("标量作用需要单点空间", details={"acting": acting.name})
    base = module.base

    def act(b: AlgebraElement, omega: np.ndarray) -> np.ndarray:
        return module.act(base.scalar(complex(b.blocks[0][0, 0])), omega)

    return ModuleAction.tabulate(acting, module, act, name=f"scalar[{module.name}]")


def base_multiplication_action(bundle: MQVB) -> ModuleAction:
    """
    底代数按模乘法作用在自身的丛上

    Raises:
        PreconditionError: 底代数不交换（此时左乘不与模结构交换）
    """
    if not bundle.base.is_commutative:
        raise PreconditionError(
            "模乘法作用只对交换底空间是模映射", details={"bundle": bundle.name}
        )
    module = bundle.module
    return ModuleAction.tabulate(
        bundle.base, module, module.act, name=f"mult[{bundle.base.name}↷{bundle.name}]"
    )


def direct_sum_action(
    first: ModuleAction, second: ModuleAction, acting: QCMS, name: str = ""
) -> ModuleAction:
    """(d₁, d₂)·(ω, η) = (d₁ω, d₂η)，acting 的形状须为两作用代数的直和"""
    shape = first.acting.shape.concat(second.acting.shape)
    if acting.shape != shape:
        raise StructuralError(
            "直和作用的代数形状不一致",
            details={"expected": shape.label, "got": acting.shape.label},
        )
    module = direct_sum_module(first.module, second.module)
    r1, n1 = first.tensor.shape[0], first.module.dim
    tensor = np.zeros((shape.real_dim, module.dim, module.dim))
    tensor[:r1, :n1, :n1] = first.tensor
    tensor[r1:, n1:, n1:] = second.tensor
    return ModuleAction(acting, module, tensor, name=name or f"{first.name}⊕{second.name}")


# ------------------------------------------------------------------
# 校验
# ------------------------------------------------------------------


def _relative(err: float, scale: float) -> float:
    return -err / max(1.0, scale)


def action_check(
    action: ModuleAction,
    sample_count: int = ACTION_SAMPLES,
    seed: int = 0,
    tol: float = ACTION_TOL,
) -> CheckReport:
    """
    单位性、乘法性、复线性（精确），可伴性、模线性与 ‖bω‖ ≤ ‖b‖‖ω‖（抽样）

    失败只写入报告。
    """
    module, shape = action.module, action.acting.shape
    eye = np.eye(module.dim)
    unital = _relative(float(np.abs(action.operator(shape.unit()) - eye).max()), 1.0)
    i_unit = module.base.scalar(1j)
    rng = np.random.default_rng(seed)
    multiplicative, linear = float("inf"), float("inf")
    adjoint, modular, bounded = float("inf"), float("inf"), float("inf")
    witnesses: list[dict[str, Any]] = []
    for _ in range(sample_count):
        b, c = shape.random_element(rng), shape.random_element(rng)
        tb = action.operator(b)
        err = float(np.abs(action.operator(b @ c) - tb @ action.operator(c)).max())
        multiplicative = min(multiplicative, _relative(err, b.norm() * c.norm()))
        twisted = np.array([module.act(i_unit, col) for col in tb.T]).T
        err = float(np.abs(action.operator(b * 1j) - twisted).max())
        linear = min(linear, _relative(err, b.norm()))
        omega = sample_module_element(module, rng)
        eta = sample_module_element(module, rng)
        lhs = module.inner(tb @ omega, eta)
        rhs = module.inner(omega, action.apply(b.adjoint(), eta))
        margin = _relative((lhs - rhs).norm(), b.norm() * module.norm(omega) * module.norm(eta))
        if margin < adjoint:
            adjoint = margin
            if margin < -tol:
                witnesses.append({"check": "adjointable", "deviation": -margin})
        a = module.base.random_element(rng)
        err = float(np.abs(tb @ module.act(a, omega) - module.act(a, tb @ omega)).max())
        modular = min(modular, _relative(err, a.norm() * b.norm() * module.norm(omega)))
        bound = b.norm() * module.norm(omega)
        margin = (bound - module.norm(tb @ omega)) / max(1.0, bound)
        if margin < bounded:
            bounded = margin
            if margin < -tol:
                witnesses.append({"check": "norm_bound", "norm": module.norm(tb @ omega)})
    reports = [
        CheckReport("unital", unital >= -tol, unital, 1),
        CheckReport("multiplicative", multiplicative >= -tol, multiplicative, sample_count),
        CheckReport("complex_linear", linear >= -tol, linear, sample_count),
        CheckReport("adjointable", adjoint >= -tol, adjoint, sample_count),
        CheckReport("module_linear", modular >= -tol, modular, sample_count),
        CheckReport("norm_bound", bounded >= -tol, bounded, sample_count),
    ]
    report = merge_reports(f"action[{action.name}]", reports)
    report.witnesses = witnesses[-5:]
    if not report.passed:
        logger.warning(f"作用校验失败 action={action.name} worst={report.worst_margin:.3e}")
    return report
