"""
场景任务

每个操作读取 args 中的引用，经注册表取得对象，返回一条 TaskRecord。
带可证上界（paper_bound）的记录同时给出 pass；抽样校验记录的数值是
观测到的最大违反量，可证上界为 0。
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Optional, Protocol

from loguru import logger

from proplab.bundles import dnorm_validate
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError, ScenarioError
from proplab.kernels import BoundKind, Estimate
from proplab.metrical import (
    MetricalTunnel,
    dual_metrical_propinquity_ub,
    g_condition_check,
    identity_metrical_tunnel,
    scalar_metrical_tunnel,
)
from proplab.modular import (
    ModularTunnel,
    dual_modular_propinquity_ub,
    free_module_tunnel,
    free_tunnel_figure,
    modular_tunnel_from_bridge,
)
from proplab.qcms import (
    Tunnel,
    compose_tunnels,
    fallback_tunnel,
    propinquity_ub,
    tunnel_from_bridge,
)
from proplab.seminorms import CheckReport
from proplab.workflow.registry import Registry
from proplab.workflow.schemas import TaskDecl

DEFAULT_EPS = 0.01
FIGURE_TOL = 1e-12


class TaskLike(Protocol):
    id: str
    op: str


@dataclass(frozen=True)
class TaskRef:
    """不来自场景文件的任务标识（校验套件使用）"""

    id: str
    op: str


@dataclass
class TaskRecord:
    """单个任务的报告记录"""

    task_id: str
    op: str
    quantity: str
    value: Optional[float]
    bound_kind: str
    tolerance: float
    paper_bound: Optional[float] = None
    passed: Optional[bool] = None
    witnesses: list[Any] = field(default_factory=list)
    exhausted: bool = False
    error: Optional[str] = None
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """没有报错，且 pass 存在时为真"""
        return self.error is None and self.passed is not False

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "task_id": self.task_id,
            "op": self.op,
            "quantity": self.quantity,
            "value": self.value,
            "bound_kind": self.bound_kind,
            "tolerance": self.tolerance,
            "exhausted": self.exhausted,
        }
        if self.paper_bound is not None:
            data["paper_bound"] = self.paper_bound
            data["pass"] = bool(self.passed)
        if self.witnesses:
            data["witnesses"] = [str(w) for w in self.witnesses]
        if self.error is not None:
            data["error"] = self.error
        if self.metadata:
            data["metadata"] = self.metadata
        return data


# ------------------------------------------------------------------
# 记录构造
# ------------------------------------------------------------------


def estimate_record(
    task: TaskLike,
    quantity: str,
    est: Estimate,
    config: SolverConfig,
    paper_bound: Optional[float] = None,
    **metadata: Any,
) -> TaskRecord:
    """数值估计记录；给出 paper_bound 时 pass = value ≤ paper_bound + tol"""
    tol = max(est.tol, config.tol)
    value = None if est.infinite or not math.isfinite(est.value) else float(est.value)
    passed = None
    if paper_bound is not None:
        passed = value is not None and value <= paper_bound + tol
    if est.exhausted:
        logger.warning(f"求解预算耗尽 task={task.id} quantity={quantity}")
    return TaskRecord(
        task.id,
        task.op,
        quantity,
        value,
        est.kind.value,
        tol,
        paper_bound=paper_bound,
        passed=passed,
        exhausted=est.exhausted,
        metadata={**({"infinite": True} if est.infinite else {}), **metadata},
    )


def check_record(
    task: TaskLike, quantity: str, report: CheckReport, config: SolverConfig, **metadata: Any
) -> TaskRecord:
    """抽样校验记录：数值为观测到的最大违反量（下界），可证上界为 0"""
    worst = report.worst_margin
    violation = max(0.0, -worst) if math.isfinite(worst) else 0.0
    return TaskRecord(
        task.id,
        task.op,
        quantity,
        violation,
        BoundKind.LOWER.value,
        config.tol,
        paper_bound=0.0,
        passed=report.passed,
        witnesses=list(report.witnesses),
        metadata={"samples": report.samples, **metadata},
    )


def error_record(task: TaskLike, error: Exception, config: SolverConfig) -> TaskRecord:
    return TaskRecord(
        task.id,
        task.op,
        task.op,
        None,
        BoundKind.APPROX.value,
        config.tol,
        error=f"{type(error).__name__}: {error}",
    )


# ------------------------------------------------------------------
# 参数辅助
# ------------------------------------------------------------------


def _require(task: TaskDecl, key: str) -> Any:
    if key not in task.args:
        raise ScenarioError(
            "任务缺少参数", details={"task": task.id, "op": task.op, "arg": key}
        )
    return task.args[key]


def _refs(task: TaskDecl, key: str) -> list[str]:
    value = task.args.get(key, [])
    return [str(v) for v in (value if isinstance(value, list) else [value])]


def _samples(task: TaskDecl, config: SolverConfig) -> int:
    return int(task.args.get("samples", config.samples))


def _tunnel(
    registry: Registry, ref: str, lam: Optional[float], config: SolverConfig, certify: bool
) -> Tunnel:
    entry = registry.bridge(ref)
    return tunnel_from_bridge(
        entry.bridge, entry.left, entry.right, lam, config=config, certify=certify
    )


def _modular_tunnel(
    registry: Registry, ref: str, task: TaskDecl, config: SolverConfig
) -> ModularTunnel:
    return modular_tunnel_from_bridge(
        registry.modular_bridge(ref),
        task.args.get("lam"),
        task.args.get("eps"),
        config=config,
        certify=bool(task.args.get("certify", True)),
    )


# ------------------------------------------------------------------
# 操作
# ------------------------------------------------------------------

TaskHandler = Callable[[Registry, TaskDecl, SolverConfig], TaskRecord]
TASK_HANDLERS: dict[str, TaskHandler] = {}


def task_op(name: str) -> Callable[[TaskHandler], TaskHandler]:
    def register(fn: TaskHandler) -> TaskHandler:
        TASK_HANDLERS[name] = fn
        return fn

    return register


@task_op("qcms_check")
def run_qcms_check(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    space = registry.qcms(_require(task, "qcms"))
    report = space.validate(_samples(task, config), config.seed)
    return check_record(task, "qcms_axioms", report, config, space=space.name)


@task_op("diameter")
def run_diameter(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    space = registry.qcms(_require(task, "qcms"))
    bound = task.args.get("bound")
    return estimate_record(
        task,
        "diameter",
        space.diameter(config),
        config,
        None if bound is None else float(bound),
        space=space.name,
    )


@task_op("extent")
def run_extent(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    """单个桥的隧道，或 chain 中各桥的隧道按 ε 依次复合"""
    certify = bool(task.args.get("certify", True))
    lam = task.args.get("lam")
    refs = _refs(task, "chain") or [str(_require(task, "bridge"))]
    lams = lam if isinstance(lam, list) else [lam] * len(refs)
    if len(lams) != len(refs):
        raise ScenarioError("lam 的个数与 chain 不一致", details={"task": task.id})
    tunnels = [_tunnel(registry, r, l, config, certify) for r, l in zip(refs, lams)]
    eps = float(task.args.get("eps", DEFAULT_EPS))
    tunnel = reduce(lambda a, b: compose_tunnels(a, b, eps, config, certify), tunnels)
    return estimate_record(
        task,
        "extent",
        tunnel.extent(config),
        config,
        tunnel.figure,
        tunnel=tunnel.name,
        stages=tunnel.stages,
    )


@task_op("propinquity")
def run_propinquity(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    """候选为给定桥的隧道加上张量桥隧道；上界不超过后者的 figure"""
    left = registry.qcms(_require(task, "left"))
    right = registry.qcms(_require(task, "right"))
    certify = bool(task.args.get("certify", True))
    fallback = fallback_tunnel(left, right, config, certify)
    candidates = [_tunnel(registry, r, None, config, certify) for r in _refs(task, "bridges")]
    est = propinquity_ub(left, right, [*candidates, fallback])
    return estimate_record(task, "propinquity", est, config, fallback.figure, **est.metadata)


@task_op("dnorm_check")
def run_dnorm_check(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    bundle = registry.bundle(_require(task, "bundle"))
    report = dnorm_validate(bundle, _samples(task, config), config.seed)
    return check_record(task, "dnorm_axioms", report, config, bundle=bundle.name)


@task_op("modular_extent")
def run_modular_extent(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    tunnel = _modular_tunnel(registry, _require(task, "modular_bridge"), task, config)
    return estimate_record(
        task,
        "modular_extent",
        tunnel.extent(config),
        config,
        tunnel.figure,
        tunnel=tunnel.name,
        stages=tunnel.stages,
    )


@task_op("dmod_propinquity")
def run_dmod_propinquity(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    """上界与 max{2, diam 𝔸, diam 𝔹} 比较"""
    left = registry.bundle(_require(task, "left"))
    right = registry.bundle(_require(task, "right"))
    refs = _refs(task, "modular_bridges")
    candidates = [_modular_tunnel(registry, r, task, config) for r in refs]
    est = dual_modular_propinquity_ub(
        left, right, candidates, config, certify=bool(task.args.get("certify", True))
    )
    bound = max(2.0, left.base.diameter(config).value, right.base.diameter(config).value)
    return estimate_record(task, "dmod_propinquity", est, config, bound, **est.metadata)


@task_op("free_module_tunnel")
def run_free_module_tunnel(
    registry: Registry, task: TaskDecl, config: SolverConfig
) -> TaskRecord:
    """figure 与 2(γ − 1)/γ + λ 的独立计算比较，数值为底隧道的 extent"""
    certify = bool(task.args.get("certify", True))
    base = _tunnel(registry, _require(task, "bridge"), task.args.get("lam"), config, certify)
    rank = int(task.args.get("rank", 1))
    tunnel = free_module_tunnel(base, rank, config=config, certify=certify)
    formula = free_tunnel_figure(base.figure, rank, base.domain.triple.F)
    if abs(formula - tunnel.figure) > FIGURE_TOL:
        raise PreconditionError(
            "自由模隧道的 figure 与公式不一致",
            details={"figure": tunnel.figure, "formula": formula},
        )
    return estimate_record(
        task,
        "modular_extent",
        tunnel.extent(config),
        config,
        tunnel.figure,
        tunnel=tunnel.name,
        rank=rank,
        lam=base.figure,
        gamma=tunnel.notes.get("gamma"),
    )


@task_op("g_condition")
def run_g_condition(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    metrical = registry.action(_require(task, "action"))
    report = g_condition_check(metrical, _samples(task, config), config.seed)
    return check_record(
        task,
        "g_condition",
        report,
        config,
        bundle=metrical.name,
        norm_reading=report.details.get("norm_reading"),
    )


def _metrical_tunnel(
    registry: Registry,
    task: TaskDecl,
    config: SolverConfig,
    domain_key: str,
    codomain_key: str,
    ref: Optional[str],
) -> MetricalTunnel:
    domain = registry.action(_require(task, domain_key))
    codomain = registry.action(_require(task, codomain_key))
    if ref is None:
        if domain is not codomain:
            raise PreconditionError(
                "没有模桥时只能使用恒等度量隧道",
                details={"domain": domain.name, "codomain": codomain.name},
            )
        return identity_metrical_tunnel(domain)
    modular = _modular_tunnel(registry, ref, task, config)
    return scalar_metrical_tunnel(
        modular,
        domain,
        codomain,
        certify=bool(task.args.get("certify", True)),
        sample_count=int(task.args.get("samples", 16)),
    )


@task_op("metrical_extent")
def run_metrical_extent(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    ref = task.args.get("modular_bridge")
    tunnel = _metrical_tunnel(registry, task, config, "domain", "codomain", ref)
    return estimate_record(
        task,
        "metrical_extent",
        tunnel.extent(config),
        config,
        tunnel.figure,
        tunnel=tunnel.name,
        modular_figure=tunnel.modular.figure,
        acting_figure=tunnel.acting.figure,
    )


@task_op("dmet_propinquity")
def run_dmet_propinquity(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    """无可证比较量，只报告上界"""
    refs = _refs(task, "modular_bridges") or [None]
    candidates = [_metrical_tunnel(registry, task, config, "left", "right", r) for r in refs]
    est = dual_metrical_propinquity_ub(candidates[0].domain, candidates[0].codomain, candidates)
    return estimate_record(task, "dmet_propinquity", est, config, **est.metadata)


def run_task(registry: Registry, task: TaskDecl, config: SolverConfig) -> TaskRecord:
    """执行单个任务；异常写入记录而不是向上抛出"""
    handler = TASK_HANDLERS[task.op]
    try:
        record = handler(registry, task, config)
    except Exception as e:
        logger.error(f"任务失败 task={task.id} op={task.op}: {e}")
        return error_record(task, e, config)
    logger.info(
        f"任务完成 task={task.id} op={task.op} value={record.value} "
        f"bound_kind={record.bound_kind} pass={record.passed}"
    )
    return record
