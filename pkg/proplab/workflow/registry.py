"""
声明注册表

按需构造场景中的声明并缓存；并行任务共享同一个注册表，构造过程由一把
可重入锁串行化。同一个 id 在整个运行中只对应一个对象，端点比较
（same_as）因此在任务之间一致。
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np
from loguru import logger

from proplab.algebra.shape import AlgebraShape
from proplab.bundles.bundle import MQVB, qvba, scale_to_unit_ball
from proplab.config import SolverConfig
from proplab.exceptions import DanglingReferenceError
from proplab.metrical import (
    MetricalQVB,
    base_multiplication_action,
    make_metrical,
    scalar_action,
    scalar_space,
)
from proplab.modular import ModularBridge, convexify, identity_modular_bridge
from proplab.qcms import (
    QCMS,
    Bridge,
    correspondence_bridge,
    grid_space,
    identity_bridge,
    matrix_space,
    metric_space,
    one_point,
    points_space,
    tensor_bridge,
)
from proplab.seminorms import (
    AtomicSeminorm,
    commutator_seminorm,
    fuzzy_sphere_seminorm,
    lipschitz_seminorm,
    pauli_seminorm,
)
from proplab.workflow.schemas import (
    DECLARATION_KINDS,
    ActionDecl,
    AlgebraDecl,
    BridgeDecl,
    BundleDecl,
    ModularBridgeDecl,
    ModuleDecl,
    QCMSDecl,
    Scenario,
    SeminormDecl,
    to_complex,
)


@dataclass(frozen=True)
class ModuleEntry:
    """秩 p 自由模：底空间与秩"""

    base: QCMS
    rank: int


@dataclass(frozen=True)
class BridgeEntry:
    """桥及其两端空间"""

    bridge: Bridge
    left: QCMS
    right: QCMS


class Registry:
    """场景声明的惰性构造与缓存"""

    def __init__(self, scenario: Scenario, config: Optional[SolverConfig] = None) -> None:
        self.scenario = scenario
        self.config = config or SolverConfig(seed=scenario.seed)
        self._decls = {kind: scenario.index(kind) for kind in DECLARATION_KINDS}
        self._cache: dict[tuple[str, str], Any] = {}
        self._lock = threading.RLock()

    # ------------------------------------------------------------------
    # 公开接口
    # ------------------------------------------------------------------

    def algebra(self, ref: str) -> AlgebraShape:
        return self._get("algebras", ref, self._build_algebra)

    def seminorm(self, ref: str) -> AtomicSeminorm:
        return self._get("seminorms", ref, self._build_seminorm)

    def qcms(self, ref: str) -> QCMS:
        return self._get("qcms", ref, self._build_qcms)

    def module(self, ref: str) -> ModuleEntry:
        return self._get("modules", ref, self._build_module)

    def bundle(self, ref: str) -> MQVB:
        return self._get("bundles", ref, self._build_bundle)

    def bridge(self, ref: str) -> BridgeEntry:
        return self._get("bridges", ref, self._build_bridge)

    def modular_bridge(self, ref: str) -> ModularBridge:
        return self._get("modular_bridges", ref, self._build_modular_bridge)

    def action(self, ref: str) -> MetricalQVB:
        return self._get("actions", ref, self._build_action)

    @property
    def built(self) -> int:
        return len(self._cache)

    # ------------------------------------------------------------------
    # 私有方法
    # ------------------------------------------------------------------

    def _get(self, kind: str, ref: str, builder: Callable[[Any], Any]) -> Any:
        key = (kind, ref)
        with self._lock:
            if key not in self._cache:
                decl = self._decls[kind].get(ref)
                if decl is None:
                    raise DanglingReferenceError(kind, ref)
                self._cache[key] = builder(decl)
                logger.debug(f"构造声明 kind={kind} id={ref}")
            return self._cache[key]

    def _build_algebra(self, decl: AlgebraDecl) -> AlgebraShape:
        return AlgebraShape(tuple(decl.blocks))

    def _build_seminorm(self, decl: SeminormDecl) -> AtomicSeminorm:
        if decl.kind == "lipschitz":
            return lipschitz_seminorm(np.asarray(decl.distances, dtype=float), name=decl.label)
        if decl.kind == "pauli":
            return pauli_seminorm(name=decl.label)
        if decl.kind == "fuzzy":
            return fuzzy_sphere_seminorm(decl.n, name=decl.label)
        operators = [
            np.array([[to_complex(z) for z in row] for row in op], dtype=complex)
            for op in decl.operators
        ]
        return commutator_seminorm(self.algebra(decl.algebra), operators, name=decl.label)

    def _build_qcms(self, decl: QCMSDecl) -> QCMS:
        if decl.kind == "metric":
            return metric_space(np.asarray(decl.distances, dtype=float), name=decl.label)
        if decl.kind == "points":
            return points_space(decl.points, name=decl.label)
        if decl.kind == "grid":
            space = grid_space(decl.level)
            return space if decl.name is None else metric_space(space.metric, name=decl.name)
        if decl.kind == "point":
            return one_point(decl.label)
        if decl.kind == "matrix":
            return matrix_space(decl.matrix, decl.n, name=decl.label)
        return QCMS(
            self.algebra(decl.algebra),
            self.seminorm(decl.seminorm),
            name=decl.label,
            seed=self.config.seed,
        )

    def _build_module(self, decl: ModuleDecl) -> ModuleEntry:
        return ModuleEntry(self.qcms(decl.base), decl.rank)

    def _build_bundle(self, decl: BundleDecl) -> MQVB:
        entry = self.module(decl.module)
        return qvba(entry.base, entry.rank, name=decl.label, validate=decl.validate_dnorm)

    def _build_bridge(self, decl: BridgeDecl) -> BridgeEntry:
        left = self.qcms(decl.left)
        right = self.qcms(decl.right) if decl.right is not None else left
        if decl.kind == "identity":
            bridge = identity_bridge(left)
        elif decl.kind == "tensor":
            bridge = tensor_bridge(left, right, self.config, name=decl.label)
        else:
            bridge = correspondence_bridge(left, right, decl.relation, name=decl.label)
        return BridgeEntry(bridge, left, right)

    def _build_modular_bridge(self, decl: ModularBridgeDecl) -> ModularBridge:
        anchors = None if decl.anchors is None else [np.asarray(w) for w in decl.anchors]
        if decl.kind == "identity":
            bridge = identity_modular_bridge(self.bundle(decl.bundle), anchors)
        else:
            source, target = self.bundle(decl.source), self.bundle(decl.target)
            coanchors = None if decl.coanchors is None else [np.asarray(w) for w in decl.coanchors]
            bridge = ModularBridge(
                self.bridge(decl.bridge).bridge,
                source,
                target,
                anchors if anchors is not None else [scale_to_unit_ball(source)],
                coanchors if coanchors is not None else [scale_to_unit_ball(target)],
                name=decl.label,
            )
        return convexify(bridge) if decl.convexify else bridge

    def _build_action(self, decl: ActionDecl) -> MetricalQVB:
        bundle = self.bundle(decl.bundle)
        if decl.kind == "scalar":
            acting = self.qcms(decl.acting_qcms) if decl.acting_qcms else scalar_space()
            action = scalar_action(bundle.module, acting)
        else:
            acting = self.qcms(decl.acting_qcms) if decl.acting_qcms else bundle.base
            action = base_multiplication_action(bundle)
        return make_metrical(bundle, acting, action, name=decl.label, seed=self.config.seed)
