"""
示例场景

每个示例都是一份可以直接交给 compute 运行的场景。
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable, Union

from loguru import logger

from proplab.exceptions import ConfigurationError
from proplab.workflow.schemas import SCHEMA_VERSION, Scenario

# 示例使用的缩小求解预算
GALLERY_SOLVER: dict[str, Any] = {
    "iterations": 1500,
    "polish_iterations": 100,
    "ascent_iterations": 80,
    "restarts": 2,
    "samples": 16,
    "probes": 6,
}


def _scenario(**sections: Any) -> dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "seed": 0, "solver": dict(GALLERY_SOLVER), **sections}


def two_point() -> dict[str, Any]:
    """两个两点空间，对应桥给出 extent ≤ dis(R)/2"""
    return _scenario(
        qcms=[
            {"id": "X", "kind": "metric", "distances": [[0.0, 1.0], [1.0, 0.0]]},
            {"id": "Y", "kind": "metric", "distances": [[0.0, 1.5], [1.5, 0.0]]},
        ],
        bridges=[
            {"id": "R", "kind": "correspondence", "left": "X", "right": "Y",
             "relation": [[0, 0], [1, 1]]},
        ],
        tasks=[
            {"id": "axioms-X", "op": "qcms_check", "args": {"qcms": "X"}},
            {"id": "diam-X", "op": "diameter", "args": {"qcms": "X", "bound": 1.0}},
            {"id": "extent-R", "op": "extent", "args": {"bridge": "R"}},
            {"id": "prop-XY", "op": "propinquity",
             "args": {"left": "X", "right": "Y", "bridges": ["R"]}},
        ],
    )


def _refinement(level: int) -> list[list[int]]:
    """grid[level] 与 grid[level+1] 之间的最近点对应"""
    coarse = 2**level
    relation = [[i, 2 * i] for i in range(coarse + 1)]
    relation += [[i, 2 * i + 1] for i in range(coarse)]
    return relation


def grid(levels: int = 3) -> dict[str, Any]:
    """[0,1] 的二进网格链：相邻层的桥、复合隧道与邻近度上界"""
    spaces = [{"id": f"G{n}", "kind": "grid", "level": n} for n in range(levels)]
    bridges = [
        {"id": f"R{n}", "kind": "correspondence", "left": f"G{n}", "right": f"G{n + 1}",
         "relation": _refinement(n)}
        for n in range(levels - 1)
    ]
    tasks: list[dict[str, Any]] = [
        {"id": f"extent-R{n}", "op": "extent", "args": {"bridge": f"R{n}"}}
        for n in range(levels - 1)
    ]
    tasks += [
        {"id": f"prop-G{n}", "op": "propinquity",
         "args": {"left": f"G{n}", "right": f"G{n + 1}", "bridges": [f"R{n}"]}}
        for n in range(levels - 1)
    ]
    tasks.append(
        {"id": "extent-chain", "op": "extent",
         "args": {"chain": [b["id"] for b in bridges], "eps": 0.01}}
    )
    return _scenario(qcms=spaces, bridges=bridges, tasks=tasks)


def matrix_dirac() -> dict[str, Any]:
    """M₂ 上的 Pauli 交换子 Lip-范数与自旋 1/2 的模糊球"""
    return _scenario(
        qcms=[
            {"id": "P", "kind": "matrix", "matrix": "pauli"},
            {"id": "S", "kind": "matrix", "matrix": "fuzzy", "n": 2},
        ],
        bridges=[{"id": "T", "kind": "tensor", "left": "P", "right": "S"}],
        tasks=[
            {"id": "axioms-P", "op": "qcms_check", "args": {"qcms": "P", "samples": 64}},
            {"id": "axioms-S", "op": "qcms_check", "args": {"qcms": "S", "samples": 64}},
            {"id": "diam-P", "op": "diameter", "args": {"qcms": "P"}},
            {"id": "extent-T", "op": "extent", "args": {"bridge": "T"}},
        ],
    )


def free_module() -> dict[str, Any]:
    """单点空间上 λ = 0.1 的隧道提升为自由模隧道（γ 公式）"""
    return _scenario(
        qcms=[{"id": "X", "kind": "metric", "distances": [[0.0, 1.0], [1.0, 0.0]]}],
        modules=[{"id": "M1", "base": "X", "rank": 1}],
        bundles=[{"id": "B1", "module": "M1"}],
        bridges=[{"id": "I", "kind": "identity", "left": "X"}],
        modular_bridges=[{"id": "MI", "kind": "identity", "bundle": "B1"}],
        tasks=[
            {"id": "dnorm-B1", "op": "dnorm_check", "args": {"bundle": "B1", "samples": 64}},
            {"id": "free-p1", "op": "free_module_tunnel",
             "args": {"bridge": "I", "lam": 0.1, "rank": 1}},
            {"id": "modular-id", "op": "modular_extent", "args": {"modular_bridge": "MI"}},
            {"id": "dmod-id", "op": "dmod_propinquity",
             "args": {"left": "B1", "right": "B1", "modular_bridges": ["MI"]}},
        ],
    )


def metrical_scalar() -> dict[str, Any]:
    """ℂ 按标量作用的度量丛与度量隧道"""
    return _scenario(
        qcms=[
            {"id": "X", "kind": "metric", "distances": [[0.0, 1.0], [1.0, 0.0]]},
            {"id": "Y", "kind": "metric", "distances": [[0.0, 1.5], [1.5, 0.0]]},
        ],
        modules=[
            {"id": "MX", "base": "X", "rank": 1},
            {"id": "MY", "base": "Y", "rank": 1},
        ],
        bundles=[
            {"id": "BX", "module": "MX"},
            {"id": "BY", "module": "MY"},
        ],
        bridges=[
            {"id": "R", "kind": "correspondence", "left": "X", "right": "Y",
             "relation": [[0, 0], [1, 1]]},
        ],
        modular_bridges=[
            {"id": "MR", "kind": "bridge", "bridge": "R", "source": "BX", "target": "BY"},
        ],
        actions=[
            {"id": "AX", "bundle": "BX", "kind": "scalar"},
            {"id": "AY", "bundle": "BY", "kind": "scalar"},
        ],
        tasks=[
            {"id": "g-AX", "op": "g_condition", "args": {"action": "AX", "samples": 64}},
            {"id": "metrical-id", "op": "metrical_extent",
             "args": {"domain": "AX", "codomain": "AX"}},
            {"id": "metrical-XY", "op": "metrical_extent",
             "args": {"domain": "AX", "codomain": "AY", "modular_bridge": "MR"}},
            {"id": "dmet-XY", "op": "dmet_propinquity",
             "args": {"left": "AX", "right": "AY", "modular_bridges": ["MR"]}},
        ],
    )


GALLERY: dict[str, Callable[[], dict[str, Any]]] = {
    "two-point": two_point,
    "grid": grid,
    "matrix-dirac": matrix_dirac,
    "free-module": free_module,
    "metrical-scalar": metrical_scalar,
}


def gallery_names() -> list[str]:
    return list(GALLERY)


def gallery_scenario(name: str) -> dict[str, Any]:
    """
    Raises:
        ConfigurationError: 未知的示例名
    """
    if name not in GALLERY:
        raise ConfigurationError(
            f"未知的示例: {name}", details={"available": ", ".join(GALLERY)}
        )
    data = GALLERY[name]()
    Scenario.model_validate(data)
    return data


def write_gallery(name: str, out: Union[str, Path]) -> Path:
    p = Path(out)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(
        json.dumps(gallery_scenario(name), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    logger.info(f"示例场景已写出 name={name} path={p}")
    return p
