"""
场景文件的 Pydantic 模型

场景由声明（代数、半范数、空间、模、丛、桥、模桥、作用）与任务组成。
声明只能引用比自身低一层的声明，因此引用图天然无环；引用能否解析由
check_references 检查。复数写作 [re, im]，矩阵为按行嵌套的数组。
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from proplab.exceptions import DanglingReferenceError, ScenarioError

SCHEMA_VERSION = "propinquity-lab/1"

ComplexValue = Union[float, list[float]]


def to_complex(value: ComplexValue) -> complex:
    """数值或 [re, im] → complex"""
    if isinstance(value, (int, float)):
        return complex(value)
    if len(value) != 2:
        raise ValueError(f"复数应写作 [re, im]，当前: {value}")
    return complex(float(value[0]), float(value[1]))


# ============ 声明 (Declarations) ============


class Declaration(BaseModel):
    """声明的公共字段"""

    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1, description="声明标识，在同类声明中唯一")
    name: Optional[str] = Field(None, description="显示名称，缺省为 id")

    @property
    def label(self) -> str:
        return self.name or self.id


class AlgebraDecl(Declaration):
    """有限维 C*-代数 ⊕ M_{n_k}"""

    blocks: list[int] = Field(..., min_length=1, description="各矩阵块的尺寸")

    @field_validator("blocks")
    @classmethod
    def validate_blocks(cls, v: list[int]) -> list[int]:
        if any(n < 1 for n in v):
            raise ValueError("块尺寸必须为正整数")
        return v


class SeminormDecl(Declaration):
    """Lip-范数"""

    kind: Literal["lipschitz", "pauli", "fuzzy", "commutator"] = Field(
        ..., description="lipschitz: 距离矩阵；pauli: M₂；fuzzy: M_n；commutator: 自伴算子"
    )
    distances: Optional[list[list[float]]] = Field(None, description="lipschitz 的距离矩阵")
    n: Optional[int] = Field(None, ge=1, description="fuzzy 的矩阵尺寸")
    algebra: Optional[str] = Field(None, description="commutator 作用的代数")
    operators: Optional[list[list[list[ComplexValue]]]] = Field(
        None, description="commutator 的自伴算子列表"
    )

    @model_validator(mode="after")
    def check_kind_fields(self) -> "SeminormDecl":
        required = {
            "lipschitz": ("distances",),
            "fuzzy": ("n",),
            "commutator": ("algebra", "operators"),
        }.get(self.kind, ())
        missing = [key for key in required if getattr(self, key) is None]
        if missing:
            raise ValueError(f"{self.kind} 半范数缺少字段: {missing}")
        return self


class QCMSDecl(Declaration):
    """量子紧度量空间"""

    kind: Literal["metric", "points", "grid", "point", "matrix", "custom"]
    distances: Optional[list[list[float]]] = Field(None, description="metric 的距离矩阵")
    points: Optional[list[float]] = Field(None, description="points 的实直线坐标")
    level: Optional[int] = Field(None, ge=0, description="grid 的二进层数")
    matrix: Literal["pauli", "fuzzy"] = Field("pauli", description="matrix 的类型")
    n: int = Field(2, ge=1, description="matrix=fuzzy 时的尺寸")
    algebra: Optional[str] = Field(None, description="custom 的代数")
    seminorm: Optional[str] = Field(None, description="custom 的 Lip-范数")

    @model_validator(mode="after")
    def check_kind_fields(self) -> "QCMSDecl":
        required = {
            "metric": ("distances",),
            "points": ("points",),
            "grid": ("level",),
            "custom": ("algebra", "seminorm"),
        }.get(self.kind, ())
        missing = [key for key in required if getattr(self, key) is None]
        if missing:
            raise ValueError(f"{self.kind} 空间缺少字段: {missing}")
        return self


class ModuleDecl(Declaration):
    """底空间上的秩 p 自由模"""

    base: str = Field(..., description="底空间 qcms id")
    rank: int = Field(1, ge=1, description="秩 p")


class BundleDecl(Declaration):
    """自由模上的度量化丛 qvba(X, p)"""

    module: str = Field(..., description="模 id")
    validate_dnorm: bool = Field(True, description="构造时是否抽样校验 D-范数")


class BridgeDecl(Declaration):
    """两个空间之间的桥"""

    kind: Literal["identity", "tensor", "correspondence"]
    left: str = Field(..., description="起点空间 id")
    right: Optional[str] = Field(None, description="终点空间 id；identity 时缺省为 left")
    relation: Optional[list[tuple[int, int]]] = Field(None, description="correspondence 的点对")

    @model_validator(mode="after")
    def check_kind_fields(self) -> "BridgeDecl":
        if self.kind != "identity" and self.right is None:
            raise ValueError(f"{self.kind} 桥需要 right")
        if self.kind == "correspondence" and not self.relation:
            raise ValueError("correspondence 桥需要非空的 relation")
        return self


class ModularBridgeDecl(Declaration):
    """模桥：底桥 + 锚点/余锚点（模的实坐标）"""

    kind: Literal["identity", "bridge"] = "bridge"
    bundle: Optional[str] = Field(None, description="identity 的丛")
    bridge: Optional[str] = Field(None, description="底桥 id")
    source: Optional[str] = Field(None, description="起点丛 id")
    target: Optional[str] = Field(None, description="终点丛 id")
    anchors: Optional[list[list[float]]] = Field(None, description="锚点，缺省为归一化单位元")
    coanchors: Optional[list[list[float]]] = Field(None, description="余锚点")
    convexify: bool = Field(True, description="imprint 是否取锚点凸包")

    @model_validator(mode="after")
    def check_kind_fields(self) -> "ModularBridgeDecl":
        required = ("bundle",) if self.kind == "identity" else ("bridge", "source", "target")
        missing = [key for key in required if getattr(self, key) is None]
        if missing:
            raise ValueError(f"{self.kind} 模桥缺少字段: {missing}")
        if (self.anchors is None) != (self.coanchors is None):
            raise ValueError("anchors 与 coanchors 必须同时给出")
        return self


class ActionDecl(Declaration):
    """度量丛：丛 + 作用空间 + 作用"""

    bundle: str = Field(..., description="丛 id")
    kind: Literal["scalar", "multiplication"] = Field(
        "scalar", description="scalar: ℂ 按标量作用；multiplication: 交换底空间按模乘法作用"
    )
    acting_qcms: Optional[str] = Field(None, description="作用空间；缺省为 ℂ 或丛的底空间")


# ============ 任务 (Tasks) ============


TaskOp = Literal[
    "qcms_check",
    "diameter",
    "extent",
    "propinquity",
    "dnorm_check",
    "modular_extent",
    "dmod_propinquity",
    "free_module_tunnel",
    "g_condition",
    "metrical_extent",
    "dmet_propinquity",
]

# 每个操作中作为引用的参数及其指向的声明类型
TASK_REFS: dict[str, dict[str, str]] = {
    "qcms_check": {"qcms": "qcms"},
    "diameter": {"qcms": "qcms"},
    "extent": {"bridge": "bridges", "chain": "bridges"},
    "propinquity": {"left": "qcms", "right": "qcms", "bridges": "bridges"},
    "dnorm_check": {"bundle": "bundles"},
    "modular_extent": {"modular_bridge": "modular_bridges"},
    "dmod_propinquity": {
        "left": "bundles",
        "right": "bundles",
        "modular_bridges": "modular_bridges",
    },
    "free_module_tunnel": {"bridge": "bridges"},
    "g_condition": {"action": "actions"},
    "metrical_extent": {
        "domain": "actions",
        "codomain": "actions",
        "modular_bridge": "modular_bridges",
    },
    "dmet_propinquity": {
        "left": "actions",
        "right": "actions",
        "modular_bridges": "modular_bridges",
    },
}


class TaskDecl(BaseModel):
    """一个计算任务"""

    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1, description="任务标识")
    op: TaskOp = Field(..., description="操作名")
    args: dict[str, Any] = Field(default_factory=dict, description="参数，引用写作声明 id")


# ============ 场景 (Scenario) ============


DECLARATION_KINDS = (
    "algebras",
    "seminorms",
    "qcms",
    "modules",
    "bundles",
    "bridges",
    "modular_bridges",
    "actions",
)


class Scenario(BaseModel):
    """场景文件"""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal["propinquity-lab/1"] = Field(..., alias="schema")
    seed: int = Field(0, description="随机种子")
    solver: dict[str, Any] = Field(default_factory=dict, description="SolverConfig 字段覆盖")
    algebras: list[AlgebraDecl] = Field(default_factory=list)
    seminorms: list[SeminormDecl] = Field(default_factory=list)
    qcms: list[QCMSDecl] = Field(default_factory=list)
    modules: list[ModuleDecl] = Field(default_factory=list)
    bundles: list[BundleDecl] = Field(default_factory=list)
    bridges: list[BridgeDecl] = Field(default_factory=list)
    modular_bridges: list[ModularBridgeDecl] = Field(default_factory=list)
    actions: list[ActionDecl] = Field(default_factory=list)
    tasks: list[TaskDecl] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_unique_ids(self) -> "Scenario":
        for kind in (*DECLARATION_KINDS, "tasks"):
            seen: set[str] = set()
            for item in getattr(self, kind):
                if item.id in seen:
                    raise ValueError(f"{kind} 中的 id 重复: {item.id}")
                seen.add(item.id)
        return self

    def index(self, kind: str) -> dict[str, Any]:
        return {item.id: item for item in getattr(self, kind)}

    def to_dict(self) -> dict[str, Any]:
        return self.model_dump(by_alias=True, exclude_none=True)


# ------------------------------------------------------------------
# 引用检查
# ------------------------------------------------------------------


def _line_of(text: Optional[str], ref: str) -> str:
    if not text:
        return ""
    for number, line in enumerate(text.splitlines(), start=1):
        if f'"{ref}"' in line or f": {ref}" in line or f"- {ref}" in line:
            return f"line {number}"
    return ""


def _declaration_refs(scenario: Scenario) -> list[tuple[str, str, str]]:
    """(引用类型, 引用 id, 所在位置) 列表"""
    refs: list[tuple[str, str, str]] = []
    for decl in scenario.seminorms:
        if decl.kind == "commutator":
            refs.append(("algebras", decl.algebra, f"seminorms.{decl.id}"))
    for decl in scenario.qcms:
        if decl.kind == "custom":
            refs.append(("algebras", decl.algebra, f"qcms.{decl.id}"))
            refs.append(("seminorms", decl.seminorm, f"qcms.{decl.id}"))
    for decl in scenario.modules:
        refs.append(("qcms", decl.base, f"modules.{decl.id}"))
    for decl in scenario.bundles:
        refs.append(("modules", decl.module, f"bundles.{decl.id}"))
    for decl in scenario.bridges:
        refs.append(("qcms", decl.left, f"bridges.{decl.id}"))
        if decl.right is not None:
            refs.append(("qcms", decl.right, f"bridges.{decl.id}"))
    for decl in scenario.modular_bridges:
        where = f"modular_bridges.{decl.id}"
        if decl.kind == "identity":
            refs.append(("bundles", decl.bundle, where))
        else:
            refs.append(("bridges", decl.bridge, where))
            refs.append(("bundles", decl.source, where))
            refs.append(("bundles", decl.target, where))
    for decl in scenario.actions:
        refs.append(("bundles", decl.bundle, f"actions.{decl.id}"))
        if decl.acting_qcms is not None:
            refs.append(("qcms", decl.acting_qcms, f"actions.{decl.id}"))
    for task in scenario.tasks:
        for key, kind in TASK_REFS[task.op].items():
            value = task.args.get(key)
            values = value if isinstance(value, list) else [value]
            refs.extend((kind, str(v), f"tasks.{task.id}.{key}") for v in values if v is not None)
    return refs


def check_references(scenario: Scenario, text: Optional[str] = None) -> None:
    """
    检查所有引用都能解析

    Raises:
        DanglingReferenceError: 第一个无法解析的引用
    """
    known = {kind: set(scenario.index(kind)) for kind in DECLARATION_KINDS}
    for kind, ref, where in _declaration_refs(scenario):
        if ref not in known[kind]:
            anchor = _line_of(text, ref)
            raise DanglingReferenceError(
                kind, ref, f"{where} ({anchor})" if anchor else where
            )


# ------------------------------------------------------------------
# 加载
# ------------------------------------------------------------------


def parse_scenario(text: str, suffix: str = ".json") -> Scenario:
    """
    解析并校验场景文本

    Raises:
        ScenarioError: 语法错误（带行号）或模式校验失败
        DanglingReferenceError: 引用无法解析
    """
    if suffix in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ScenarioError(
                f"YAML 解析失败: {getattr(e, 'problem', e)}", details={"line": line}
            ) from e
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError(
                f"JSON 解析失败: {e.msg}", details={"line": e.lineno, "column": e.colno}
            ) from e
    if not isinstance(data, dict):
        raise ScenarioError("场景文件的顶层必须是对象")
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        last = first["loc"][-1] if first["loc"] else None
        anchor = _line_of(text, last) if isinstance(last, str) else ""
        raise ScenarioError(
            f"场景模式校验失败: {first['msg']}",
            details={"location": where, "line": anchor or None, "errors": e.error_count()},
        ) from e
    check_references(scenario, text)
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    """从 JSON 或 YAML 文件加载场景"""
    p = Path(path)
    if not p.exists():
        raise ScenarioError("场景文件不存在", details={"path": str(p)})
    return parse_scenario(p.read_text(encoding="utf-8"), p.suffix.lower())
