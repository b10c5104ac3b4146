"""
结构化报告

记录按任务在场景中的顺序排列；除 generated_at 外，相同的场景、种子与
求解配置给出逐字节相同的 JSON。
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from rich.console import Console
from rich.table import Table

from proplab.workflow.tasks import TaskRecord

REPORT_KEYS = frozenset(
    {
        "task_id",
        "op",
        "quantity",
        "value",
        "bound_kind",
        "tolerance",
        "exhausted",
        "paper_bound",
        "pass",
        "witnesses",
        "error",
        "metadata",
    }
)


def to_jsonable(obj: Any) -> Any:
    """numpy 标量/数组、枚举与非有限浮点数转为 JSON 可表示的值"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, complex):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return str(obj)


@dataclass
class Report:
    """一次运行的报告"""

    title: str
    seed: int
    solver: dict[str, Any]
    records: list[TaskRecord] = field(default_factory=list)
    generated_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    @property
    def total(self) -> int:
        return len(self.records)

    @property
    def failed(self) -> int:
        return sum(1 for r in self.records if not r.ok)

    @property
    def all_passed(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict[str, Any]:
        return to_jsonable(
            {
                "schema": "propinquity-lab/1",
                "title": self.title,
                "generated_at": self.generated_at,
                "seed": self.seed,
                "solver": self.solver,
                "summary": {
                    "total": self.total,
                    "failed": self.failed,
                    "all_passed": self.all_passed,
                },
                "records": [r.to_dict() for r in self.records],
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)

    def write(self, path: Union[str, Path]) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(self.to_json() + "\n", encoding="utf-8")
        return p

    def table(self) -> Table:
        """人类可读的表格"""
        table = Table(title=self.title, show_header=True, header_style="bold cyan")
        table.add_column("任务", style="cyan")
        table.add_column("量", style="white")
        table.add_column("数值", justify="right")
        table.add_column("类型", style="magenta")
        table.add_column("可证上界", justify="right")
        table.add_column("结果", justify="center")
        for r in self.records:
            if r.error is not None:
                status = "[red]错误[/red]"
            elif r.passed is None:
                status = "[dim]-[/dim]"
            else:
                status = "[green]✓[/green]" if r.passed else "[red]✗[/red]"
            table.add_row(
                r.task_id,
                r.quantity,
                _fmt(r.value),
                r.bound_kind + (" (耗尽)" if r.exhausted else ""),
                _fmt(r.paper_bound),
                status,
            )
        return table

    def print(self, console: Optional[Console] = None) -> None:
        (console or Console()).print(self.table())


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"
