"""
测试结构化报告
"""
import json
import math

import numpy as np
from rich.console import Console

from proplab.kernels import BoundKind
from proplab.workflow import Report, TaskRecord, to_jsonable


def sample_report():
    return Report(
        "demo",
        3,
        {"iterations": 10},
        [
            TaskRecord("a", "extent", "extent", 0.2, "upper", 1e-6, paper_bound=0.25, passed=True),
            TaskRecord("b", "diameter", "diameter", 1.0, "approx", 1e-6),
            TaskRecord("c", "extent", "extent", None, "approx", 1e-6, error="ValueError: x"),
        ],
    )


class TestToJsonable:
    """测试 JSON 转换"""

    def test_non_finite(self):
        assert to_jsonable([math.inf, -math.inf]) == ["inf", "-inf"]
        assert to_jsonable(float("nan")) == "nan"

    def test_numpy(self):
        data = to_jsonable({"x": np.float64(0.5), "v": np.arange(3), 1: np.bool_(True)})
        assert data == {"x": 0.5, "v": [0, 1, 2], "1": True}

    def test_enum_and_complex(self):
        assert to_jsonable(BoundKind.UPPER) == BoundKind.UPPER.value
        assert to_jsonable(1 - 2j) == [1.0, -2.0]


class TestReport:
    """测试报告汇总与输出"""

    def test_summary(self):
        report = sample_report()
        assert report.total == 3
        assert report.failed == 1
        assert not report.all_passed

    def test_failed_check_counts(self):
        """pass 为假的记录计入未通过"""
        report = Report("demo", 0, {}, [
            TaskRecord("a", "extent", "extent", 0.3, "upper", 1e-6, paper_bound=0.25, passed=False)
        ])
        assert report.failed == 1

    def test_write_and_read_back(self, tmp_path):
        report = sample_report()
        path = report.write(tmp_path / "nested" / "report.json")
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["schema"] == "propinquity-lab/1"
        assert data["seed"] == 3
        assert [r["task_id"] for r in data["records"]] == ["a", "b", "c"]
        assert data["records"][0]["pass"] is True
        assert "pass" not in data["records"][1]
        assert data["records"][2]["error"] == "ValueError: x"

    def test_stable_json(self):
        """键排序，相同内容给出相同文本"""
        report = sample_report()
        assert report.to_json() == report.to_json()
        assert list(json.loads(report.to_json())) == sorted(report.to_dict())

    def test_table(self):
        console = Console(record=True, width=120)
        sample_report().print(console)
        text = console.export_text()
        assert "demo" in text
        assert "错误" in text
