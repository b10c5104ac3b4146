"""
测试场景模型与加载
"""
import json

import pytest
import yaml

from proplab.exceptions import DanglingReferenceError, ScenarioError
from proplab.workflow import SCHEMA_VERSION, Scenario, gallery_scenario, load_scenario
from proplab.workflow.schemas import parse_scenario, to_complex


@pytest.fixture
def two_point():
    """两点空间示例场景（dict）"""
    return gallery_scenario("two-point")


class TestParse:
    """测试解析与模式校验"""

    def test_gallery_scenario(self, two_point):
        """示例场景通过校验"""
        scenario = parse_scenario(json.dumps(two_point))
        assert isinstance(scenario, Scenario)
        assert [q.id for q in scenario.qcms] == ["X", "Y"]
        assert scenario.to_dict()["schema"] == SCHEMA_VERSION

    def test_yaml(self, two_point):
        """YAML 与 JSON 给出相同的场景"""
        from_yaml = parse_scenario(yaml.safe_dump(two_point), ".yaml")
        from_json = parse_scenario(json.dumps(two_point))
        assert from_yaml.to_dict() == from_json.to_dict()

    def test_json_syntax_error_has_line(self):
        """JSON 语法错误带行号"""
        text = '{\n  "schema": "propinquity-lab/1",\n  "qcms": [\n}'
        with pytest.raises(ScenarioError) as exc:
            parse_scenario(text)
        assert exc.value.details["line"] == 4

    def test_yaml_syntax_error_has_line(self):
        """YAML 语法错误带行号"""
        text = "schema: propinquity-lab/1\nseed: 0: 1\n"
        with pytest.raises(ScenarioError) as exc:
            parse_scenario(text, ".yml")
        assert exc.value.details["line"] == 2

    def test_wrong_schema(self, two_point):
        """schema 版本不符"""
        two_point["schema"] = "propinquity-lab/0"
        with pytest.raises(ScenarioError):
            parse_scenario(json.dumps(two_point))

    def test_unknown_field(self, two_point):
        """声明中不允许多余字段"""
        two_point["qcms"][0]["colour"] = "red"
        with pytest.raises(ScenarioError) as exc:
            parse_scenario(json.dumps(two_point))
        assert "qcms" in exc.value.details["location"]

    def test_missing_kind_field(self, two_point):
        """metric 空间必须给出距离矩阵"""
        del two_point["qcms"][0]["distances"]
        with pytest.raises(ScenarioError):
            parse_scenario(json.dumps(two_point))

    def test_duplicate_id(self, two_point):
        """同类声明的 id 必须唯一"""
        two_point["qcms"][1]["id"] = "X"
        with pytest.raises(ScenarioError):
            parse_scenario(json.dumps(two_point))

    def test_top_level_must_be_object(self):
        with pytest.raises(ScenarioError):
            parse_scenario("[1, 2]")


class TestReferences:
    """测试引用检查"""

    def test_dangling_declaration(self, two_point):
        """桥引用了不存在的空间"""
        two_point["bridges"][0]["right"] = "Z"
        text = json.dumps(two_point, indent=2)
        with pytest.raises(DanglingReferenceError) as exc:
            parse_scenario(text)
        assert exc.value.kind == "qcms"
        assert exc.value.ref == "Z"
        assert "line" in exc.value.details["location"]

    def test_dangling_task_argument(self, two_point):
        """任务参数中的引用也被检查"""
        two_point["tasks"].append({"id": "t", "op": "extent", "args": {"chain": ["R", "Q"]}})
        with pytest.raises(DanglingReferenceError) as exc:
            parse_scenario(json.dumps(two_point))
        assert exc.value.kind == "bridges"
        assert exc.value.ref == "Q"

    def test_dangling_is_scenario_error(self, two_point):
        two_point["tasks"][0]["args"]["qcms"] = "nowhere"
        with pytest.raises(ScenarioError):
            parse_scenario(json.dumps(two_point))


class TestLoad:
    """测试文件加载"""

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(tmp_path / "absent.json")

    def test_yaml_file(self, tmp_path, two_point):
        """按后缀选择 YAML 解析"""
        path = tmp_path / "scenario.yaml"
        path.write_text(yaml.safe_dump(two_point), encoding="utf-8")
        assert len(load_scenario(path).tasks) == len(two_point["tasks"])


class TestComplex:
    """测试复数写法"""

    def test_pair(self):
        assert to_complex([1.0, -2.0]) == complex(1.0, -2.0)

    def test_real(self):
        assert to_complex(3) == complex(3.0)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            to_complex([1.0, 2.0, 3.0])
