"""
测试命令行接口
"""
import json
import sys

import pytest
from click.testing import CliRunner
from loguru import logger

from proplab.cli.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, cli
from proplab.workflow import gallery_scenario


@pytest.fixture
def runner():
    yield CliRunner()
    logger.remove()
    logger.add(sys.stderr)


@pytest.fixture
def two_point_file(tmp_path):
    """写出两点示例场景"""
    path = tmp_path / "two-point.json"
    path.write_text(json.dumps(gallery_scenario("two-point")), encoding="utf-8")
    return path


class TestGallery:
    """测试 gallery 命令"""

    def test_list(self, runner):
        result = runner.invoke(cli, ["gallery", "--list"])
        assert result.exit_code == EXIT_OK
        assert "two-point" in result.output

    def test_write(self, runner, tmp_path):
        out = tmp_path / "free.json"
        result = runner.invoke(cli, ["gallery", "--name", "free-module", "--out", str(out)])
        assert result.exit_code == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["schema"] == "propinquity-lab/1"

    def test_unknown_name(self, runner, tmp_path):
        out = tmp_path / "x.json"
        result = runner.invoke(cli, ["gallery", "--name", "klein-bottle", "--out", str(out)])
        assert result.exit_code == EXIT_USAGE
        assert not out.exists()

    def test_requires_name(self, runner):
        result = runner.invoke(cli, ["gallery"])
        assert result.exit_code == EXIT_USAGE


class TestCompute:
    """测试 compute 命令"""

    def test_gallery_then_compute(self, runner, tmp_path):
        """示例场景运行通过，报告写出"""
        scenario = tmp_path / "two-point.json"
        written = runner.invoke(cli, ["gallery", "--name", "two-point", "--out", str(scenario)])
        assert written.exit_code == EXIT_OK
        out = tmp_path / "report.json"
        result = runner.invoke(
            cli, ["compute", "--scenario", str(scenario), "--out", str(out), "--threads", "1"]
        )
        assert result.exit_code == EXIT_OK, result.output
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["summary"]["all_passed"] is True
        assert data["seed"] == 0

    def test_seed_override(self, runner, two_point_file, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            cli,
            ["compute", "--scenario", str(two_point_file), "--out", str(out), "--seed", "9",
             "--threads", "1"],
        )
        assert result.exit_code == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["seed"] == 9

    def test_dangling_reference(self, runner, tmp_path):
        """引用无法解析：退出码 2，不写报告"""
        data = gallery_scenario("two-point")
        data["bridges"][0]["right"] = "Z"
        scenario = tmp_path / "bad.json"
        scenario.write_text(json.dumps(data), encoding="utf-8")
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["compute", "--scenario", str(scenario), "--out", str(out)])
        assert result.exit_code == EXIT_USAGE
        assert not out.exists()

    def test_bad_json(self, runner, tmp_path):
        scenario = tmp_path / "broken.json"
        scenario.write_text("{", encoding="utf-8")
        result = runner.invoke(cli, ["compute", "--scenario", str(scenario)])
        assert result.exit_code == EXIT_USAGE

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["compute", "--scenario", str(tmp_path / "none.json")])
        assert result.exit_code == EXIT_USAGE

    def test_failing_record(self, runner, tmp_path):
        """有任务出错时退出码为 1，报告仍然写出"""
        data = gallery_scenario("two-point")
        data["tasks"] = [{"id": "broken", "op": "diameter", "args": {}}]
        scenario = tmp_path / "partial.json"
        scenario.write_text(json.dumps(data), encoding="utf-8")
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["compute", "--scenario", str(scenario), "--out", str(out)])
        assert result.exit_code == EXIT_FAILED
        assert "error" in json.loads(out.read_text(encoding="utf-8"))["records"][0]

    def test_requires_scenario(self, runner):
        result = runner.invoke(cli, ["compute"])
        assert result.exit_code == EXIT_USAGE


class TestVerify:
    """测试 verify 命令"""

    def test_axioms(self, runner, tmp_path):
        out = tmp_path / "axioms.json"
        result = runner.invoke(cli, ["verify", "--suite", "axioms", "--quick", "--out", str(out)])
        assert result.exit_code == EXIT_OK, result.output
        assert json.loads(out.read_text(encoding="utf-8"))["title"] == "verify:axioms"

    def test_unknown_suite(self, runner):
        result = runner.invoke(cli, ["verify", "--suite", "nope"])
        assert result.exit_code == EXIT_USAGE


def test_version():
    result = CliRunner().invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "0.1.0" in result.output
