"""
测试示例场景
"""
import pytest

from proplab.exceptions import ConfigurationError
from proplab.workflow import (
    GALLERY,
    SCHEMA_VERSION,
    check_references,
    gallery_names,
    gallery_scenario,
    load_scenario,
    write_gallery,
)
from proplab.workflow.gallery import grid


class TestGallery:
    """测试示例目录"""

    def test_names(self):
        assert gallery_names() == list(GALLERY)
        assert "two-point" in gallery_names()

    @pytest.mark.parametrize("name", list(GALLERY))
    def test_valid(self, name, tmp_path):
        """每个示例写出后都能重新加载，引用完整"""
        path = write_gallery(name, tmp_path / f"{name}.json")
        scenario = load_scenario(path)
        check_references(scenario)
        assert scenario.schema_version == SCHEMA_VERSION
        assert scenario.tasks

    def test_unknown(self):
        with pytest.raises(ConfigurationError) as exc:
            gallery_scenario("klein-bottle")
        assert "two-point" in exc.value.details["available"]

    def test_fresh_copies(self):
        """每次调用返回新的 dict"""
        first = gallery_scenario("two-point")
        first["tasks"].clear()
        assert gallery_scenario("two-point")["tasks"]

    def test_grid_levels(self):
        data = grid(levels=4)
        assert [q["id"] for q in data["qcms"]] == ["G0", "G1", "G2", "G3"]
        assert len(data["bridges"]) == 3
        chain = next(t for t in data["tasks"] if t["id"] == "extent-chain")
        assert chain["args"]["chain"] == ["R0", "R1", "R2"]
