"""
测试声明注册表
"""
import pytest

from proplab.exceptions import DanglingReferenceError
from proplab.workflow import Scenario, gallery_scenario
from proplab.workflow.registry import BridgeEntry, Registry

PAULI_Y = [[[0.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]]]


@pytest.fixture
def registry():
    """度量丛示例的注册表"""
    return Registry(Scenario.model_validate(gallery_scenario("metrical-scalar")))


def custom_scenario():
    """代数、交换子半范数与 custom 空间"""
    return Scenario.model_validate(
        {
            "schema": "propinquity-lab/1",
            "algebras": [{"id": "A", "blocks": [2]}],
            "seminorms": [
                {
                    "id": "L",
                    "kind": "commutator",
                    "algebra": "A",
                    "operators": [
                        [[0.0, 1.0], [1.0, 0.0]],
                        PAULI_Y,
                        [[1.0, 0.0], [0.0, -1.0]],
                    ],
                }
            ],
            "qcms": [{"id": "Q", "kind": "custom", "algebra": "A", "seminorm": "L"}],
        }
    )


class TestRegistry:
    """测试按需构造"""

    def test_memoized(self, registry):
        """同一个 id 只构造一次"""
        first = registry.qcms("X")
        assert registry.qcms("X") is first
        assert registry.built == 1

    def test_dependencies_shared(self, registry):
        """丛与桥复用已经构造的底空间"""
        bundle = registry.bundle("BX")
        entry = registry.bridge("R")
        assert isinstance(entry, BridgeEntry)
        assert entry.left is registry.qcms("X")
        assert bundle.base is entry.left
        assert entry.right.name == "Y"

    def test_dangling(self, registry):
        with pytest.raises(DanglingReferenceError) as exc:
            registry.qcms("Z")
        assert exc.value.kind == "qcms"
        assert exc.value.ref == "Z"

    def test_identity_bridge_right_defaults_to_left(self):
        """identity 桥的两端是同一个空间"""
        registry = Registry(Scenario.model_validate(gallery_scenario("free-module")))
        entry = registry.bridge("I")
        assert entry.left is entry.right

    def test_scalar_action_acts_by_one_point(self, registry):
        """标量作用的作用空间是 ℂ"""
        metrical = registry.action("AX")
        assert metrical.alt.shape.block_dims == (1,)
        assert metrical.base is registry.qcms("X")

    def test_modular_bridge(self, registry):
        """模桥的底桥来自同一个注册表"""
        bridge = registry.modular_bridge("MR")
        assert bridge.base is registry.bridge("R").bridge

    def test_custom_commutator_space(self):
        """[re, im] 写法的交换子算子构造出 M₂ 上的空间"""
        registry = Registry(custom_scenario())
        space = registry.qcms("Q")
        assert space.shape.block_dims == (2,)
        assert space.lip is registry.seminorm("L")
        assert space.report is not None and space.report.passed
