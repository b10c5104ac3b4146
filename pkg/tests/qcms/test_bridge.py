"""
测试桥：构造校验、桥半范数、height / reach / length
"""
import numpy as np
import pytest

from proplab.algebra import AlgebraShape, State, identity_morphism
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError, StructuralError, ValidationError
from proplab.qcms import (
    Bridge,
    bridge_reach,
    bridge_stats,
    correspondence_bridge,
    distortion,
    identity_bridge,
    metric_space,
    one_point,
    tensor_bridge,
)


@pytest.fixture
def config():
    """缩小预算的求解配置"""
    return SolverConfig(iterations=1200, polish_iterations=200, ascent_iterations=150, samples=6)


@pytest.fixture
def unit_pair():
    """两点空间，距离 1"""
    return metric_space([[0.0, 1.0], [1.0, 0.0]], name="X")


@pytest.fixture
def wide_pair():
    """两点空间，距离 2"""
    return metric_space([[0.0, 2.0], [2.0, 0.0]], name="Y")


@pytest.fixture
def diagonal(unit_pair, wide_pair):
    """对角对应 {(0,0), (1,1)}"""
    return correspondence_bridge(unit_pair, wide_pair, [(0, 0), (1, 1)])


class TestBridgeConstruction:
    """测试桥的构造校验"""

    def test_identity_bridge(self, unit_pair):
        """恒等桥：x = 1，可证 length 为 0"""
        bridge = identity_bridge(unit_pair)
        assert bridge.certified_length == 0.0
        assert bridge.witness is not None

    def test_pivot_norm_checked(self):
        """‖x‖ ≠ 1 时失败"""
        shape = AlgebraShape((1, 1))
        ident = identity_morphism(shape)
        with pytest.raises(ValidationError):
            Bridge(shape, shape.diagonal([2.0, 1.0]), ident, ident)

    def test_empty_level_set(self):
        """𝒮₁(𝔇|x) 为空时失败"""
        shape = AlgebraShape((1, 1))
        ident = identity_morphism(shape)
        with pytest.raises(PreconditionError):
            Bridge(shape, shape.diagonal([-1.0, 1j]), ident, ident)

    def test_bad_witness(self):
        """见证态不在 𝒮₁(𝔇|x) 中"""
        shape = AlgebraShape((1, 1))
        ident = identity_morphism(shape)
        with pytest.raises(ValidationError):
            Bridge(
                shape,
                shape.diagonal([1.0, -1.0]),
                ident,
                ident,
                witness=State.point_mass(shape, 1),
            )

    def test_leg_target_checked(self):
        """嵌入必须落在枢纽中"""
        shape = AlgebraShape((1, 1))
        with pytest.raises(StructuralError):
            Bridge(
                AlgebraShape((2,)),
                AlgebraShape((2,)).unit(),
                identity_morphism(shape),
                identity_morphism(shape),
            )

    def test_correspondence_pivot(self, diagonal):
        """对应桥的枢纽为 C(X×Y)，x 为示性函数"""
        assert diagonal.pivot.block_dims == (1, 1, 1, 1)
        assert diagonal.level_rows() == [0, 3]
        assert diagonal.certified_length == pytest.approx(0.5)

    def test_partial_relation_not_certified(self, unit_pair, wide_pair):
        """不是对应的关系没有可证 length"""
        bridge = correspondence_bridge(unit_pair, wide_pair, [(0, 0)])
        assert bridge.certified_length is None
        assert bridge.notes["correspondence"] is False

    def test_distortion(self, unit_pair, wide_pair):
        """dis(R) = max |d_X − d_Y|"""
        assert distortion(unit_pair, wide_pair, [(0, 0), (1, 1)]) == pytest.approx(1.0)
        assert distortion(unit_pair, wide_pair, [(0, 0), (1, 0)]) == pytest.approx(1.0)

    def test_tensor_bridge(self, unit_pair, wide_pair):
        """张量桥的可证 length 为 max(diam)/2"""
        bridge = tensor_bridge(unit_pair, wide_pair)
        assert bridge.certified_length == pytest.approx(1.0)
        assert bridge.pivot.num_blocks == 4


class TestBridgeSeminorm:
    """测试桥半范数"""

    def test_identity_values(self, unit_pair):
        """恒等桥：bn(a,a)=0，bn(1,0)=1，bn(0,0)=0"""
        bridge = identity_bridge(unit_pair)
        shape = unit_pair.shape
        a = shape.diagonal([0.3, -1.2])
        assert bridge.bn(a, a) == pytest.approx(0.0)
        assert bridge.bn(shape.unit(), shape.zero()) == pytest.approx(1.0)
        assert bridge.bn(shape.zero(), shape.zero()) == 0.0

    def test_atomic_matches_direct(self, diagonal, unit_pair, wide_pair):
        """原子形式与直接计算一致"""
        a = unit_pair.shape.diagonal([0.2, 1.0])
        b = wide_pair.shape.diagonal([-0.5, 0.4])
        coords = np.concatenate([a.coords(), b.coords()])
        assert diagonal.bn_seminorm()(coords) == pytest.approx(diagonal.bn(a, b))

    def test_shape_mismatch(self, diagonal, unit_pair):
        """参数形状不匹配"""
        with pytest.raises(StructuralError):
            diagonal.bn(unit_pair.shape.unit(), AlgebraShape((2,)).unit())


class TestBridgeStats:
    """测试 height、reach 与 length"""

    def test_identity_zero(self, unit_pair, config):
        """恒等桥的统计量全为 0"""
        stats = bridge_stats(identity_bridge(unit_pair), unit_pair, unit_pair, config)
        assert stats.height.value == pytest.approx(0.0, abs=1e-9)
        assert stats.reach.value == pytest.approx(0.0, abs=1e-9)
        assert stats.length.value == pytest.approx(0.0, abs=1e-9)

    def test_one_point_spaces(self, config):
        """两个单点空间经 ℂ 枢纽相连，length 为 0"""
        p, q = one_point("p"), one_point("q")
        shape = p.shape
        ident = identity_morphism(shape)
        bridge = Bridge(shape, shape.unit(), ident, ident)
        assert bridge_stats(bridge, p, q, config).length.value == pytest.approx(0.0, abs=1e-9)

    def test_diagonal_correspondence(self, diagonal, unit_pair, wide_pair, config):
        """对角对应：height 0，reach = dis/2 = 0.5"""
        stats = bridge_stats(diagonal, unit_pair, wide_pair, config)
        assert stats.height.value == pytest.approx(0.0, abs=1e-8)
        assert stats.reach.value == pytest.approx(0.5, abs=1e-6)
        assert stats.length.value == pytest.approx(0.5, abs=1e-6)
        assert stats.to_dict()["length"]["value"] == pytest.approx(0.5, abs=1e-6)

    def test_partial_relation_has_height(self, unit_pair, wide_pair, config):
        """只含一对点的关系：另一点的 height 为正"""
        bridge = correspondence_bridge(unit_pair, wide_pair, [(0, 0)])
        stats = bridge_stats(bridge, unit_pair, wide_pair, config)
        assert stats.height.value > 0.5

    def test_reach_symmetric_under_transpose(self, diagonal, unit_pair, wide_pair, config):
        """交换两侧并转置桥，reach 不变"""
        forward = bridge_reach(diagonal, unit_pair, wide_pair, config)
        backward = bridge_reach(diagonal.transposed(), wide_pair, unit_pair, config)
        assert forward.value == pytest.approx(backward.value, abs=1e-6)

    def test_wrong_ends(self, diagonal, unit_pair, config):
        """桥两端与给定空间不一致"""
        with pytest.raises(StructuralError):
            bridge_stats(diagonal, unit_pair, one_point(), config)
