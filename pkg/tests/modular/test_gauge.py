"""
测试 Minkowski 规范集合
"""
import numpy as np
import pytest

from proplab.bundles import qvba
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError
from proplab.modular import bridge_gauge_set, convexify, identity_modular_bridge
from proplab.qcms import one_point

QUARTER_TURNS = [
    np.array([1.0, 0.0]),
    np.array([0.0, 1.0]),
    np.array([-1.0, 0.0]),
    np.array([0.0, -1.0]),
]


@pytest.fixture
def config():
    """缩小预算的求解配置"""
    return SolverConfig(iterations=1500, polish_iterations=100, samples=8, restarts=2)


@pytest.fixture
def hull_bridge():
    """Free(ℂ, 1) 上锚点 {1, i, −1, −i} 的凸化恒等模桥"""
    circle = qvba(one_point("p"), 1)
    return convexify(identity_modular_bridge(circle, QUARTER_TURNS))


@pytest.fixture
def gauge_set(hull_bridge, config):
    """半径 0.3 的规范集合"""
    return bridge_gauge_set(hull_bridge, 0.3, config)


class TestMembership:
    """测试成员判定"""

    def test_origin(self, gauge_set):
        """0 ∈ 𝒟"""
        assert gauge_set.contains(np.zeros(4))

    def test_anchor_pairs(self, gauge_set, hull_bridge):
        """锚点对 (ω_j, η_j) 的规范值不超过 1"""
        for omega, eta in zip(hull_bridge.anchors, hull_bridge.coanchors):
            v = np.concatenate([omega, eta])
            assert gauge_set.contains(v)
            assert gauge_set.seminorm(v) <= 1.0 + 1e-6

    def test_far_point(self, gauge_set):
        """离锚点很远的点不在 𝒟 内"""
        assert not gauge_set.contains(np.array([3.0, 0.0, -3.0, 0.0]))

    def test_bad_radius(self, hull_bridge, config):
        """半径必须为正"""
        with pytest.raises(PreconditionError):
            bridge_gauge_set(hull_bridge, 0.0, config)


class TestGauge:
    """测试规范函数"""

    def test_positive(self, gauge_set):
        """非零点的规范值为正"""
        rng = np.random.default_rng(5)
        for _ in range(3):
            assert gauge_set.seminorm(rng.standard_normal(4)) > 0.0

    def test_homogeneous(self, gauge_set):
        """𝗉(2v) = 2𝗉(v)"""
        v = np.array([0.4, -0.2, 0.1, 0.3])
        assert gauge_set.seminorm(2.0 * v) == pytest.approx(2.0 * gauge_set.seminorm(v), rel=1e-4)

    def test_rays(self, gauge_set):
        """原点、平衡性与沿射线的单调性"""
        report = gauge_set.ray_check(count=3, seed=2)
        assert report.passed
        assert report.details["gauge_deviation"] < 1e-2
