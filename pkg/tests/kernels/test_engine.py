"""
测试凸求解引擎：仿射最小化、纤维下确界、支撑函数与球上搜索
"""
import numpy as np
import pytest

from proplab.algebra import AlgebraShape
from proplab.config import SolverConfig
from proplab.kernels import (
    BoundKind,
    ConvexBody,
    fiber_infimum,
    minimize_affine,
    minimize_on_l1_ball,
    retraction_search,
    support_function,
)
from proplab.seminorms import (
    AtomGroup,
    AtomicSeminorm,
    lipschitz_seminorm,
    opnorm_seminorm,
)


@pytest.fixture
def config():
    """缩小预算的求解配置"""
    return SolverConfig(iterations=1200, polish_iterations=200, ascent_iterations=150)


@pytest.fixture
def box():
    """S(v) = max(|v₁|, |v₂|)"""
    tensor = np.zeros((2, 1, 1, 2), dtype=complex)
    tensor[0, 0, 0, 0] = 1.0
    tensor[1, 0, 0, 1] = 1.0
    return AtomicSeminorm(2, [AtomGroup(tensor, np.ones(2))], name="box")


@pytest.fixture
def euclid():
    """S(v) = ‖v‖₂（单个列向量原子，非多面体）"""
    tensor = np.zeros((1, 2, 1, 2), dtype=complex)
    tensor[0, 0, 0, 0] = 1.0
    tensor[0, 1, 0, 1] = 1.0
    return AtomicSeminorm(2, [AtomGroup(tensor, np.ones(1))], name="l2")


def sa_lipschitz(dist):
    """交换代数自伴坐标上的 Lipschitz 半范数"""
    d = np.asarray(dist, dtype=float)
    shape = AlgebraShape((1,) * d.shape[0])
    return lipschitz_seminorm(d).compose(shape.sa_basis)


class TestFiberInfimum:
    """测试纤维下确界"""

    def test_box_fiber_lp(self, box, config):
        """测试 max(|v₁|,|v₂|) 在 v₁+v₂=2 上的最小值为 1"""
        est = fiber_infimum(box, np.array([[1.0, 1.0]]), np.array([2.0]), config)
        assert est.is_exact
        assert est.value == pytest.approx(1.0)
        assert np.allclose(est.certificate, [1.0, 1.0])
        assert est.metadata["rank"] == 1

    def test_box_fiber_smooth_tier(self, box, config):
        """测试光滑化路径给出可行上界且接近 1"""
        a = np.array([[1.0, 1.0]])
        est = minimize_affine(box, a, np.array([2.0]), config, tier="smooth")
        assert est.kind is BoundKind.UPPER
        assert est.value >= 1.0 - 1e-12
        assert est.value == pytest.approx(1.0, abs=1e-3)
        assert a @ est.certificate == pytest.approx(2.0)

    def test_identity_constraint(self, euclid, config):
        """测试 Π 为恒等时等于 S(w)"""
        w = np.array([3.0, 4.0])
        est = fiber_infimum(euclid, np.eye(2), w, config)
        assert est.value == pytest.approx(5.0)
        assert est.is_exact

    def test_zero_target(self, euclid, config):
        """测试 w=0 时为 0"""
        est = fiber_infimum(euclid, np.array([[1.0, 1.0]]), np.zeros(1), config)
        assert est.value == pytest.approx(0.0, abs=1e-9)

    def test_euclid_fiber(self, euclid, config):
        """测试 ‖v‖₂ 在 v₁+v₂=2 上的最小值为 √2"""
        est = fiber_infimum(euclid, np.array([[1.0, 1.0]]), np.array([2.0]), config)
        assert est.value == pytest.approx(np.sqrt(2.0), abs=1e-3)
        assert est.value >= np.sqrt(2.0) - 1e-9

    def test_empty_fiber(self, euclid, config):
        """测试秩亏且目标不在像中时标记不可行"""
        pi = np.array([[1.0, 0.0], [1.0, 0.0]])
        est = fiber_infimum(euclid, pi, np.array([1.0, 2.0]), config)
        assert est.infinite
        assert est.metadata["infeasible"]
        assert est.metadata["rank"] == 1


class TestSupportFunction:
    """测试支撑函数"""

    def test_interval(self, config):
        """测试一维 |v| ≤ 1、c=1 时为 1"""
        tensor = np.ones((1, 1, 1, 1), dtype=complex)
        s = AtomicSeminorm(1, [AtomGroup(tensor, np.ones(1))])
        assert support_function(s, np.ones(1), config).value == pytest.approx(1.0)

    def test_zero_functional(self, box, config):
        """测试 c=0 时为 0"""
        est = support_function(box, np.zeros(2), config)
        assert est.value == 0.0
        assert est.is_exact

    def test_two_point_lipschitz(self, config):
        """测试两点空间 d=1 上 δ_p − δ_q 的支撑值为 1"""
        s = sa_lipschitz([[0.0, 1.0], [1.0, 0.0]])
        est = support_function(s, np.array([1.0, -1.0]), config)
        assert est.is_exact
        assert est.value == pytest.approx(1.0)

    def test_kernel_incompatible(self, config):
        """测试不与核正交时为无穷"""
        s = sa_lipschitz([[0.0, 1.0], [1.0, 0.0]])
        est = support_function(s, np.array([1.0, 0.0]), config)
        assert est.infinite

    def test_balanced_symmetry(self, config):
        """测试平衡集上 h(c) = h(−c)"""
        s = sa_lipschitz([[0.0, 1.0, 3.0], [1.0, 0.0, 2.5], [3.0, 2.5, 0.0]])
        c = np.array([0.7, -0.2, -0.5])
        assert support_function(s, c, config).value == pytest.approx(
            support_function(s, -c, config).value
        )

    def test_smooth_tier_agrees_with_lp(self, config):
        """测试交换情形下光滑化路径与 LP 路径一致"""
        s = sa_lipschitz([[0.0, 1.0, 3.0], [1.0, 0.0, 2.5], [3.0, 2.5, 0.0]])
        rng = np.random.default_rng(3)
        for _ in range(3):
            c = rng.standard_normal(3)
            c -= c.mean()
            exact = support_function(s, c, config)
            approx = support_function(s, c, config, tier="smooth")
            assert approx.kind is BoundKind.LOWER
            assert approx.value <= exact.value + 1e-9
            assert approx.value == pytest.approx(exact.value, rel=1e-3)

    def test_nuclear_norm_duality(self, config):
        """测试算子范数球上的支撑值为迹范数"""
        shape = AlgebraShape((2,))
        s = opnorm_seminorm(shape)
        c = shape.element([np.diag([1.0, -0.5])]).coords()
        est = support_function(s, c, config)
        assert est.kind is BoundKind.LOWER
        assert est.value <= 1.5 + 1e-9
        assert est.value == pytest.approx(1.5, abs=2e-3)


class TestSearch:
    """测试球上搜索"""

    def test_ascent_finds_linear_max(self, euclid, config):
        """测试单位圆盘上线性函数的最大值"""
        c = np.array([3.0, 4.0])
        est = retraction_search(
            lambda x: float(c @ x), lambda x: c, euclid, [np.array([1.0, 0.0])], config
        )
        assert est.kind is BoundKind.LOWER
        assert est.value <= 5.0 + 1e-9
        assert est.value == pytest.approx(5.0, abs=1e-2)

    def test_l1_ball_minimization(self, euclid, config):
        """测试 min ‖b − Wα‖₂，‖α‖₁ ≤ 1"""
        base = np.array([2.0, 0.0])
        est = minimize_on_l1_ball(euclid, base, np.eye(2), config)
        assert est.value == pytest.approx(1.0, abs=1e-3)
        assert np.abs(est.certificate).sum() <= 1.0 + 1e-9


class TestConvexBody:
    """测试单位球句柄"""

    def test_membership_and_rays(self, euclid):
        """测试成员判定与射线单调性"""
        body = ConvexBody(euclid)
        assert body.contains(np.zeros(2))
        assert body.contains(np.array([0.6, 0.8]))
        assert not body.contains(np.array([1.0, 1.0]))
        assert body.ray_check(count=8).passed
