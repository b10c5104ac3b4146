"""
测试对偶模邻近度上界
"""
import pytest

from proplab.bundles import qvba
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError
from proplab.modular import (
    base_modular_consistency,
    compose_modular,
    convexify,
    dual_modular_propinquity_ub,
    fallback_ceiling,
    fallback_modular_tunnel,
    identity_modular_bridge,
    identity_modular_tunnel,
    modular_candidate_pool,
    modular_tunnel_from_bridge,
)
from proplab.qcms import metric_space, one_point


@pytest.fixture
def config():
    """缩小预算的求解配置"""
    return SolverConfig(iterations=1500, polish_iterations=100, samples=4, restarts=2)


@pytest.fixture
def point_bundle():
    return qvba(one_point("p"), 1)


@pytest.fixture
def pair_bundle():
    """两点空间上的 Free(C(X), 1)，diam = 1"""
    return qvba(metric_space([[0.0, 1.0], [1.0, 0.0]], name="X"), 1)


@pytest.fixture
def pair_tunnel(pair_bundle, config):
    """单位元锚点、半径 1 的模隧道"""
    bridge = convexify(identity_modular_bridge(pair_bundle))
    return modular_tunnel_from_bridge(bridge, radius=1.0, config=config, certify=False)


class TestUpperBound:
    """测试候选的最小值"""

    def test_identity(self, pair_bundle):
        """含恒等模隧道时上界为 0"""
        est = dual_modular_propinquity_ub(
            pair_bundle, pair_bundle, [identity_modular_tunnel(pair_bundle)]
        )
        assert est.value == 0.0
        assert est.kind.value == "upper"

    def test_symmetric(self, pair_bundle, pair_tunnel):
        """候选取逆后上界不变"""
        forward = dual_modular_propinquity_ub(pair_bundle, pair_bundle, [pair_tunnel])
        backward = dual_modular_propinquity_ub(pair_bundle, pair_bundle, [pair_tunnel.inverse()])
        assert forward.value == backward.value

    def test_monotone(self, pair_bundle, pair_tunnel):
        """候选增多时上界不增"""
        few = dual_modular_propinquity_ub(pair_bundle, pair_bundle, [pair_tunnel])
        more = dual_modular_propinquity_ub(
            pair_bundle, pair_bundle, [pair_tunnel, identity_modular_tunnel(pair_bundle)]
        )
        assert more.value <= few.value

    def test_triangle(self, pair_bundle, pair_tunnel, config):
        """复合候选满足三角不等式"""
        eps = 0.01
        chained = compose_modular(pair_tunnel, pair_tunnel, eps, config, certify=False)
        whole = dual_modular_propinquity_ub(
            pair_bundle, pair_bundle, [chained], config, certify=False
        )
        part = dual_modular_propinquity_ub(pair_bundle, pair_bundle, [pair_tunnel])
        assert whole.value <= 2 * part.value + eps + 1e-12

    def test_not_connecting(self, pair_bundle, point_bundle):
        """不连接两端的候选被拒绝"""
        with pytest.raises(PreconditionError):
            dual_modular_propinquity_ub(
                pair_bundle, point_bundle, [identity_modular_tunnel(pair_bundle)]
            )


class TestFallback:
    """测试回退隧道"""

    def test_diameter_bound(self, point_bundle, pair_bundle, config):
        """回退隧道的 figure 不超过 max{2, diam 𝔄, diam 𝔅}"""
        tunnel = fallback_modular_tunnel(point_bundle, pair_bundle, config, certify=False)
        assert tunnel.figure <= 2.0
        assert tunnel.figure == pytest.approx(1.0)
        assert tunnel.notes["fallback"]

    def test_empty_candidates(self, point_bundle, pair_bundle, config):
        """候选为空时使用回退隧道"""
        est = dual_modular_propinquity_ub(point_bundle, pair_bundle, [], config, certify=False)
        assert est.metadata["fallback"]
        assert est.value <= 2.0

    def test_poor_candidate(self, pair_bundle, config):
        """候选的 figure 过大时上界仍不超过 max{2, diam}"""
        identity = identity_modular_tunnel(pair_bundle)
        poor = compose_modular(identity, identity, 5.0, config, certify=False)
        assert poor.figure == pytest.approx(5.0)
        est = dual_modular_propinquity_ub(pair_bundle, pair_bundle, [poor], config, certify=False)
        assert est.value <= 2.0
        assert est.metadata["fallback"]
        assert est.metadata["candidates"] == 2

    def test_good_candidate_skips_fallback(self, pair_bundle, pair_tunnel, config):
        """最优候选不超过 2 时不构造回退隧道"""
        pool = modular_candidate_pool(pair_bundle, pair_bundle, [pair_tunnel], config)
        assert len(pool) == 1 and pool[0] is pair_tunnel

    def test_ceiling(self, point_bundle, pair_bundle):
        assert fallback_ceiling(point_bundle, pair_bundle) == 2.0


class TestBaseConsistency:
    """测试底空间邻近度与模邻近度的关系"""

    def test_same_candidates(self, pair_bundle, pair_tunnel):
        """同一批候选：底空间上界不超过模上界"""
        report = base_modular_consistency(
            pair_bundle, pair_bundle, [pair_tunnel, identity_modular_tunnel(pair_bundle)]
        )
        assert report.passed
