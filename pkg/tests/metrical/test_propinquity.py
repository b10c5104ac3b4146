"""
测试对偶度量邻近度上界
"""
import pytest

from proplab.bundles import qvba
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError
from proplab.metrical import (
    MetricalQVB,
    compose_metrical,
    dual_metrical_propinquity_ub,
    identity_metrical_tunnel,
    scalar_action,
    scalar_metrical_tunnel,
)
from proplab.modular import (
    convexify,
    dual_modular_propinquity_ub,
    identity_modular_bridge,
    modular_tunnel_from_bridge,
)
from proplab.qcms import metric_space, one_point


@pytest.fixture
def config():
    """缩小预算的求解配置"""
    return SolverConfig(iterations=1500, polish_iterations=100, samples=4, restarts=2)


@pytest.fixture
def pair_bundle():
    return qvba(metric_space([[0.0, 1.0], [1.0, 0.0]], name="X"), 1)


@pytest.fixture
def pair_metrical(pair_bundle):
    """ℂ 按标量作用"""
    return MetricalQVB(pair_bundle, scalar_action(pair_bundle.module))


@pytest.fixture
def pair_tunnel(pair_bundle, config):
    bridge = convexify(identity_modular_bridge(pair_bundle))
    return modular_tunnel_from_bridge(bridge, radius=1.0, config=config, certify=False)


@pytest.fixture
def scalar_tunnel(pair_tunnel, pair_metrical):
    return scalar_metrical_tunnel(pair_tunnel, pair_metrical, pair_metrical, certify=False)


class TestUpperBound:
    """测试候选的最小值"""

    def test_identity(self, pair_metrical):
        """含恒等度量隧道时上界为 0"""
        est = dual_metrical_propinquity_ub(
            pair_metrical, pair_metrical, [identity_metrical_tunnel(pair_metrical)]
        )
        assert est.value == 0.0
        assert est.kind.value == "upper"

    def test_dominates_modular(self, pair_metrical, pair_bundle, scalar_tunnel):
        """不小于同一批模分量给出的模上界"""
        metrical = dual_metrical_propinquity_ub(pair_metrical, pair_metrical, [scalar_tunnel])
        modular = dual_modular_propinquity_ub(pair_bundle, pair_bundle, [scalar_tunnel.modular])
        assert metrical.value >= modular.value
        assert metrical.metadata["modular_figure"] == modular.value

    def test_monotone(self, pair_metrical, scalar_tunnel):
        """候选增多时上界不增"""
        few = dual_metrical_propinquity_ub(pair_metrical, pair_metrical, [scalar_tunnel])
        more = dual_metrical_propinquity_ub(
            pair_metrical,
            pair_metrical,
            [scalar_tunnel, identity_metrical_tunnel(pair_metrical)],
        )
        assert more.value <= few.value

    def test_triangle(self, pair_metrical, scalar_tunnel, config):
        """复合候选满足三角不等式"""
        eps = 0.02
        chained = compose_metrical(scalar_tunnel, scalar_tunnel, eps, config, certify=False)
        whole = dual_metrical_propinquity_ub(pair_metrical, pair_metrical, [chained])
        part = dual_metrical_propinquity_ub(pair_metrical, pair_metrical, [scalar_tunnel])
        assert whole.value <= 2 * part.value + eps + 1e-12

    def test_empty(self, pair_metrical):
        """度量情形没有回退隧道，候选不能为空"""
        with pytest.raises(PreconditionError):
            dual_metrical_propinquity_ub(pair_metrical, pair_metrical, [])

    def test_not_connecting(self, pair_metrical):
        """不连接两端的候选被拒绝"""
        bundle = qvba(one_point("p"), 1)
        circle = MetricalQVB(bundle, scalar_action(bundle.module))
        with pytest.raises(PreconditionError):
            dual_metrical_propinquity_ub(
                pair_metrical, circle, [identity_metrical_tunnel(pair_metrical)]
            )
