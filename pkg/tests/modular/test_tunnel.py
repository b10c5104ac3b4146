"""
测试模隧道：由模桥构造、复合、取逆与 extent
"""
import numpy as np
import pytest

from proplab.bundles import modular_isometry_check, qvba, scale_to_unit_ball
from proplab.config import SolverConfig
from proplab.exceptions import EndpointMismatchError, PreconditionError, UnsupportedModeError
from proplab.kernels import BoundKind, Estimate
from proplab.modular import (
    CONVEX_RADIUS,
    ModularBridge,
    base_length,
    compose_modular,
    convexify,
    extent_consistency,
    identity_modular_bridge,
    identity_modular_tunnel,
    invert_modular,
    modular_extent,
    modular_reach,
    modular_tunnel_from_bridge,
)
from proplab.qcms import correspondence_bridge, matrix_space, metric_space, one_point

QUARTER_TURNS = [
    np.array([1.0, 0.0]),
    np.array([0.0, 1.0]),
    np.array([-1.0, 0.0]),
    np.array([0.0, -1.0]),
]


@pytest.fixture
def config():
    """缩小预算的求解配置"""
    return SolverConfig(
        iterations=1500, polish_iterations=100, ascent_iterations=80, samples=4, restarts=2
    )


@pytest.fixture
def circle():
    """Free(ℂ, 1)，D = |·|"""
    return qvba(one_point("p"), 1)


@pytest.fixture
def pair_bundle():
    """两点空间上的 Free(C(X), 1)"""
    return qvba(metric_space([[0.0, 1.0], [1.0, 0.0]], name="X"), 1)


@pytest.fixture
def pair_tunnel(pair_bundle, config):
    """单位元锚点、半径 1 的模隧道"""
    bridge = convexify(identity_modular_bridge(pair_bundle))
    return modular_tunnel_from_bridge(bridge, radius=1.0, config=config, certify=False)


class TestFromBridge:
    """测试由模桥构造模隧道"""

    def test_requires_convex(self, circle, config):
        """未凸化的桥被拒绝"""
        bridge = identity_modular_bridge(circle, QUARTER_TURNS)
        with pytest.raises(PreconditionError):
            modular_tunnel_from_bridge(bridge, config=config, certify=False)

    def test_lambda_below_length(self, circle, config):
        """λ 低于 r + 模 reach 时被拒绝"""
        bridge = convexify(identity_modular_bridge(circle, QUARTER_TURNS))
        with pytest.raises(PreconditionError):
            modular_tunnel_from_bridge(bridge, lam=0.1, radius=0.3, config=config, certify=False)

    def test_circle_certified(self, circle, config):
        """圆形情形：枢纽与两条腿通过校验，figure = λ + ε"""
        bridge = convexify(identity_modular_bridge(circle, QUARTER_TURNS))
        tunnel = modular_tunnel_from_bridge(
            bridge, radius=0.3, config=config, sample_count=3, pivot_samples=6
        )
        assert tunnel.report is not None and tunnel.report.passed
        assert tunnel.pivot.report is not None and tunnel.pivot.report.passed
        assert tunnel.figure == pytest.approx(0.3)
        assert tunnel.notes["radius_source"] == "user"

    def test_figure(self, pair_tunnel):
        """λ 缺省为 max{length(γ_♭), r + reach} = 1"""
        assert pair_tunnel.figure == pytest.approx(1.0)
        assert pair_tunnel.notes["eps"] == 0.0

    def test_extent_below_figure(self, pair_tunnel, config):
        """数值 extent 不超过可证上界"""
        assert extent_consistency(pair_tunnel, config).passed
        assert modular_extent(pair_tunnel, config).value <= pair_tunnel.figure + 1e-3

    def test_upper_extent_above_figure_not_comparable(self, pair_tunnel, config, monkeypatch):
        """上界估计高于 figure 时不能算作通过"""
        above = Estimate(pair_tunnel.figure + 1.0, BoundKind.UPPER)
        monkeypatch.setattr(pair_tunnel, "extent", lambda config=None: above)
        report = extent_consistency(pair_tunnel, config)
        assert not report.passed
        assert report.details["comparable"] is False
        assert report.worst_margin == pytest.approx(1e-3 - 1.0)

    def test_legs_are_isometries(self, pair_tunnel, config):
        """两条腿是模等距"""
        for leg, end in (
            (pair_tunnel.leg_domain, pair_tunnel.domain),
            (pair_tunnel.leg_codomain, pair_tunnel.codomain),
        ):
            report = modular_isometry_check(
                leg, pair_tunnel.pivot, end, 3, config=config, tol=1e-3, check_base=False
            )
            assert report.passed

    def test_default_radius_between_bundles(self, config):
        """两个不同丛之间的缺省半径取可证值 1，隧道通过枢纽与两腿的校验"""
        source = qvba(metric_space([[0.0, 1.0], [1.0, 0.0]], name="X"), 1)
        target = qvba(metric_space([[0.0, 1.5], [1.5, 0.0]], name="Y"), 1)
        bridge = convexify(
            ModularBridge(
                correspondence_bridge(source.base, target.base, [(0, 0), (1, 1)]),
                source,
                target,
                [scale_to_unit_ball(source)],
                [scale_to_unit_ball(target)],
            )
        )
        tunnel = modular_tunnel_from_bridge(
            bridge, config=config, sample_count=3, pivot_samples=6
        )
        assert tunnel.notes["radius"] == CONVEX_RADIUS
        assert tunnel.notes["radius_source"] == "certified"
        required = max(
            base_length(bridge, config).value, CONVEX_RADIUS + modular_reach(bridge).value
        )
        assert tunnel.figure == pytest.approx(required)
        assert tunnel.figure >= 1.0
        assert tunnel.report is not None and tunnel.report.passed
        assert tunnel.pivot.report is not None and tunnel.pivot.report.passed

    def test_unsupported_metric(self, config):
        """非交换底上的秩二丛没有精确的 K，拒绝构造规范集合"""
        bundle = qvba(matrix_space("pauli"), 2, validate=False)
        bridge = convexify(identity_modular_bridge(bundle))
        with pytest.raises(UnsupportedModeError):
            modular_tunnel_from_bridge(bridge, config=config, certify=False)

    def test_zero_length_slack(self, circle, config):
        """λ = 0 时 ε 缺省为 1e-6"""
        bridge = convexify(identity_modular_bridge(circle))
        tunnel = modular_tunnel_from_bridge(
            bridge, lam=0.0, radius=1e-9, config=config, certify=False
        )
        assert tunnel.figure == pytest.approx(1e-6)


class TestCompose:
    """测试复合与取逆"""

    def test_identity_chain(self, circle, config):
        """compose(id, id, ε) 的 figure 为 ε，数值 extent 不超过它"""
        ident = identity_modular_tunnel(circle)
        tunnel = compose_modular(ident, ident, 0.1, config, certify=False)
        assert tunnel.figure == pytest.approx(0.1)
        assert tunnel.stages == 0
        assert extent_consistency(tunnel, config).passed

    def test_endpoint_mismatch(self, circle, pair_bundle, config):
        """端点不一致"""
        with pytest.raises(EndpointMismatchError):
            compose_modular(
                identity_modular_tunnel(circle), identity_modular_tunnel(pair_bundle), 0.1, config
            )

    def test_nonpositive_eps(self, circle, config):
        """ε 必须为正"""
        ident = identity_modular_tunnel(circle)
        with pytest.raises(PreconditionError):
            compose_modular(ident, ident, 0.0, config)

    def test_figures_add(self, pair_tunnel, config):
        """figure = e₁ + e₂ + ε"""
        tunnel = compose_modular(pair_tunnel, pair_tunnel, 0.05, config, certify=False)
        assert tunnel.figure == pytest.approx(2.05)
        assert tunnel.stages == 2

    def test_inverse(self, pair_tunnel):
        """取逆交换两端，figure 不变"""
        inverse = invert_modular(pair_tunnel)
        assert inverse.domain is pair_tunnel.codomain
        assert inverse.codomain is pair_tunnel.domain
        assert inverse.figure == pair_tunnel.figure
        assert inverse.base.figure == pair_tunnel.base.figure

    def test_identity_extent(self, circle, config):
        """恒等模隧道的 extent 为 0"""
        assert modular_extent(identity_modular_tunnel(circle), config).value == pytest.approx(
            0.0, abs=1e-9
        )
