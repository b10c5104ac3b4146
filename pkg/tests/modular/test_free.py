"""
测试自由模隧道
"""
import pytest

from proplab.bundles import modular_isometry_check, qvba
from proplab.config import SolverConfig
from proplab.exceptions import PreconditionError, StructuralError
from proplab.modular import free_gamma, free_module_tunnel, free_tunnel_figure
from proplab.qcms import identity_bridge, identity_tunnel, one_point, tunnel_from_bridge
from proplab.seminorms import leibniz_f


@pytest.fixture
def config():
    """缩小预算的求解配置"""
    return SolverConfig(iterations=1500, polish_iterations=100, samples=4, restarts=2)


@pytest.fixture
def point():
    return one_point("p")


@pytest.fixture
def slack_tunnel(point, config):
    """单点空间上 figure = 0.1 的隧道"""
    return tunnel_from_bridge(
        identity_bridge(point), point, point, 0.1, force=True, config=config, certify=False
    )


class TestFormula:
    """测试 γ 与 extent 上界"""

    def test_gamma(self):
        """λ = 0.1、p = 1、Leibniz F：γ = √1.96 = 1.4"""
        assert free_gamma(0.1, 1, leibniz_f) == pytest.approx(1.4)

    def test_figure(self):
        """2(γ − 1)/γ + λ = 0.8/1.4 + 0.1"""
        assert free_tunnel_figure(0.1, 1, leibniz_f) == pytest.approx(0.8 / 1.4 + 0.1)
        assert free_tunnel_figure(0.1, 1, leibniz_f) == pytest.approx(0.6714, abs=1e-4)

    def test_zero(self):
        """λ = 0 时 γ = 1，上界为 0"""
        assert free_tunnel_figure(0.0, 2, leibniz_f) == 0.0

    def test_rank_increases(self):
        """秩越大上界越大"""
        assert free_tunnel_figure(0.1, 2, leibniz_f) > free_tunnel_figure(0.1, 1, leibniz_f)


class TestConstruction:
    """测试自由模隧道的构造"""

    def test_identity_base(self, point, config):
        """恒等底隧道给出恒等模隧道"""
        tunnel = free_module_tunnel(identity_tunnel(point), 1, config=config)
        assert tunnel.figure == 0.0
        assert tunnel.stages == 0

    def test_figure(self, slack_tunnel, config):
        """figure = 2(γ − 1)/γ + λ，枢纽模为 𝔄 ⊕ 𝔇 ⊕ 𝔅 三段"""
        tunnel = free_module_tunnel(slack_tunnel, 1, config=config, certify=False)
        assert tunnel.figure == pytest.approx(0.8 / 1.4 + 0.1)
        assert tunnel.notes["gamma"] == pytest.approx(1.4)
        assert tunnel.base.figure == tunnel.figure
        assert len(tunnel.pivot.module.slots) == 3
        assert tunnel.pivot.base.shape.num_blocks == 4

    def test_legs_are_isometries(self, slack_tunnel, config):
        """Θ_𝔄 与 Θ_𝔅 是模等距"""
        tunnel = free_module_tunnel(slack_tunnel, 1, config=config, certify=False)
        for leg, end in (
            (tunnel.leg_domain, tunnel.domain),
            (tunnel.leg_codomain, tunnel.codomain),
        ):
            report = modular_isometry_check(
                leg, tunnel.pivot, end, 3, config=config, tol=1e-3, check_base=False
            )
            assert report.passed

    def test_bad_rank(self, slack_tunnel):
        """p ≥ 1"""
        with pytest.raises(PreconditionError):
            free_module_tunnel(slack_tunnel, 0)

    def test_bundle_rank_mismatch(self, slack_tunnel, point):
        """给定丛的秩与 p 不一致"""
        with pytest.raises(StructuralError):
            free_module_tunnel(slack_tunnel, 2, domain=qvba(point, 1, validate=False))
