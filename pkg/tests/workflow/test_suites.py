"""
测试性质校验套件
"""
import numpy as np
import pytest

from proplab.config import SuiteSizes
from proplab.exceptions import ConfigurationError
from proplab.workflow import SUITES, verify_suite
from proplab.workflow.suites import MK_TOL, random_plane_space, refinement_relation


@pytest.fixture(scope="module")
def quick():
    return SuiteSizes.quick()


@pytest.fixture(scope="module")
def axioms(quick):
    return verify_suite("axioms", seed=0, sizes=quick)


@pytest.fixture(scope="module")
def tunnels(quick):
    return verify_suite("tunnels", seed=0, sizes=quick)


@pytest.fixture(scope="module")
def modular(quick):
    return verify_suite("modular", seed=0, sizes=quick)


@pytest.fixture(scope="module")
def metrical(quick):
    return verify_suite("metrical", seed=0, sizes=quick)


@pytest.fixture(scope="module")
def chains():
    return verify_suite("chains", seed=0)


class TestAxiomsSuite:
    """测试公理套件"""

    def test_passes(self, axioms):
        assert axioms.all_passed, [r.to_dict() for r in axioms.records if not r.ok]

    def test_tampered_kernel_detected(self, axioms):
        """篡改的半范数以 kernel_defect 记录出现，且不计入未通过"""
        record = next(r for r in axioms.records if r.task_id == "kernel[tampered]")
        assert record.quantity == "kernel_defect"
        assert record.error is None
        assert record.value >= 2
        assert record.metadata["kernel_passed"] is False

    def test_mk_matches_transport(self, axioms, quick):
        """Lip-球上的支撑函数与运输 LP 给出同一个 MK 距离"""
        records = [r for r in axioms.records if r.quantity == "mk_transport_gap"]
        assert len(records) == quick.mk_pairs
        for record in records:
            assert record.value <= MK_TOL
            assert record.metadata["mk"] == pytest.approx(record.metadata["w1"], abs=MK_TOL)

    def test_plane_space_size(self):
        rng = np.random.default_rng(0)
        sizes = {random_plane_space(rng, "P", 2, 12).shape.num_blocks for _ in range(40)}
        assert min(sizes) >= 2
        assert max(sizes) <= 12

    def test_seed_recorded(self, quick):
        report = verify_suite("axioms", seed=5, sizes=quick)
        assert report.seed == 5
        assert report.to_dict()["solver"]["seed"] == 5
        assert report.to_dict()["solver"]["sizes"]["mk_pairs"] == quick.mk_pairs


class TestTunnelsSuite:
    """测试度量隧道套件"""

    def test_passes(self, tunnels):
        assert tunnels.all_passed, [r.to_dict() for r in tunnels.records if not r.ok]

    def test_counts(self, tunnels, quick):
        ids = [r.task_id for r in tunnels.records]
        assert sum(i.startswith("union[") for i in ids) == quick.union_tunnels
        assert sum(i.startswith("bridge[") for i in ids) == quick.bridge_tunnels
        assert sum(i.startswith("target[") for i in ids) == quick.triangle_pairs
        triangles = [r for r in tunnels.records if r.quantity == "propinquity_triangle"]
        assert len(triangles) == quick.triangle_pairs

    def test_union_extent_is_closed_form(self, tunnels):
        for record in tunnels.records:
            if record.task_id.startswith("union["):
                assert record.value == pytest.approx(record.paper_bound, abs=1e-6)

    def test_bridge_extent_within_lambda(self, tunnels):
        for record in tunnels.records:
            if record.task_id.startswith("bridge["):
                assert record.value <= record.paper_bound + record.tolerance


class TestModularSuite:
    """测试模隧道套件"""

    def test_passes(self, modular):
        assert modular.all_passed, [r.to_dict() for r in modular.records if not r.ok]

    def test_ranks_cycle(self, modular, quick):
        """模桥实例的秩依次取 1、2、3"""
        extents = [r for r in modular.records if r.quantity == "modular_extent"]
        assert len(extents) == quick.modular_bridges
        assert {r.task_id.split("p=")[1].rstrip("]") for r in extents} == {"1", "2", "3"}
        assert all(r.metadata["anchors"] >= 2 for r in extents)

    def test_pivots_checked(self, modular, quick):
        pivots = [r for r in modular.records if r.quantity == "dnorm_axioms"]
        assert len(pivots) == quick.modular_bridges
        assert all(r.passed for r in pivots)

    def test_free_legs_certified(self, modular, quick):
        """λ > 0 的自由模隧道在每个秩上都校验两条腿"""
        legs = [
            r
            for r in modular.records
            if r.quantity == "modular_isometry" and "free" in r.task_id
        ]
        assert len(legs) == 2 * 3
        bridged = [
            r
            for r in modular.records
            if r.quantity == "modular_isometry" and "free" not in r.task_id
        ]
        assert len(bridged) == quick.modular_bridges

    def test_fallback_within_ceiling(self, modular):
        records = [r for r in modular.records if r.quantity == "dmod_propinquity"]
        assert records
        assert all(r.value <= r.paper_bound + r.tolerance for r in records)


class TestMetricalSuite:
    """测试度量量子向量丛套件"""

    def test_passes(self, metrical):
        assert metrical.all_passed, [r.to_dict() for r in metrical.records if not r.ok]

    def test_g_condition(self, metrical):
        record = next(r for r in metrical.records if r.quantity == "g_condition")
        assert record.passed


@pytest.mark.slow
class TestAcceptanceScale:
    """以完整验收规模运行各套件"""

    @pytest.mark.parametrize("name", ["axioms", "tunnels", "modular", "metrical"])
    def test_full(self, name):
        report = verify_suite(name, seed=0)
        assert report.all_passed, [r.to_dict() for r in report.records if not r.ok]

    def test_full_counts(self):
        sizes = SuiteSizes()
        axioms = verify_suite("axioms", seed=0)
        assert sum(r.quantity == "mk_transport_gap" for r in axioms.records) == 50
        modular = verify_suite("modular", seed=0)
        extents = [r for r in modular.records if r.quantity == "modular_extent"]
        assert len(extents) == sizes.modular_bridges == 10
        assert sizes.pivot_samples == 1000


class TestChainsSuite:
    """测试二进网格链"""

    def test_passes(self, chains):
        assert chains.all_passed, [r.to_dict() for r in chains.records if not r.ok]

    def test_steps_halve(self, chains):
        """相邻上界按 2⁻ⁿ 衰减"""
        steps = [r for r in chains.records if r.quantity == "chain_step"]
        assert len(steps) == 5 - 1
        for n, record in enumerate(steps):
            assert record.value == pytest.approx(steps[0].value * 2.0**-n)

    def test_chain_bounds(self, chains):
        """复合隧道的数值 extent 与 figure 都不超过 C·2^{1−n} + Σε"""
        bounds = {r.task_id: r for r in chains.records if r.quantity == "chain_bound"}
        assert bounds
        for record in bounds.values():
            assert record.passed
            assert record.value <= record.paper_bound + record.tolerance
            assert record.metadata["figure"] <= record.paper_bound + 1e-9
        constant = next(r.value for r in chains.records if r.task_id == "step[0]")
        assert bounds["chain[0,2]"].paper_bound == pytest.approx(2 * constant + 2.0**-5)


class TestSuites:
    """测试套件注册"""

    def test_names(self):
        assert set(SUITES) == {"axioms", "bridges", "tunnels", "modular", "metrical", "chains"}

    def test_unknown(self):
        with pytest.raises(ConfigurationError):
            verify_suite("nope")

    def test_bridges_suite(self):
        report = verify_suite("bridges", seed=1)
        assert report.total > 0
        assert report.all_passed

    def test_refinement_relation_covers_both_grids(self):
        relation = refinement_relation(1)
        assert {i for i, _ in relation} == {0, 1, 2}
        assert {j for _, j in relation} == {0, 1, 2, 3, 4}
