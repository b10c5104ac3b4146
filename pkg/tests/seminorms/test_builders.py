"""
测试 Lip-范数构造器与抽样校验
"""
import numpy as np
import pytest

from proplab.algebra import AlgebraShape, direct_sum
from proplab.exceptions import ValidationError
from proplab.seminorms import (
    PAULI_X,
    combine_max,
    commutator_seminorm,
    fuzzy_sphere_seminorm,
    kernel_check,
    leibniz_f,
    lipschitz_seminorm,
    pauli_seminorm,
    quasi_leibniz_check,
    spin_generators,
    validate_metric,
)


@pytest.fixture
def square_metric():
    """四点环（相邻距离 1，对角 2）"""
    return np.array(
        [
            [0.0, 1.0, 2.0, 1.0],
            [1.0, 0.0, 1.0, 2.0],
            [2.0, 1.0, 0.0, 1.0],
            [1.0, 2.0, 1.0, 0.0],
        ]
    )


class TestMetricValidation:
    """测试度量公理检查"""

    def test_valid_metric(self, square_metric):
        """测试合法度量"""
        assert validate_metric(square_metric).shape == (4, 4)

    def test_triangle_violation(self):
        """测试违反三角不等式"""
        d = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        with pytest.raises(ValidationError) as exc:
            validate_metric(d)
        assert exc.value.witnesses

    def test_asymmetric_and_degenerate(self):
        """测试不对称与零距离"""
        with pytest.raises(ValidationError):
            validate_metric(np.array([[0.0, 1.0], [2.0, 0.0]]))
        with pytest.raises(ValidationError):
            validate_metric(np.zeros((2, 2)))


class TestCommutator:
    """测试交换子半范数"""

    def test_two_by_two_oracle(self):
        """测试 D=[[0,1],[1,0]]、a=diag(1,0) 时 ‖[D,a]‖ = 1"""
        shape = AlgebraShape((1, 1))
        lip = commutator_seminorm(shape, PAULI_X)
        a = shape.diagonal([1.0, 0.0])
        assert lip(a.coords()) == pytest.approx(1.0)

    def test_scaling(self):
        """测试 D 缩放 t 倍时半范数缩放 t 倍"""
        shape = AlgebraShape((1, 1))
        a = shape.diagonal([0.3, -2.0])
        base = commutator_seminorm(shape, PAULI_X)(a.coords())
        scaled = commutator_seminorm(shape, 2.5 * PAULI_X)(a.coords())
        assert scaled == pytest.approx(2.5 * base)

    def test_commuting_operator_gives_zero(self):
        """测试与表示交换的算子给出零半范数"""
        shape = AlgebraShape((1, 1))
        lip = commutator_seminorm(shape, np.diag([1.0, -1.0]))
        rng = np.random.default_rng(0)
        for _ in range(5):
            assert lip(shape.random_element(rng).coords()) == pytest.approx(0.0, abs=1e-12)

    def test_non_self_adjoint_rejected(self):
        """测试非自伴算子被拒绝"""
        with pytest.raises(ValidationError):
            commutator_seminorm(AlgebraShape((2,)), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_spin_relations(self):
        """测试自旋生成元满足 [J_x, J_y] = i J_z"""
        jx, jy, jz = spin_generators(3)
        assert np.allclose(jx @ jy - jy @ jx, 1j * jz)


class TestKernelCheck:
    """测试核校验"""

    def test_connected_metric_passes(self, square_metric):
        """测试连通度量空间的 Lipschitz 半范数通过"""
        lip = lipschitz_seminorm(square_metric)
        assert kernel_check(lip, AlgebraShape((1,) * 4)).passed

    def test_zero_operator_fails(self):
        """测试 D=0 时核为整个代数"""
        shape = AlgebraShape((2,))
        report = kernel_check(commutator_seminorm(shape, np.zeros((2, 2))), shape)
        assert not report.passed
        assert report.details["kernel_dim"] == 4

    def test_uncoupled_direct_sum_fails(self):
        """测试无耦合原子的直和半范数核为二维"""
        one = AlgebraShape((1,))
        ds = direct_sum(one, one)
        lip = lipschitz_seminorm(np.zeros((1, 1)))
        combined = combine_max(
            [lip.compose(ds.proj_left.matrix), lip.compose(ds.proj_right.matrix)]
        )
        report = kernel_check(combined, ds.shape)
        assert not report.passed
        assert report.details["kernel_dim"] == 2

    def test_fuzzy_sphere_passes(self):
        """测试模糊球面半范数的核为 ℂ1"""
        assert kernel_check(fuzzy_sphere_seminorm(3), AlgebraShape((3,))).passed
        assert kernel_check(pauli_seminorm(), AlgebraShape((2,))).passed


class TestQuasiLeibniz:
    """测试拟 Leibniz 抽样校验"""

    def test_lipschitz_passes(self, square_metric):
        """测试 Lipschitz 半范数满足 Leibniz 不等式"""
        lip = lipschitz_seminorm(square_metric)
        report = quasi_leibniz_check(lip, leibniz_f, AlgebraShape((1,) * 4), sample_count=200)
        assert report.passed
        assert report.worst_margin >= -1e-8

    def test_commutator_passes(self):
        """测试交换子半范数满足 Leibniz 不等式"""
        report = quasi_leibniz_check(
            fuzzy_sphere_seminorm(3), leibniz_f, AlgebraShape((3,)), sample_count=200
        )
        assert report.passed

    def test_constructed_violation(self, square_metric):
        """测试 2·Lip 对 F=½(x l′ + y l) 报告失败"""
        lip = lipschitz_seminorm(square_metric).scaled(2.0)

        def half(x, y, lx, ly):
            return 0.5 * (x * ly + y * lx)

        report = quasi_leibniz_check(lip, half, AlgebraShape((1,) * 4), sample_count=200)
        assert not report.passed
        assert report.witnesses
