"""
测试模上的作用与度量丛
"""
import numpy as np
import pytest

from proplab.bundles import qvba
from proplab.exceptions import PreconditionError, StructuralError, ValidationError
from proplab.metrical import (
    ModuleAction,
    action_check,
    base_multiplication_action,
    g_condition_check,
    make_metrical,
    scalar_action,
    scalar_space,
)
from proplab.qcms import matrix_space, metric_space, one_point

IDEMPOTENT = np.array([[1.0, 1.0], [0.0, 0.0]])


@pytest.fixture
def pair_space():
    """两点空间，d = 1"""
    return metric_space([[0.0, 1.0], [1.0, 0.0]], name="X")


@pytest.fixture
def pair_bundle(pair_space):
    return qvba(pair_space, 1)


def oblique(b, omega):
    """ℂ² 作用在 ℂ² 上：e₁ ↦ 非正交幂等 P，e₂ ↦ I − P"""
    z = omega[0::2] + 1j * omega[1::2]
    b1, b2 = complex(b.blocks[0][0, 0]), complex(b.blocks[1][0, 0])
    out = (b1 * IDEMPOTENT + b2 * (np.eye(2) - IDEMPOTENT)) @ z
    return np.column_stack([out.real, out.imag]).ravel()


class TestModuleAction:
    """测试作用张量"""

    def test_shape_mismatch(self, pair_bundle):
        """张量形状必须是 (实维数, 模维数, 模维数)"""
        with pytest.raises(StructuralError):
            ModuleAction(scalar_space(), pair_bundle.module, np.zeros((2, 3, 3)))

    def test_scalar_operator(self, pair_bundle):
        """ℂ 中的 z 作用为乘以 z"""
        action = scalar_action(pair_bundle.module)
        z = scalar_space().shape.scalar(0.5 - 2j)
        omega = pair_bundle.module.unit_element()
        expected = pair_bundle.module.act(pair_bundle.module.base.scalar(0.5 - 2j), omega)
        assert np.allclose(action.apply(z, omega), expected)

    def test_scalar_check(self, pair_bundle):
        """标量作用是可伴的单位 *-态射"""
        assert action_check(scalar_action(pair_bundle.module), 8).passed

    def test_multiplication_check(self, pair_bundle):
        """交换底空间上的模乘法是可伴作用"""
        assert action_check(base_multiplication_action(pair_bundle), 8).passed

    def test_noncommutative_multiplication(self):
        """非交换底空间上的左乘不是模映射"""
        bundle = qvba(matrix_space("pauli"), 1, validate=False)
        with pytest.raises(PreconditionError):
            base_multiplication_action(bundle)

    def test_oblique_not_adjointable(self, pair_space):
        """非正交幂等给出的作用是单位同态，但不可伴"""
        bundle = qvba(one_point("p"), 2)
        action = ModuleAction.tabulate(pair_space, bundle.module, oblique)
        report = action_check(action, 8)
        assert not report.passed
        assert report.details["unital"] >= -1e-8
        assert report.details["multiplicative"] >= -1e-8
        assert report.details["adjointable"] < 0


class TestMetricalBundle:
    """测试度量丛的构造"""

    def test_scalar(self, pair_bundle):
        """ℂ 按标量作用在任意度量化丛上"""
        acting = scalar_space()
        metrical = make_metrical(pair_bundle, acting, scalar_action(pair_bundle.module, acting))
        assert metrical.report is not None and metrical.report.passed
        assert metrical.flat is pair_bundle
        assert metrical.alt is acting

    def test_multiplication(self, pair_bundle, pair_space):
        """底代数按模乘法作用，G = (x + y)z"""
        metrical = make_metrical(
            pair_bundle, pair_space, base_multiplication_action(pair_bundle), sample_count=64
        )
        assert metrical.report.passed

    def test_callable_action(self, pair_bundle, pair_space):
        """作用也可以是实双线性函数"""
        metrical = make_metrical(pair_bundle, pair_space, pair_bundle.module.act)
        assert metrical.action.tensor.shape == (4, 4, 4)

    def test_oblique_rejected(self, pair_space):
        """不可伴的作用被拒绝"""
        bundle = qvba(one_point("p"), 2)
        with pytest.raises(ValidationError):
            make_metrical(bundle, pair_space, oblique)

    def test_wrong_acting_space(self, pair_bundle, pair_space):
        """作用的空间与参数不一致"""
        with pytest.raises(StructuralError):
            make_metrical(pair_bundle, pair_space, scalar_action(pair_bundle.module))


class TestGCondition:
    """测试 G 条件的两种读法"""

    def test_readings(self, pair_bundle, pair_space):
        """D(ω) 读法通过；‖ω‖ 读法的余量不会更好"""
        metrical = make_metrical(pair_bundle, pair_space, base_multiplication_action(pair_bundle))
        report = g_condition_check(metrical, 32, seed=3)
        assert report.passed
        assert report.details["norm_reading"] <= report.details["dnorm_reading"] + 1e-12

    def test_norm_reading_fails_for_units(self, pair_bundle):
        """标量作用下 b = 1 时 D(ω) ≤ ‖ω‖ 一般不成立"""
        metrical = make_metrical(pair_bundle, scalar_space(), scalar_action(pair_bundle.module))
        report = g_condition_check(metrical, 200, seed=1)
        assert report.passed
        assert report.details["norm_reading"] < 0
