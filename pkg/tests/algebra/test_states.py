"""
测试态与 𝒮₁(𝔇|x)
"""
import numpy as np
import pytest

from proplab.algebra import (
    AlgebraShape,
    State,
    in_level_set,
    level_state,
    pure_states,
    sample_states,
    state_eval,
)
from proplab.exceptions import StructuralError, UnsupportedModeError, ValidationError


class TestState:
    """测试态的构造与求值"""

    def test_unital(self):
        """测试 φ(1) = 1"""
        shape = AlgebraShape((2, 1))
        for phi in sample_states(shape, 10, seed=3):
            assert state_eval(phi, shape.unit()) == pytest.approx(1.0)

    def test_normalized_trace(self):
        """测试 2×2 归一化迹在 diag(1,3) 上为 2"""
        shape = AlgebraShape((2,))
        tau = State.tracial(shape)
        a = shape.element([np.diag([1.0, 3.0])])
        assert state_eval(tau, a).real == pytest.approx(2.0)

    def test_point_mass(self):
        """测试点质量态即求值"""
        shape = AlgebraShape((1, 1, 1))
        f = shape.diagonal([0.5, -2.0, 7.0])
        assert state_eval(State.point_mass(shape, 1), f).real == pytest.approx(-2.0)

    def test_invalid_density(self):
        """测试非法密度矩阵被拒绝"""
        shape = AlgebraShape((2,))
        with pytest.raises(ValidationError):
            State(shape, [np.diag([1.5, -0.5])])
        with pytest.raises(ValidationError):
            State(shape, [np.eye(2)])

    def test_functional_matches_eval(self):
        """测试泛函向量与求值一致"""
        shape = AlgebraShape((2, 1))
        rng = np.random.default_rng(0)
        for phi in sample_states(shape, 6, seed=1):
            a = shape.random_self_adjoint(rng)
            assert phi.functional() @ a.coords() == pytest.approx(phi(a).real)
            assert phi.sa_functional() @ a.sa_coords() == pytest.approx(phi(a).real)

    def test_bounded_by_norm(self):
        """测试 |φ(a)| ≤ ‖a‖"""
        shape = AlgebraShape((3, 1))
        rng = np.random.default_rng(4)
        states = sample_states(shape, 20, seed=5)
        for _ in range(20):
            a = shape.random_element(rng)
            for phi in states:
                assert abs(phi(a)) <= a.norm() + 1e-10

    def test_shape_mismatch(self):
        """测试态与元素形状不一致"""
        with pytest.raises(StructuralError):
            state_eval(State.tracial(AlgebraShape((2,))), AlgebraShape((1, 1)).unit())


class TestSampling:
    """测试态的采样与枚举"""

    def test_pure_states_commutative(self):
        """测试 3 点空间有 3 个纯态"""
        states = pure_states(AlgebraShape((1, 1, 1)))
        assert len(states) == 3
        assert np.allclose(states[2].weights(), [0, 0, 1])

    def test_pure_states_noncommutative(self):
        """测试非交换形状不能枚举纯态"""
        with pytest.raises(UnsupportedModeError):
            pure_states(AlgebraShape((2,)))

    def test_deterministic(self):
        """测试同一种子得到相同样本"""
        shape = AlgebraShape((2, 2))
        first = sample_states(shape, 8, seed=11)
        second = sample_states(shape, 8, seed=11)
        for a, b in zip(first, second):
            assert all(np.array_equal(x, y) for x, y in zip(a.blocks, b.blocks))

    def test_count_validation(self):
        """测试采样数量必须为正"""
        with pytest.raises(ValidationError):
            sample_states(AlgebraShape((1,)), 0)


class TestLevelSet:
    """测试 𝒮₁(𝔇|x)"""

    def test_unit_pivot(self):
        """测试 x = 1 时任意态都在水平集中"""
        shape = AlgebraShape((2, 1))
        phi = level_state(shape.unit())
        assert phi is not None
        assert in_level_set(phi, shape.unit())

    def test_projection_pivot(self):
        """测试 x 为投影时见证态支撑在其值域上"""
        shape = AlgebraShape((1, 1, 1))
        x = shape.diagonal([1.0, 0.0, 1.0])
        phi = level_state(x)
        assert phi is not None
        assert np.allclose(phi.weights(), [0.5, 0.0, 0.5])
        assert in_level_set(phi, x)
        assert not in_level_set(State.point_mass(shape, 1), x)

    def test_empty_level_set(self):
        """测试 x 无不动向量时水平集为空"""
        shape = AlgebraShape((2,))
        x = shape.element([np.array([[0.0, 1.0], [0.0, 0.0]])])
        assert level_state(x) is None
