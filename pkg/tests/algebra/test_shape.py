"""
测试代数形状、元素与 C*-范数
"""
import numpy as np
import pytest

from proplab.algebra import AlgebraShape, direct_sum_elements, opnorm, re_im
from proplab.exceptions import StructuralError


@pytest.fixture
def rng():
    """固定种子的随机数生成器"""
    return np.random.default_rng(7)


@pytest.fixture
def mixed_shape():
    """M2⊕C⊕M3"""
    return AlgebraShape((2, 1, 3))


class TestAlgebraShape:
    """测试形状"""

    def test_dimensions(self, mixed_shape):
        """测试维数与偏移"""
        assert mixed_shape.num_blocks == 3
        assert mixed_shape.dim == 4 + 1 + 9
        assert mixed_shape.real_dim == 28
        assert mixed_shape.offsets == (0, 8, 10)
        assert mixed_shape.label == "M2⊕C⊕M3"
        assert not mixed_shape.is_commutative
        assert AlgebraShape((1, 1)).is_commutative

    def test_invalid_shapes(self):
        """测试非法块维数"""
        with pytest.raises(StructuralError):
            AlgebraShape(())
        with pytest.raises(StructuralError):
            AlgebraShape((2, 0))
        with pytest.raises(StructuralError):
            AlgebraShape((65,))

    def test_sa_basis_orthonormal(self, mixed_shape):
        """测试自伴基正交归一"""
        basis = mixed_shape.sa_basis
        assert basis.shape == (mixed_shape.real_dim, mixed_shape.sa_dim)
        assert np.allclose(basis.T @ basis, np.eye(mixed_shape.sa_dim))

    def test_sa_coords_round_trip(self, mixed_shape, rng):
        """测试自伴元素经自伴坐标还原"""
        a = mixed_shape.random_self_adjoint(rng)
        back = mixed_shape.from_sa_coords(a.sa_coords())
        assert back.allclose(a)
        assert back.is_self_adjoint()

    def test_unit_sa_coords(self, mixed_shape):
        """测试单位元的自伴坐标"""
        unit = mixed_shape.from_sa_coords(mixed_shape.unit_sa_coords)
        assert unit.allclose(mixed_shape.unit())


class TestOpnorm:
    """测试 C*-范数"""

    def test_unit_and_zero(self, mixed_shape):
        """测试单位元范数为 1、零元范数为 0"""
        assert opnorm(mixed_shape, mixed_shape.unit()) == pytest.approx(1.0)
        assert opnorm(mixed_shape, mixed_shape.zero()) == 0.0

    def test_commutative_example(self):
        """测试 (3, −4) 的范数为 4"""
        shape = AlgebraShape((1, 1))
        assert opnorm(shape, shape.diagonal([3, -4])) == pytest.approx(4.0)

    def test_shape_mismatch(self, mixed_shape):
        """测试形状不匹配"""
        with pytest.raises(StructuralError):
            opnorm(mixed_shape, AlgebraShape((2,)).unit())

    def test_submultiplicative(self, mixed_shape, rng):
        """测试 ‖ab‖ ≤ ‖a‖‖b‖"""
        for _ in range(1000):
            a = mixed_shape.random_element(rng)
            b = mixed_shape.random_element(rng)
            assert (a @ b).norm() <= a.norm() * b.norm() + 1e-10

    def test_cstar_identity(self, mixed_shape, rng):
        """测试 ‖a*a‖ = ‖a‖²"""
        for _ in range(200):
            a = mixed_shape.random_element(rng)
            assert (a.adjoint() @ a).norm() == pytest.approx(a.norm() ** 2, rel=1e-9)

    def test_direct_sum_norm(self, rng):
        """测试直和范数为分量范数的最大值"""
        a = AlgebraShape((2,)).random_element(rng)
        b = AlgebraShape((1, 1)).random_element(rng)
        pair = direct_sum_elements(a, b)
        assert pair.shape.block_dims == (2, 1, 1)
        assert pair.norm() == pytest.approx(max(a.norm(), b.norm()))


class TestReIm:
    """测试实部与虚部"""

    def test_self_adjoint(self, mixed_shape, rng):
        """测试自伴元素的虚部为零"""
        a = mixed_shape.random_self_adjoint(rng)
        re, im = re_im(a)
        assert re.allclose(a)
        assert im.norm() < 1e-12

    def test_imaginary_unit(self, mixed_shape):
        """测试 i·1 的分解为 (0, 1)"""
        re, im = re_im(mixed_shape.unit() * 1j)
        assert re.norm() < 1e-12
        assert im.allclose(mixed_shape.unit())

    def test_reconstruction_and_bounds(self, mixed_shape, rng):
        """测试 a = Re a + i Im a 以及 √2 界"""
        for _ in range(200):
            a = mixed_shape.random_element(rng)
            re, im = re_im(a)
            assert re.is_self_adjoint() and im.is_self_adjoint()
            assert (re + im * 1j).allclose(a, tol=1e-12)
            m = max(re.norm(), im.norm())
            assert m <= a.norm() + 1e-10
            assert a.norm() <= np.sqrt(2) * m + 1e-10
