"""
测试 *-态射
"""
import numpy as np
import pytest

from proplab.algebra import (
    AlgebraShape,
    State,
    direct_sum,
    direct_sum_elements,
    from_blocks,
    identity_morphism,
    tensor_product,
)
from proplab.exceptions import StructuralError, ValidationError


@pytest.fixture
def rng():
    return np.random.default_rng(21)


class TestDirectSum:
    """测试直和及其投影与嵌入"""

    def test_shape(self):
        """测试 (2)⊕(1,1) 的形状"""
        ds = direct_sum(AlgebraShape((2,)), AlgebraShape((1, 1)))
        assert ds.shape.block_dims == (2, 1, 1)

    def test_project_embed(self, rng):
        """测试 ρ₁∘ι₁ = id"""
        a_shape, b_shape = AlgebraShape((2,)), AlgebraShape((1, 1))
        ds = direct_sum(a_shape, b_shape)
        a = a_shape.random_element(rng)
        b = b_shape.random_element(rng)
        assert ds.proj_left(ds.inj_left(a)).allclose(a)
        assert ds.proj_right(ds.inj_right(b)).allclose(b)
        pair = direct_sum_elements(a, b)
        assert ds.proj_left(pair).allclose(a)
        assert ds.proj_right(pair).allclose(b)

    def test_morphism_flags(self):
        """测试投影是单位满射，嵌入是非单位单射"""
        ds = direct_sum(AlgebraShape((2,)), AlgebraShape((1,)))
        assert ds.proj_left.report.is_star_morphism
        assert ds.proj_left.is_unital
        assert ds.proj_left.is_surjective
        assert ds.inj_left.report.is_star_morphism
        assert not ds.inj_left.is_unital
        assert ds.inj_left.is_injective


class TestTensorProduct:
    """测试张量积的腿"""

    def test_legs(self, rng):
        """测试两条腿为单位单射且像互相交换"""
        tp = tensor_product(AlgebraShape((2,)), AlgebraShape((1, 2)))
        assert tp.shape.block_dims == (2, 4)
        for leg in (tp.leg_left, tp.leg_right):
            assert leg.report.is_star_morphism
            assert leg.is_unital
            assert leg.is_injective
        a = tp.left.random_element(rng)
        b = tp.right.random_element(rng)
        x, y = tp.leg_left(a), tp.leg_right(b)
        assert (x @ y).allclose(y @ x, tol=1e-9)


class TestStarMorphism:
    """测试一般 *-态射"""

    def test_unitary_conjugation(self):
        """测试酉共轭给出 *-自同构"""
        shape = AlgebraShape((2,))
        u = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        pi = from_blocks(shape, shape, [[(0, 1, 1)]], unitaries=[u])
        assert pi.is_unital and pi.is_surjective

    def test_not_a_morphism(self):
        """测试非 *-态射被拒绝"""
        shape = AlgebraShape((2,))
        u = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValidationError):
            from_blocks(shape, shape, [[(0, 1, 1)]], unitaries=[u])

    def test_oversized_blocks(self):
        """测试超出目标块尺寸"""
        with pytest.raises(StructuralError):
            from_blocks(AlgebraShape((2,)), AlgebraShape((3,)), [[(0, 2, 1)]])

    def test_compose_and_pullback(self, rng):
        """测试复合与态的拉回"""
        ds = direct_sum(AlgebraShape((2,)), AlgebraShape((1,)))
        ident = identity_morphism(ds.left)
        composed = ident.compose(ds.proj_left)
        assert composed.source == ds.shape
        phi = State.tracial(ds.left)
        pulled = ds.proj_left.pullback(phi)
        d = ds.shape.random_element(rng)
        assert pulled(d) == pytest.approx(phi(ds.proj_left(d)))
        with pytest.raises(StructuralError):
            ds.proj_left.compose(ident)
