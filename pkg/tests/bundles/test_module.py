"""
测试 Hilbert 模：内积、模范数、左作用与模态射
"""
import numpy as np
import pytest

from proplab.algebra import AlgebraShape, identity_morphism
from proplab.bundles import (
    HilbertModule,
    ModularMorphism,
    ModuleSlot,
    direct_sum_module,
    direct_sum_projections,
    free_module,
    identity_modular,
    lift,
    verify_modular,
)
from proplab.exceptions import NonSurjectiveError, StructuralError, ValidationError


@pytest.fixture
def c2():
    """Free(ℂ, 2)"""
    return free_module(AlgebraShape((1,)), 2)


@pytest.fixture
def matrix_module():
    """Free(M₂ ⊕ ℂ, 2)"""
    return free_module(AlgebraShape((2, 1)), 2)


class TestInnerProduct:
    """测试内积与模范数"""

    def test_orthogonal_basis(self, c2):
        """ω=(1,0)、η=(0,1)：⟨ω,η⟩=0，范数均为 1"""
        one, zero = c2.base.unit(), c2.base.zero()
        omega = c2.from_components([[one, zero]])
        eta = c2.from_components([[zero, one]])
        assert c2.inner(omega, eta).allclose(zero)
        assert c2.norm(omega) == pytest.approx(1.0)
        assert c2.norm(eta) == pytest.approx(1.0)

    def test_unit_inner_unit(self, matrix_module):
        """Free(𝔄,·) 中 ⟨(1,0),(1,0)⟩ = 1"""
        u = matrix_module.unit_element()
        assert matrix_module.inner(u, u).allclose(matrix_module.base.unit())

    def test_zero_pairing(self, matrix_module):
        """⟨ω, 0⟩ = 0"""
        omega = matrix_module.random_element(np.random.default_rng(0))
        pairing = matrix_module.inner(omega, matrix_module.zero_element())
        assert pairing.allclose(matrix_module.base.zero())

    def test_module_axioms(self, matrix_module):
        """左线性、共轭对称、正性与 Cauchy-Schwarz"""
        rng = np.random.default_rng(1)
        for _ in range(20):
            omega = matrix_module.random_element(rng)
            eta = matrix_module.random_element(rng)
            a = matrix_module.base.random_element(rng)
            lhs = matrix_module.inner(matrix_module.act(a, omega), eta)
            assert lhs.allclose(a @ matrix_module.inner(omega, eta), 1e-9)
            assert matrix_module.inner(omega, eta).allclose(
                matrix_module.inner(eta, omega).adjoint(), 1e-9
            )
            gram = matrix_module.inner(omega, omega)
            assert all(np.linalg.eigvalsh(b).min() >= -1e-9 for b in gram.blocks)
            bound = matrix_module.norm(omega) * matrix_module.norm(eta)
            assert matrix_module.inner(omega, eta).norm() <= bound + 1e-9

    def test_norm_seminorm_matches(self, matrix_module):
        """原子形式的模范数与 √‖⟨ω,ω⟩‖ 一致"""
        rng = np.random.default_rng(2)
        for _ in range(10):
            omega = matrix_module.random_element(rng)
            assert matrix_module.norm_seminorm(omega) == pytest.approx(
                matrix_module.norm(omega), rel=1e-9
            )

    def test_inner_matrix(self, c2):
        """内积矩阵与直接计算一致"""
        rng = np.random.default_rng(3)
        omega, eta = c2.random_element(rng), c2.random_element(rng)
        left = c2.inner_matrix(eta, side="left")
        right = c2.inner_matrix(omega, side="right")
        expected = c2.inner(omega, eta).coords()
        assert np.allclose(left @ omega, expected)
        assert np.allclose(right @ eta, expected)
        with pytest.raises(StructuralError):
            c2.inner_matrix(eta, side="middle")


class TestStructure:
    """测试模的结构"""

    def test_direct_sum_base(self, c2, matrix_module):
        """直和模的底代数是两侧底代数的直和"""
        total = direct_sum_module(c2, matrix_module)
        assert total.base == AlgebraShape((1, 2, 1))
        assert total.dim == c2.dim + matrix_module.dim
        assert total.uniform_rank == 2

    def test_direct_sum_inner_componentwise(self, c2):
        """直和模的内积是两侧内积的直和"""
        one = free_module(AlgebraShape((1,)), 1)
        total = direct_sum_module(c2, one)
        rng = np.random.default_rng(4)
        left, right = c2.random_element(rng), one.random_element(rng)
        omega = np.concatenate([left, right])
        pieces = total.split_base(total.inner(omega, omega))
        assert pieces[0].allclose(c2.inner(left, left))
        assert pieces[1].allclose(one.inner(right, right))

    def test_component_round_trip(self, matrix_module):
        """分量与坐标互逆"""
        omega = matrix_module.random_element(np.random.default_rng(5))
        comps = matrix_module.components(omega)
        assert np.allclose(matrix_module.from_components(comps), omega)

    def test_bad_rank(self):
        """秩必须为正"""
        with pytest.raises(StructuralError):
            ModuleSlot(AlgebraShape((1,)), 0)
        with pytest.raises(StructuralError):
            HilbertModule([])

    def test_wrong_dimension(self, c2):
        """坐标维数不一致"""
        with pytest.raises(StructuralError):
            c2.norm(np.zeros(3))


class TestModularMorphism:
    """测试模态射"""

    def test_identity(self, matrix_module):
        """恒等模态射满足模律与内积保持"""
        ident = identity_modular(matrix_module)
        assert verify_modular(ident) <= 1e-12
        assert ident.is_surjective

    def test_projections(self, c2, matrix_module):
        """直和的投影是满射模态射"""
        dsum = direct_sum_projections(c2, matrix_module)
        assert dsum.proj_left.is_surjective
        assert dsum.proj_right.is_surjective
        assert verify_modular(dsum.proj_right) <= 1e-12

    def test_lift_identity(self, c2):
        """恒等 *-态射的提升就是恒等矩阵"""
        lifted = lift(identity_morphism(c2.base), c2, c2)
        assert np.allclose(lifted.matrix, np.eye(c2.dim))

    def test_swap_breaks_module_law(self):
        """θ 为恒等而 Θ 交换两个块时模律不成立"""
        module = free_module(AlgebraShape((1, 1)), 1)
        swap = np.zeros((4, 4))
        swap[0:2, 2:4] = np.eye(2)
        swap[2:4, 0:2] = np.eye(2)
        with pytest.raises(ValidationError):
            ModularMorphism(module, module, identity_morphism(module.base), swap)

    def test_require_surjective(self, c2):
        """零映射不是满射"""
        zero = ModularMorphism(
            c2,
            c2,
            identity_morphism(c2.base),
            np.zeros((c2.dim, c2.dim)),
            inner_preserving=False,
        )
        with pytest.raises(NonSurjectiveError):
            zero.require_surjective()

    def test_compose(self, c2, matrix_module):
        """投影与恒等的复合"""
        dsum = direct_sum_projections(c2, matrix_module)
        composite = identity_modular(c2).compose(dsum.proj_left)
        assert composite.source is dsum.module
        assert np.allclose(composite.matrix, dsum.proj_left.matrix)
