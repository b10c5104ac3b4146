"""
有限维 C*-代数层

块对角矩阵代数的形状、元素、态与 *-态射。
"""
from proplab.algebra.morphisms import (
    DirectSum,
    MorphismReport,
    StarMorphism,
    TensorProduct,
    coordinate_projection,
    direct_sum,
    from_blocks,
    identity_morphism,
    tensor_product,
    verify_morphism,
)
from proplab.algebra.shape import (
    AlgebraElement,
    AlgebraShape,
    direct_sum_elements,
    jordan_lie,
    opnorm,
    re_im,
)
from proplab.algebra.states import (
    State,
    in_level_set,
    level_space,
    level_state,
    mixture,
    pure_states,
    random_pure_state,
    sample_states,
    state_eval,
)

__all__ = [
    "AlgebraShape",
    "AlgebraElement",
    "opnorm",
    "re_im",
    "jordan_lie",
    "direct_sum_elements",
    "State",
    "state_eval",
    "sample_states",
    "pure_states",
    "random_pure_state",
    "mixture",
    "level_space",
    "level_state",
    "in_level_set",
    "StarMorphism",
    "MorphismReport",
    "verify_morphism",
    "from_blocks",
    "identity_morphism",
    "coordinate_projection",
    "DirectSum",
    "direct_sum",
    "TensorProduct",
    "tensor_product",
]
