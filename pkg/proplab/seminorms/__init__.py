"""
半范数层

原子化半范数、常用 Lip-范数构造器、容许函数三元组与抽样校验。
"""
from proplab.seminorms.atoms import (
    AtomGroup,
    AtomicSeminorm,
    L1Term,
    atoms_from_map,
    combine_max,
    zero_seminorm,
)
from proplab.seminorms.builders import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    commutator_seminorm,
    fuzzy_sphere_seminorm,
    lipschitz_seminorm,
    opnorm_seminorm,
    pauli_seminorm,
    spin_generators,
    validate_metric,
)
from proplab.seminorms.checks import (
    CheckReport,
    homogeneity_check,
    kernel_check,
    merge_reports,
    quasi_leibniz_check,
    sample_self_adjoint,
)
from proplab.seminorms.permissible import (
    PermissibleTriple,
    free_module_triple,
    leibniz_f,
    leibniz_g,
    leibniz_h,
    qvba_triple,
)

__all__ = [
    "AtomGroup",
    "AtomicSeminorm",
    "L1Term",
    "atoms_from_map",
    "combine_max",
    "zero_seminorm",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "commutator_seminorm",
    "fuzzy_sphere_seminorm",
    "lipschitz_seminorm",
    "opnorm_seminorm",
    "pauli_seminorm",
    "spin_generators",
    "validate_metric",
    "CheckReport",
    "homogeneity_check",
    "kernel_check",
    "merge_reports",
    "quasi_leibniz_check",
    "sample_self_adjoint",
    "PermissibleTriple",
    "free_module_triple",
    "leibniz_f",
    "leibniz_g",
    "leibniz_h",
    "qvba_triple",
]
