"""
度量化量子向量丛层

Hilbert 模、模态射、D-范数、典范丛 qvba、商 D-范数与模 Monge-Kantorovich 度量。
"""
from proplab.bundles.bundle import (
    DNorm,
    MQVB,
    component_maps,
    dnorm_validate,
    inner_product,
    modular_isometry_check,
    module_norm,
    quotient_dnorm,
    qvba,
    sample_module_element,
    scale_to_unit_ball,
)
from proplab.bundles.kantorovich import (
    circular_radius,
    constant_frame,
    frame_bound,
    gauge_metric,
    kantorovich_seminorm,
    modular_mk,
    modular_probes,
    norm_is_kantorovich,
    pairing_seminorm,
)
from proplab.bundles.module import (
    HilbertModule,
    ModularMorphism,
    ModuleDirectSum,
    ModuleSlot,
    direct_sum_module,
    direct_sum_projections,
    free_module,
    identity_modular,
    lift,
    verify_modular,
)

__all__ = [
    "ModuleSlot",
    "HilbertModule",
    "free_module",
    "direct_sum_module",
    "ModularMorphism",
    "ModuleDirectSum",
    "direct_sum_projections",
    "identity_modular",
    "lift",
    "verify_modular",
    "DNorm",
    "MQVB",
    "qvba",
    "inner_product",
    "module_norm",
    "component_maps",
    "sample_module_element",
    "scale_to_unit_ball",
    "dnorm_validate",
    "modular_isometry_check",
    "quotient_dnorm",
    "modular_mk",
    "modular_probes",
    "pairing_seminorm",
    "circular_radius",
    "kantorovich_seminorm",
    "gauge_metric",
    "constant_frame",
    "frame_bound",
    "norm_is_kantorovich",
]
