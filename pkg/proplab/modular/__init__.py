"""
模隧道层

模桥（锚点、deck 范数、imprint、模 reach）、凸化、Minkowski 规范集合、
由模桥构造模隧道、复合、模目标集、自由模隧道与对偶模邻近度上界。
"""
from proplab.modular.bridge import (
    ConvexAnchorFamily,
    ModularBridge,
    base_length,
    convexify,
    dball_samples,
    deck_norm,
    identity_modular_bridge,
    imprint,
    modular_length,
    modular_reach,
)
from proplab.modular.free import free_gamma, free_module_tunnel, free_tunnel_figure
from proplab.modular.gauge import GaugeSet
from proplab.modular.propinquity import (
    base_modular_consistency,
    dual_modular_propinquity_ub,
    fallback_ceiling,
    fallback_modular_bridge,
    fallback_modular_tunnel,
    modular_candidate_pool,
)
from proplab.modular.target import (
    module_target_checks,
    module_fiber_points,
    module_target_set,
    target_combination_check,
    target_diameter_check,
    target_inner_check,
)
from proplab.modular.tunnel import (
    CONVEX_RADIUS,
    ModularTunnel,
    bridge_gauge_set,
    compose_modular,
    extent_consistency,
    identity_modular_tunnel,
    invert_modular,
    modular_extent,
    modular_tunnel_from_bridge,
)

__all__ = [
    "CONVEX_RADIUS",
    "ConvexAnchorFamily",
    "ModularBridge",
    "deck_norm",
    "convexify",
    "identity_modular_bridge",
    "modular_reach",
    "imprint",
    "base_length",
    "modular_length",
    "dball_samples",
    "GaugeSet",
    "ModularTunnel",
    "modular_extent",
    "identity_modular_tunnel",
    "invert_modular",
    "bridge_gauge_set",
    "modular_tunnel_from_bridge",
    "compose_modular",
    "extent_consistency",
    "module_fiber_points",
    "module_target_set",
    "module_target_checks",
    "target_diameter_check",
    "target_combination_check",
    "target_inner_check",
    "free_gamma",
    "free_tunnel_figure",
    "free_module_tunnel",
    "fallback_modular_bridge",
    "fallback_modular_tunnel",
    "fallback_ceiling",
    "modular_candidate_pool",
    "dual_modular_propinquity_ub",
    "base_modular_consistency",
]
