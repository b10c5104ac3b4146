"""
度量量子向量丛层

第二个量子紧度量空间在模上的可伴作用、度量丛、度量隧道及对偶度量邻近度。
"""
from proplab.metrical.action import (
    ModuleAction,
    action_check,
    base_multiplication_action,
    direct_sum_action,
    scalar_action,
    scalar_space,
)
from proplab.metrical.bundle import MetricalQVB, g_condition_check, make_metrical
from proplab.metrical.propinquity import dual_metrical_propinquity_ub
from proplab.metrical.tunnel import (
    MetricalTunnel,
    action_target_check,
    action_target_points,
    compose_metrical,
    equivariance_check,
    identity_metrical_tunnel,
    invert_metrical,
    metrical_extent,
    scalar_metrical_tunnel,
)

__all__ = [
    "ModuleAction",
    "action_check",
    "scalar_space",
    "scalar_action",
    "base_multiplication_action",
    "direct_sum_action",
    "MetricalQVB",
    "make_metrical",
    "g_condition_check",
    "MetricalTunnel",
    "metrical_extent",
    "equivariance_check",
    "identity_metrical_tunnel",
    "scalar_metrical_tunnel",
    "invert_metrical",
    "compose_metrical",
    "action_target_points",
    "action_target_check",
    "dual_metrical_propinquity_ub",
]
