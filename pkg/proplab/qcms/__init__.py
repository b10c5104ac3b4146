"""
量子紧度量空间层

QCMS、Monge-Kantorovich 距离、桥、隧道、extent、复合与邻近度上界。
"""
from proplab.qcms.bridge import (
    Bridge,
    BridgeStats,
    bridge_height,
    bridge_reach,
    bridge_stats,
    correspondence_bridge,
    distortion,
    identity_bridge,
    tensor_bridge,
)
from proplab.qcms.gaps import commutative_gap, pure_state_samples, state_gap
from proplab.qcms.propinquity import connects, propinquity_ub
from proplab.qcms.space import (
    QCMS,
    grid_space,
    matrix_space,
    metric_space,
    one_point,
    points_space,
)
from proplab.qcms.target import fiber_points, target_set_diameter_check, target_set_points
from proplab.qcms.tunnel import (
    Tunnel,
    compose_tunnels,
    disjoint_union_tunnel,
    extent_report,
    fallback_tunnel,
    identity_tunnel,
    invert_tunnel,
    quantum_isometry_check,
    tunnel_extent,
    tunnel_from_bridge,
)

__all__ = [
    "QCMS",
    "metric_space",
    "points_space",
    "grid_space",
    "one_point",
    "matrix_space",
    "commutative_gap",
    "state_gap",
    "pure_state_samples",
    "Bridge",
    "BridgeStats",
    "bridge_height",
    "bridge_reach",
    "bridge_stats",
    "identity_bridge",
    "correspondence_bridge",
    "tensor_bridge",
    "distortion",
    "Tunnel",
    "tunnel_from_bridge",
    "tunnel_extent",
    "extent_report",
    "quantum_isometry_check",
    "identity_tunnel",
    "invert_tunnel",
    "compose_tunnels",
    "disjoint_union_tunnel",
    "fallback_tunnel",
    "target_set_points",
    "fiber_points",
    "target_set_diameter_check",
    "connects",
    "propinquity_ub",
]
