"""
数值内核

Estimate、线性规划装配、凸求解引擎、运输距离、规范函数与 Hausdorff 间隙。
"""
from proplab.kernels.body import ConvexBody
from proplab.kernels.engine import (
    SmoothModel,
    fiber_infimum,
    minimize_affine,
    minimize_aux,
    minimize_on_l1_ball,
    retraction_search,
    support_function,
)
from proplab.kernels.estimate import BoundKind, Estimate, combine_max, combine_sum, combined_kind
from proplab.kernels.gauge import minkowski_gauge
from proplab.kernels.hausdorff import hausdorff_gap
from proplab.kernels.lp import LinearProgram, LPResult
from proplab.kernels.projections import project_l1_ball, project_simplex
from proplab.kernels.transport import wasserstein1

__all__ = [
    "BoundKind",
    "Estimate",
    "combine_max",
    "combine_sum",
    "combined_kind",
    "LinearProgram",
    "LPResult",
    "SmoothModel",
    "minimize_affine",
    "minimize_aux",
    "fiber_infimum",
    "support_function",
    "retraction_search",
    "minimize_on_l1_ball",
    "ConvexBody",
    "minkowski_gauge",
    "hausdorff_gap",
    "wasserstein1",
    "project_simplex",
    "project_l1_ball",
]
