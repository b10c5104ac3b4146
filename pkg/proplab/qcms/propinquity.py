"""
对偶 Gromov-Hausdorff 邻近度的上界：候选隧道可证 extent 的最小值
"""
from __future__ import annotations

from typing import Sequence

from loguru import logger

from proplab.exceptions import PreconditionError
from proplab.kernels.estimate import BoundKind, Estimate
from proplab.qcms.space import QCMS
from proplab.qcms.tunnel import Tunnel


def connects(tunnel: Tunnel, left: QCMS, right: QCMS) -> bool:
    return tunnel.domain.same_as(left) and tunnel.codomain.same_as(right)


def propinquity_ub(left: QCMS, right: QCMS, candidates: Sequence[Tunnel]) -> Estimate:
    """
    min figure；相同 figure 时取复合级数较少者

    Raises:
        PreconditionError: 候选为空，或有候选不连接 left 与 right
    """
    if not candidates:
        raise PreconditionError("候选隧道为空", details={"left": left.name, "right": right.name})
    for t in candidates:
        if not connects(t, left, right):
            raise PreconditionError(
                "候选隧道不连接给定的两个空间",
                details={"tunnel": t.name, "left": left.name, "right": right.name},
            )
    best = min(candidates, key=lambda t: (t.figure, t.stages))
    logger.info(
        f"邻近度上界 left={left.name} right={right.name} value={best.figure:.6g} "
        f"tunnel={best.name} candidates={len(candidates)}"
    )
    return Estimate(
        best.figure,
        BoundKind.UPPER,
        metadata={"tunnel": best.name, "stages": best.stages, "candidates": len(candidates)},
    )
