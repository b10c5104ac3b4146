"""
Hausdorff 间隙：max_{p ∈ 样本} dist(p, Q)

只对样本取最大值，因此一般是上确界的下界；
样本取遍极点且到 Q 的距离为凸函数时（交换情形）结果精确。
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Sequence, Union

from loguru import logger

from proplab.kernels.estimate import BoundKind, Estimate, combined_kind

DistanceOracle = Callable[[Any], Union[Estimate, float]]


def _as_estimate(value: Union[Estimate, float]) -> Estimate:
    if isinstance(value, Estimate):
        return value
    return Estimate.exact(float(value))


def hausdorff_gap(
    samples: Sequence[Any],
    distance: DistanceOracle,
    exhaustive: bool = False,
    workers: int = 1,
) -> Estimate:
    """
    Args:
        samples: P 中的样本
        distance: 到 Q 的距离（下确界）判定
        exhaustive: 样本是否取遍全部极点
        workers: 并行线程数

    Returns:
        Estimate；非穷举时 kind=lower，metadata["witness"] 为取到最大值的样本下标
    """
    if not samples:
        return Estimate.exact(0.0, metadata={"samples": 0})
    if workers > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [_as_estimate(r) for r in pool.map(distance, samples)]
    else:
        results = [_as_estimate(distance(s)) for s in samples]
    idx = max(range(len(results)), key=lambda i: results[i].value)
    best = results[idx]
    kind = combined_kind(r.kind for r in results)
    if not exhaustive:
        kind = BoundKind.LOWER if kind in (BoundKind.EXACT, BoundKind.LOWER) else BoundKind.APPROX
    logger.debug(f"Hausdorff 间隙 samples={len(samples)} value={best.value:.6g} kind={kind.value}")
    return Estimate(
        best.value,
        kind,
        tol=max(r.tol for r in results),
        iterations=sum(r.iterations for r in results),
        certificate=best.certificate,
        infinite=best.infinite,
        metadata={"samples": len(samples), "witness": idx, "exhaustive": exhaustive},
    )
