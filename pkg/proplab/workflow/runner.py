"""
场景运行器

任务之间相互独立，按 PROPLAB_THREADS 并行执行；结果按场景中的任务顺序
收集，单个任务失败只写入它自己的记录。
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Optional, Union

from loguru import logger

from proplab.config import SolverConfig, get_settings
from proplab.exceptions import ScenarioError
from proplab.workflow.registry import Registry
from proplab.workflow.report import Report
from proplab.workflow.schemas import Scenario, load_scenario
from proplab.workflow.tasks import TaskRecord, run_task


def scenario_config(scenario: Scenario, **overrides: Optional[Any]) -> SolverConfig:
    """场景的 solver 键 → SolverConfig，再叠加命令行覆盖（None 忽略）"""
    try:
        base = SolverConfig(**{"seed": scenario.seed, **scenario.solver})
    except ValueError as e:
        raise ScenarioError(f"solver 配置不合法: {e}") from e
    return base.with_overrides(**overrides)


class ScenarioRunner:
    """
    场景运行器（只负责调度，计算交给 tasks 中的操作）

    调用方式：
        runner = ScenarioRunner(max_workers=4)
        report = runner.run(scenario, config)
    """

    def __init__(self, max_workers: Optional[int] = None) -> None:
        self.max_workers = max(1, max_workers or get_settings().PROPLAB_THREADS)

    def run(
        self, scenario: Scenario, config: Optional[SolverConfig] = None, title: str = ""
    ) -> Report:
        config = config or scenario_config(scenario)
        registry = Registry(scenario, config)
        tasks = scenario.tasks
        records: list[Optional[TaskRecord]] = [None] * len(tasks)

        if self.max_workers == 1 or len(tasks) <= 1:
            for i, task in enumerate(tasks):
                records[i] = run_task(registry, task, config)
        else:
            lock = threading.Lock()
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                future_map = {
                    pool.submit(run_task, registry, task, config): i
                    for i, task in enumerate(tasks)
                }
                for future in as_completed(future_map):
                    i = future_map[future]
                    record = future.result()
                    with lock:
                        records[i] = record

        report = Report(
            title or "propinquity-lab",
            config.seed,
            config.model_dump(mode="json"),
            [r for r in records if r is not None],
        )
        logger.info(
            f"场景完成 tasks={report.total} 失败={report.failed} "
            f"声明={registry.built} 并发={self.max_workers}"
        )
        return report


def run_scenario(
    path: Union[str, Path],
    out: Optional[Union[str, Path]] = None,
    max_workers: Optional[int] = None,
    **overrides: Optional[Any],
) -> Report:
    """
    加载、执行场景并（可选）写出报告

    Raises:
        ScenarioError: 解析或模式校验失败
        DanglingReferenceError: 引用无法解析，此时不写报告
    """
    scenario = load_scenario(path)
    config = scenario_config(scenario, **overrides)
    report = ScenarioRunner(max_workers).run(scenario, config, title=Path(path).stem)
    if out is not None:
        report.write(out)
        logger.info(f"报告已写出 path={out}")
    return report
