"""
场景工作流

- schemas：场景文件的模型与加载（JSON / YAML）
- registry：声明的惰性构造
- tasks：场景任务与报告记录
- runner：按任务并行执行场景
- report：结构化报告与表格
- suites：性质校验套件
- gallery：示例场景
"""
from proplab.workflow.gallery import GALLERY, gallery_names, gallery_scenario, write_gallery
from proplab.workflow.registry import BridgeEntry, ModuleEntry, Registry
from proplab.workflow.report import REPORT_KEYS, Report, to_jsonable
from proplab.workflow.runner import ScenarioRunner, run_scenario, scenario_config
from proplab.workflow.schemas import (
    SCHEMA_VERSION,
    Scenario,
    check_references,
    load_scenario,
    parse_scenario,
)
from proplab.workflow.suites import SUITES, verify_suite
from proplab.workflow.tasks import TASK_HANDLERS, TaskRecord, TaskRef, run_task

__all__ = [
    "GALLERY",
    "gallery_names",
    "gallery_scenario",
    "write_gallery",
    "BridgeEntry",
    "ModuleEntry",
    "Registry",
    "REPORT_KEYS",
    "Report",
    "to_jsonable",
    "ScenarioRunner",
    "run_scenario",
    "scenario_config",
    "SCHEMA_VERSION",
    "Scenario",
    "check_references",
    "load_scenario",
    "parse_scenario",
    "SUITES",
    "verify_suite",
    "TASK_HANDLERS",
    "TaskRecord",
    "TaskRef",
    "run_task",
]
