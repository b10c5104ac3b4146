"""
CLI命令行接口模块

提供 proplab 命令行工具
"""
from proplab.cli.main import cli

__all__ = ["cli"]
