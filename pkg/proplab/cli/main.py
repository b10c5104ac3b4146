"""
CLI 命令行接口

compute 执行场景文件，verify 运行性质校验套件，gallery 输出示例场景。
退出码：0 全部通过；1 有记录未通过或出错；2 场景或参数错误（不写报告）。
"""
import sys
from pathlib import Path
from typing import Optional

import click
from loguru import logger
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from proplab.config import SuiteSizes, get_settings
from proplab.exceptions import ConfigurationError, DanglingReferenceError, ScenarioError
from proplab.workflow import GALLERY, Report, run_scenario, verify_suite, write_gallery

console = Console()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def configure_logging(verbose: bool) -> None:
    """重新配置 loguru 的 stderr 输出级别"""
    level = "DEBUG" if verbose else get_settings().PROPLAB_LOG_LEVEL
    logger.remove()
    logger.add(sys.stderr, level=level)


def _summary(report: Report, out: Optional[str]) -> None:
    report.print(console)
    console.print(
        Panel.fit(
            f"[cyan]记录:[/cyan] {report.total}\n"
            f"[cyan]未通过:[/cyan] {report.failed}\n"
            f"[cyan]报告:[/cyan] {out or '-'}",
            title=report.title,
            border_style="green" if report.all_passed else "yellow",
        )
    )


@click.group()
@click.version_option(version="0.1.0", prog_name="proplab")
def cli():
    """
    propinquity-lab - 命令行工具

    在有限维量子紧度量空间、度量化量子向量丛与度量量子向量丛上
    构造隧道并估计对偶邻近度。
    """
    pass


@cli.command()
@click.option("--scenario", "scenario_path", required=True, help="场景文件（JSON 或 YAML）")
@click.option("--out", default=None, help="报告输出路径（JSON）")
@click.option("--seed", default=None, type=int, help="覆盖场景中的随机种子")
@click.option("--samples", default=None, type=click.IntRange(min=1), help="覆盖采样规模")
@click.option("--tol", default=None, type=click.FloatRange(min=0, min_open=True), help="覆盖容差")
@click.option("--threads", default=None, type=click.IntRange(min=1), help="并行线程数")
@click.option("--verbose", is_flag=True, help="输出调试日志")
def compute(
    scenario_path: str,
    out: Optional[str],
    seed: Optional[int],
    samples: Optional[int],
    tol: Optional[float],
    threads: Optional[int],
    verbose: bool,
):
    """
    执行场景文件中的任务并写出报告

    示例：proplab compute --scenario two-point.json --out report.json --seed 0
    """
    configure_logging(verbose)
    try:
        report = run_scenario(
            scenario_path, out, max_workers=threads, seed=seed, samples=samples, tol=tol
        )
    except DanglingReferenceError as e:
        console.print(f"[red]错误：引用无法解析 {e.kind}:{e.ref}[/red]")
        logger.error(f"场景引用无法解析: {e}")
        sys.exit(EXIT_USAGE)
    except ScenarioError as e:
        console.print(f"[red]错误：{e}[/red]")
        logger.error(f"场景无效: {e}")
        sys.exit(EXIT_USAGE)
    except Exception as e:
        console.print(f"[red]错误：{e}[/red]")
        logger.exception("执行场景失败")
        sys.exit(EXIT_FAILED)

    _summary(report, out)
    sys.exit(EXIT_OK if report.all_passed else EXIT_FAILED)


@cli.command()
@click.option("--suite", required=True, help="套件名：axioms|bridges|tunnels|modular|metrical|chains")
@click.option("--seed", default=0, show_default=True, type=int, help="随机种子")
@click.option("--out", default=None, help="报告输出路径（JSON）")
@click.option("--quick", is_flag=True, help="以冒烟规模运行（缺省为完整验收规模）")
@click.option("--verbose", is_flag=True, help="输出调试日志")
def verify(suite: str, seed: int, out: Optional[str], verbose: bool, quick: bool):
    """
    运行性质校验套件

    示例：proplab verify --suite chains --seed 0 --out chains.json
    """
    configure_logging(verbose)
    try:
        sizes = SuiteSizes.quick() if quick else SuiteSizes()
        report = verify_suite(suite, seed, sizes=sizes)
        if out:
            report.write(out)
    except ConfigurationError as e:
        console.print(f"[red]错误：{e}[/red]")
        sys.exit(EXIT_USAGE)
    except Exception as e:
        console.print(f"[red]错误：{e}[/red]")
        logger.exception("校验套件失败")
        sys.exit(EXIT_FAILED)

    _summary(report, out)
    sys.exit(EXIT_OK if report.all_passed else EXIT_FAILED)


@cli.command()
@click.option("--name", default=None, help="示例名")
@click.option("--out", default=None, help="输出路径，缺省为 <name>.json")
@click.option("--list", "list_only", is_flag=True, help="列出所有示例")
def gallery(name: Optional[str], out: Optional[str], list_only: bool):
    """
    输出可直接运行的示例场景

    示例：proplab gallery --name two-point --out two-point.json
    """
    if list_only:
        table = Table(title="示例场景", show_header=True, header_style="bold cyan")
        table.add_column("名称", style="cyan")
        table.add_column("说明")
        for key, builder in GALLERY.items():
            table.add_row(key, (builder.__doc__ or "").strip().splitlines()[0])
        console.print(table)
        return
    if not name:
        console.print("[red]错误：需要 --name 或 --list[/red]")
        sys.exit(EXIT_USAGE)

    try:
        path = write_gallery(name, out or f"{name}.json")
    except ConfigurationError as e:
        console.print(f"[red]错误：{e}[/red]")
        sys.exit(EXIT_USAGE)
    except Exception as e:
        console.print(f"[red]错误：{e}[/red]")
        logger.exception("输出示例失败")
        sys.exit(EXIT_FAILED)

    console.print(
        Panel.fit(
            f"[green]✓[/green] 示例已写出\n\n"
            f"[cyan]名称:[/cyan] {name}\n"
            f"[cyan]路径:[/cyan] {Path(path)}",
            title="示例场景",
            border_style="green",
        )
    )
    console.print(f"\n[yellow]下一步:[/yellow] 运行 [bold]proplab compute --scenario {path}[/bold]")


if __name__ == "__main__":
    cli()
