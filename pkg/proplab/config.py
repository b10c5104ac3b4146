"""
配置管理

- Settings：使用 Pydantic Settings 读取环境变量（PROPLAB_ 前缀字段）
- SolverConfig：求解器预算（迭代次数、重启次数、容差、采样规模），
  可由场景文件的 "solver" 键或 CLI 参数覆盖
"""
from functools import lru_cache
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用配置"""

    APP_NAME: str = "propinquity-lab"
    APP_VERSION: str = "0.1.0"

    PROPLAB_THREADS: int = Field(default=4, ge=1, description="任务级并行线程数上限")
    PROPLAB_SEED: int = Field(default=0, description="默认随机种子")
    PROPLAB_LOG_LEVEL: str = Field(default="INFO", description="日志级别")
    PROPLAB_SAMPLES: int = Field(default=64, ge=1, description="默认采样规模")
    PROPLAB_TOL: float = Field(default=1e-6, gt=0, description="默认求解容差")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """获取配置单例"""
    return Settings()


class SolverConfig(BaseModel):
    """求解器配置模型"""

    iterations: int = Field(
        default=5000,
        gt=0,
        description="光滑化求解的最大迭代次数",
    )
    restarts: int = Field(
        default=8,
        ge=1,
        description="多起点重启次数",
    )
    tol: float = Field(
        default=1e-6,
        gt=0,
        description="数值容差",
    )
    polish_iterations: int = Field(
        default=300,
        ge=0,
        description="次梯度精修迭代次数（步长 c/√k）",
    )
    samples: int = Field(
        default=64,
        ge=1,
        description="Hausdorff 估计与校验循环的采样数",
    )
    probes: int = Field(
        default=24,
        ge=0,
        description="模 Monge-Kantorovich 探针集合中随机样本的数量",
    )
    ascent_iterations: int = Field(
        default=400,
        gt=0,
        description="凸最大化（上升法）迭代次数",
    )
    smoothing: tuple[float, ...] = Field(
        default=(1e-1, 1e-2, 1e-3, 1e-4),
        description="log-sum-exp 光滑参数的延拓序列（相对尺度）",
    )
    lp_method: str = Field(
        default="highs",
        description="scipy.optimize.linprog 使用的方法",
    )
    seed: int = Field(
        default=0,
        description="随机种子",
    )

    @field_validator("smoothing")
    @classmethod
    def validate_smoothing(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not v:
            raise ValueError("smoothing 序列不能为空")
        if any(mu <= 0 for mu in v):
            raise ValueError("smoothing 参数必须为正")
        return tuple(sorted(v, reverse=True))

    @field_validator("lp_method")
    @classmethod
    def validate_lp_method(cls, v: str) -> str:
        allowed = {"highs", "highs-ds", "highs-ipm"}
        if v not in allowed:
            raise ValueError(f"不支持的 LP 方法: {v}，可选: {sorted(allowed)}")
        return v

    @classmethod
    def from_env(cls, **kwargs: Any) -> "SolverConfig":
        """
        从环境变量创建配置

        Args:
            **kwargs: 覆盖环境变量的参数

        Returns:
            SolverConfig实例
        """
        settings = Settings()
        config_dict: dict[str, Any] = {
            "tol": settings.PROPLAB_TOL,
            "samples": settings.PROPLAB_SAMPLES,
            "seed": settings.PROPLAB_SEED,
        }
        config_dict.update(kwargs)
        return cls(**config_dict)

    def with_overrides(self, **kwargs: Optional[Any]) -> "SolverConfig":
        """返回覆盖部分字段后的新配置，值为 None 的参数被忽略"""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        if not updates:
            return self
        return self.model_validate({**self.model_dump(), **updates})

    def rng(self, offset: int = 0) -> np.random.Generator:
        """按种子派生确定性的随机数生成器"""
        return np.random.default_rng(self.seed + offset)


class SuiteSizes(BaseModel):
    """校验套件的实例规模，默认值为完整验收规模"""

    mk_pairs: int = Field(default=50, ge=1, description="MK 距离与运输 LP 对照的态对数")
    mk_points: int = Field(default=12, ge=2, description="MK 对照所用度量空间的最大点数")
    union_tunnels: int = Field(default=20, ge=1, description="不交并隧道的实例数")
    bridge_tunnels: int = Field(default=20, ge=1, description="对应桥隧道的实例数")
    triangle_pairs: int = Field(default=10, ge=1, description="三角不等式与目标集的实例数")
    modular_bridges: int = Field(default=10, ge=1, description="模桥隧道的实例数，p 取 1..3")
    pivot_samples: int = Field(default=1000, ge=1, description="枢纽 D-范数公理的采样数")

    @classmethod
    def quick(cls) -> "SuiteSizes":
        """冒烟规模"""
        return cls(
            mk_pairs=5,
            mk_points=6,
            union_tunnels=3,
            bridge_tunnels=3,
            triangle_pairs=2,
            modular_bridges=3,
            pivot_samples=64,
        )
