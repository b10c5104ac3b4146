"""
业务异常类

定义 proplab 的异常层级，提供比 ValueError 更精确的错误语义。
数值上的无穷大不作为异常抛出，而是记录在 Estimate 上。
"""
from typing import Any, Optional


class ProplabError(Exception):
    """proplab 基础异常类"""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self):
        if self.details:
            details_str = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{self.message} ({details_str})"
        return self.message


# ========== 结构异常 ==========


class StructuralError(ProplabError):
    """形状或坐标空间不匹配"""

    pass


class EndpointMismatchError(StructuralError):
    """隧道复合时端点不一致"""

    def __init__(self, left: str, right: str):
        super().__init__(
            "隧道端点不一致，无法复合",
            details={"codomain": left, "domain": right},
        )
        self.left = left
        self.right = right


# ========== 校验异常 ==========


class ValidationError(ProplabError):
    """公理或不变量校验失败"""

    def __init__(
        self,
        message: str,
        details: Optional[dict[str, Any]] = None,
        witnesses: Optional[list[Any]] = None,
    ):
        super().__init__(message, details)
        self.witnesses = witnesses or []


class PreconditionError(ProplabError):
    """操作前置条件不满足"""

    pass


class UnsupportedModeError(ProplabError):
    """当前模式不支持该操作（例如非交换代数上枚举纯态）"""

    pass


class NonSurjectiveError(PreconditionError):
    """态射不是满射"""

    def __init__(self, rank: int, expected: int):
        super().__init__(
            "态射不是满射",
            details={"rank": rank, "expected": expected},
        )
        self.rank = rank
        self.expected = expected


# ========== 求解器异常 ==========


class InfeasibleError(ProplabError):
    """纤维为空或约束不可行"""

    pass


class NonMonotoneOracleError(ProplabError):
    """成员判定在射线上不单调"""

    def __init__(self, inside: float, outside: float):
        super().__init__(
            "成员判定沿射线不单调",
            details={"inside_at": inside, "outside_at": outside},
        )
        self.inside = inside
        self.outside = outside


# ========== 场景异常 ==========


class ScenarioError(ProplabError):
    """场景文件解析或模式校验失败"""

    pass


class DanglingReferenceError(ScenarioError):
    """场景中引用了不存在的声明"""

    def __init__(self, kind: str, ref: str, location: str = ""):
        details: dict[str, Any] = {"kind": kind, "ref": ref}
        if location:
            details["location"] = location
        super().__init__("场景引用无法解析", details=details)
        self.kind = kind
        self.ref = ref


class ConfigurationError(ProplabError):
    """未知的套件名、示例名或非法配置"""

    pass
