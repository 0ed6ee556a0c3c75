from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunSummary(BaseModel):
    """运行汇总"""
    psi_final: Optional[float] = None
    psi_hat_final: Optional[float] = None
    atom_count: int
    max_sparsity: int
    wall_time_ms: float = 0.0


class RunMetrics(BaseModel):
    """一次运行（可选对照真值）的度量

    Attributes:
        config: 学习参数回显
        trace: 轨迹行
        summary: 汇总
        gamma_star: 真值给出的 gamma*
        bound_ratio_per_t: (psi^(t) - gamma*) beta t / (16 m Lambda)，每行都应 <= 1
        progress_ratio_per_t: 实际下降 / 理论保证下降（诊断，不断言）
        sparsity_histogram: 码长 -> 列数
        outlier_overlap: 宣告离群与真实离群的交集大小（仅报告）
        outlier_ratio_inlier: psi_hat / (||X - A*Y* - N*||^2 + eps ||X_I||^2)
        outlier_ratio_total: psi_hat / ((gamma* + eps) ||X||^2)
        iteration_cap_ratio: 原子数 / 迭代上限
    """
    config: Dict[str, Any] = Field(default_factory=dict)
    trace: List[Dict[str, Any]] = Field(default_factory=list)
    summary: RunSummary
    gamma_star: Optional[float] = None
    bound_ratio_per_t: List[float] = Field(default_factory=list)
    progress_ratio_per_t: List[Optional[float]] = Field(default_factory=list)
    sparsity_histogram: Dict[int, int] = Field(default_factory=dict)
    outlier_overlap: Optional[int] = None
    outlier_ratio_inlier: Optional[float] = None
    outlier_ratio_total: Optional[float] = None
    iteration_cap_ratio: Optional[float] = None

    def bounds_hold(self, slack: float = 1e-9) -> bool:
        return all(r <= 1.0 + slack for r in self.bound_ratio_per_t)
