"""学习结果与真值对照的度量"""
from collections import Counter
from typing import List, Optional, Sequence

import numpy as np

from dictapprox.core.exceptions import DimensionMismatchError
from dictapprox.core.logger import setup_logger
from dictapprox.models.dictionary import DictModel
from dictapprox.models.learning import (
    OUTLIER_TRACE_COLUMNS,
    TRACE_COLUMNS,
    LearnConfig,
    LearnTrace,
    OutlierConfig,
    OutlierTraceRecord,
)
from dictapprox.models.metrics import RunMetrics, RunSummary
from dictapprox.models.planted import PlantedInstance
from dictapprox.models.signal import SignalMatrix
from dictapprox.services.outlier_service import outlier_error
from dictapprox.services.pursuit_service import bound_ratios, compute_gamma_star, progress_ratios

logger = setup_logger("dictapprox.eval")


def reconstruction_error(X: SignalMatrix, model: DictModel) -> float:
    """||X - A'Y'||_F^2 / ||X||_F^2，||X||_F = 0 时为 0"""
    if model.d != X.d or model.n != X.n:
        raise DimensionMismatchError(f"模型维度 ({model.d}, {model.n}) 与 X ({X.d}, {X.n}) 不一致")
    if X.frob_sq <= 0.0:
        return 0.0
    residual = X.data - model.reconstruct()
    return float(np.sum(residual * residual)) / X.frob_sq


def sparsity_histogram(model: DictModel) -> dict:
    """码长 -> 列数，按码长升序"""
    counts = Counter(int(c) for c in model.code_lengths())
    return {length: counts[length] for length in sorted(counts)}


def eval_against_truth(
    model: DictModel,
    X: SignalMatrix,
    truth: Optional[PlantedInstance] = None,
    config: Optional[LearnConfig] = None,
    trace: Optional[LearnTrace] = None,
    outlier_indices: Optional[Sequence[int]] = None,
    outlier_trace: Optional[List[OutlierTraceRecord]] = None,
    wall_time_ms: float = 0.0,
) -> RunMetrics:
    """计算一次运行的度量

    Args:
        model: 学到的模型
        X: 信号矩阵
        truth: 合成实例真值；提供时计算 gamma* 与各界比值
        config: 运行参数；OutlierConfig 表示离群变体
        trace: DictApprox 轨迹
        outlier_indices: 离群变体宣告的离群列
        outlier_trace: 离群变体轨迹
        wall_time_ms: 运行耗时

    Returns:
        RunMetrics: 度量结果
    """
    psi_final = reconstruction_error(X, model)
    if truth is not None and (truth.X.d, truth.X.n) != (X.d, X.n):
        raise DimensionMismatchError(f"真值维度 ({truth.X.d}, {truth.X.n}) 与 X ({X.d}, {X.n}) 不一致")

    is_outlier_run = outlier_indices is not None
    psi_hat_final = outlier_error(X, model, outlier_indices) if is_outlier_run else None

    metrics = RunMetrics(
        config=config.echo() if config is not None else {},
        summary=RunSummary(
            psi_final=psi_final,
            psi_hat_final=psi_hat_final,
            atom_count=model.atom_count,
            max_sparsity=model.max_code_length,
            wall_time_ms=wall_time_ms,
        ),
        sparsity_histogram=sparsity_histogram(model),
    )
    if trace is not None:
        metrics.trace = [dict(zip(TRACE_COLUMNS, r.as_row())) for r in trace.records]
    elif outlier_trace is not None:
        metrics.trace = [dict(zip(OUTLIER_TRACE_COLUMNS, r.as_row())) for r in outlier_trace]
    if config is not None:
        metrics.iteration_cap_ratio = model.atom_count / config.max_iters

    if truth is None:
        return metrics

    truth_model = truth.truth_model()
    if is_outlier_run:
        gamma = compute_gamma_star(X, truth_model, truth.inlier_indices)
        metrics.outlier_overlap = len(set(int(i) for i in outlier_indices) & set(int(i) for i in truth.outlier_indices))
        planted_error = float(np.sum(gamma.per_column[truth.inlier_indices] * X.col_sq_norms[truth.inlier_indices]))
        if isinstance(config, OutlierConfig):
            proof_denom = planted_error + config.epsilon * X.frob_sq_of(truth.inlier_indices)
            stated_denom = (gamma.value + config.epsilon) * X.frob_sq
            metrics.outlier_ratio_inlier = psi_hat_final / proof_denom if proof_denom > 0 else None
            metrics.outlier_ratio_total = psi_hat_final / stated_denom if stated_denom > 0 else None
    else:
        gamma = compute_gamma_star(X, truth_model)
    metrics.gamma_star = gamma.value

    if trace is not None and config is not None:
        metrics.bound_ratio_per_t = bound_ratios(trace, config, gamma.value)
        metrics.progress_ratio_per_t = progress_ratios(trace, config, gamma.value)
        if not metrics.bounds_hold():
            logger.warning(f"收敛界比值超过 1: max={max(metrics.bound_ratio_per_t)!r}")

    logger.info(
        f"评估完成: psi={psi_final:.6e}, gamma*={gamma.value:.6e}, 原子数={model.atom_count}, "
        f"最大码长={model.max_code_length}"
    )
    return metrics
