"""OutlierDictApprox：允许至多 rho n 个任意离群列的字典学习

迭代与 DictApprox 完全相同（对所有列，包括最终的离群列），
仅停止规则改为 (Phi^(t) - Phi^(t+1)) / ||X||_F^2 < delta。
"""
import time
from typing import Optional, Sequence, Union

import numpy as np

from dictapprox.core.exceptions import ContractViolationError, DimensionMismatchError
from dictapprox.core.logger import setup_logger
from dictapprox.models.dictionary import DictModel
from dictapprox.models.learning import OutlierConfig, OutlierResult, OutlierTraceRecord, outlier_budget
from dictapprox.models.residual import ResidualState
from dictapprox.models.signal import SignalMatrix
from dictapprox.services.pursuit_service import PursuitEngine
from dictapprox.services.tc_service import BicriteriaTCSolver, TCSolver

logger = setup_logger("dictapprox.outlier")


def outlier_count(n: int, rho: float) -> int:
    """floor(rho n)，不超过 n - 1"""
    if not 0.0 <= rho < 1.0:
        raise ContractViolationError(f"rho 必须在 [0, 1) 内: {rho!r}")
    return outlier_budget(n, rho)


def _squared_norms(residuals: Union[ResidualState, np.ndarray]) -> np.ndarray:
    if isinstance(residuals, ResidualState):
        return residuals.col_sq
    return np.asarray(residuals, dtype=np.float64).ravel()


def psi_hat(residuals: Union[ResidualState, np.ndarray], rho: float) -> float:
    """去掉 floor(rho n) 个最大列后的残差平方和

    Args:
        residuals: ResidualState，或各列残差范数平方
        rho: 离群比例

    Returns:
        float: 最小的 n - floor(rho n) 个 ||z_i||^2 之和
    """
    values = _squared_norms(residuals)
    keep = values.size - outlier_count(values.size, rho)
    return float(np.sort(values)[:keep].sum())


def declare_outliers(residuals: Union[ResidualState, np.ndarray], rho: float) -> np.ndarray:
    """残差最大的 floor(rho n) 列（同值取下标小者），按下标升序返回"""
    values = _squared_norms(residuals)
    count = outlier_count(values.size, rho)
    order = np.lexsort((np.arange(values.size), -values))
    return np.sort(order[:count])


def outlier_error(X: SignalMatrix, model: DictModel, outliers: Sequence[int]) -> float:
    """||X - A'Y' - N'||_F^2，其中 N' 在离群列上取 X - A'Y'"""
    if model.d != X.d or model.n != X.n:
        raise DimensionMismatchError(f"模型维度 ({model.d}, {model.n}) 与 X ({X.d}, {X.n}) 不一致")
    residual = X.data - model.reconstruct()
    err_sq = np.einsum("ij,ij->j", residual, residual)
    err_sq[np.asarray(outliers, dtype=np.intp)] = 0.0
    return float(err_sq.sum())


class OutlierDictApproxLearner:
    """OutlierDictApprox 学习器"""

    def __init__(self, config: OutlierConfig, solver: Optional[TCSolver] = None, n_jobs: Optional[int] = None):
        if not isinstance(config, OutlierConfig):
            raise ContractViolationError(f"config 类型错误: {type(config).__name__}")
        self.config = config
        self.solver = solver or BicriteriaTCSolver(n_jobs=n_jobs)

    def fit(self, X: SignalMatrix) -> OutlierResult:
        config = self.config
        start = time.perf_counter()
        state = ResidualState.from_signals(X)
        model = DictModel.empty(X.d, X.n)
        current = psi_hat(state, config.rho)
        trace = [OutlierTraceRecord(t=0, phi=state.phi, psi_hat=current, phi_drop=0.0)]

        def finish(reason: str) -> OutlierResult:
            outliers = declare_outliers(state, config.rho)
            elapsed = (time.perf_counter() - start) * 1000
            logger.info(
                f"OutlierDictApprox 结束: 原因={reason}, 迭代={state.t}, psi_hat={current:.6e}, "
                f"原子数={model.atom_count}, 离群列数={outliers.size}, 耗时={elapsed:.1f}ms"
            )
            return OutlierResult(
                model=model,
                outlier_indices=[int(i) for i in outliers],
                psi_hat_final=current,
                trace=trace,
                termination_reason=reason,
            )

        if current < config.epsilon * X.frob_sq:
            logger.info(f"psi_hat^(0)={current:.6e} < epsilon ||X||_F^2，直接返回空模型")
            return finish("early_return")

        engine = PursuitEngine(X, config.tau, self.solver)
        delta = config.stop_threshold
        max_iters = config.max_iters
        logger.info(
            f"开始 OutlierDictApprox: d={X.d}, n={X.n}, rho={config.rho}, "
            f"离群列数={config.outlier_count(X.n)}, delta={delta:.6g}, 迭代上限={max_iters}"
        )

        reason = "max_iters"
        while state.t < max_iters:
            phi_before = state.phi
            outcome = engine.step(state, model)
            if outcome.stop_reason:
                reason = outcome.stop_reason
                break
            drop = phi_before - state.phi
            current = psi_hat(state, config.rho)
            trace.append(OutlierTraceRecord(t=state.t, phi=state.phi, psi_hat=current, phi_drop=drop))
            logger.debug(f"t={state.t} phi={state.phi:.6e} psi_hat={current:.6e} 下降={drop:.6e}")
            # 本次原子保留
            if drop / X.frob_sq < delta:
                reason = "phi_drop"
                break

        return finish(reason)


def outlier_dict_approx(
    X: SignalMatrix,
    config: OutlierConfig,
    solver: Optional[TCSolver] = None,
    n_jobs: Optional[int] = None,
) -> OutlierResult:
    """运行 OutlierDictApprox"""
    return OutlierDictApproxLearner(config, solver=solver, n_jobs=n_jobs).fit(X)
