"""DictApprox：贪心阈值相关追踪字典学习

每次迭代构造 tau-TC 实例（向量 z_i / ||x_i||，权重 ||x_i||^2，tau = eps^2 / (16 k Lambda)），
把求解器返回的单位向量 v 作为新原子，并对满足 <z_i, v>^2 >= alpha tau ||x_i||^2 的列
执行 z_i <- z_i - <z_i, v> v。
"""
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dictapprox.core.exceptions import (
    ContractViolationError,
    DecompositionError,
    DimensionMismatchError,
)
from dictapprox.core.linalg import DEGENERATE_TOL, UNIT_TOL, check_unit, positive_part
from dictapprox.core.logger import setup_logger
from dictapprox.models.dictionary import DictModel
from dictapprox.models.learning import LearnConfig, LearnTrace, TraceRecord
from dictapprox.models.residual import ResidualState
from dictapprox.models.signal import SignalMatrix
from dictapprox.models.tc import TCInstance, TCSolution
from dictapprox.services.tc_service import BicriteriaTCSolver, TCSolver

logger = setup_logger("dictapprox.pursuit")


@dataclass
class StepOutcome:
    """一次追踪迭代的结果

    Attributes:
        solution: tau-TC 求解结果
        accepted: 被更新的列
        stop_reason: 非空表示本次未追加原子且应终止（degenerate_tc / psi_floor）
    """
    solution: Optional[TCSolution]
    accepted: np.ndarray
    stop_reason: Optional[str] = None


class PursuitEngine:
    """DictApprox 与 OutlierDictApprox 共用的单步迭代"""

    def __init__(self, X: SignalMatrix, tau: float, solver: TCSolver):
        self.X = X
        self.tau = tau
        self.solver = solver
        self.accept_threshold = solver.alpha(tau) * tau
        # 零范数列不参与任何 tau-TC 实例
        self.active = X.nonzero_columns()
        self._x_norms = X.col_norms[self.active]
        self._x_sq = X.col_sq_norms[self.active]

    def build_instance(self, state: ResidualState) -> TCInstance:
        vectors = state.residuals[:, self.active] / self._x_norms
        return TCInstance(vectors=vectors, weights=self._x_sq, tau=self.tau)

    def step(self, state: ResidualState, model: DictModel) -> StepOutcome:
        """执行一次迭代；有进展时追加原子并更新 state 与 model"""
        empty = np.zeros(0, dtype=np.intp)
        if self.active.size == 0 or state.phi <= 0.0:
            return StepOutcome(None, empty, "psi_floor")

        solution = self.solver.solve(self.build_instance(state))
        if solution.degenerate:
            return StepOutcome(solution, empty, "degenerate_tc")
        if solution.objective_at <= DEGENERATE_TOL * state.frob_sq:
            return StepOutcome(solution, empty, "psi_floor")

        v = solution.x
        coeffs = v @ state.residuals[:, self.active]
        accepted = self.active[coeffs ** 2 >= self.accept_threshold * self._x_sq]
        if accepted.size == 0:
            return StepOutcome(solution, empty, "psi_floor")

        atom_index = model.add_atom(v)
        applied = state.apply(v, accepted)
        for i, c in zip(accepted, applied):
            model.add_code(int(i), atom_index, float(c))
        return StepOutcome(solution, accepted)


def _record(state: ResidualState, model: DictModel, tc_objective: float) -> TraceRecord:
    return TraceRecord(
        t=state.t,
        psi=state.psi,
        phi=state.phi,
        tc_objective=float(tc_objective),
        atoms=model.atom_count,
        max_support=int(state.support_counts.max()) if state.n else 0,
    )


class DictApproxLearner:
    """DictApprox 学习器"""

    def __init__(self, config: LearnConfig, solver: Optional[TCSolver] = None, n_jobs: Optional[int] = None):
        """初始化学习器

        Args:
            config: 学习参数
            solver: tau-TC 求解器，默认候选扫描双准则求解器
            n_jobs: 候选扫描线程数
        """
        if not isinstance(config, LearnConfig):
            raise ContractViolationError(f"config 类型错误: {type(config).__name__}")
        self.config = config
        self.solver = solver or BicriteriaTCSolver(n_jobs=n_jobs)

    def fit(self, X: SignalMatrix) -> Tuple[DictModel, LearnTrace]:
        config = self.config
        start = time.perf_counter()
        state = ResidualState.from_signals(X)
        model = DictModel.empty(X.d, X.n)
        trace = LearnTrace(records=[_record(state, model, 0.0)], model=model)

        if X.frob_sq <= 0.0:
            logger.info("输入矩阵全零，直接返回空模型")
            trace.termination_reason = "psi_floor"
            return model, trace

        engine = PursuitEngine(X, config.tau, self.solver)
        max_iters = config.max_iters
        logger.info(
            f"开始 DictApprox: d={X.d}, n={X.n}, k={config.k}, m={config.m}, "
            f"lambda={config.lam}, epsilon={config.epsilon}, tau={config.tau:.6g}, M={max_iters}"
        )

        reason = "max_iters"
        while state.t < max_iters:
            outcome = engine.step(state, model)
            if outcome.stop_reason:
                reason = outcome.stop_reason
                break
            trace.records.append(_record(state, model, outcome.solution.objective_at))
            logger.debug(
                f"t={state.t} psi={state.psi:.6e} 命中列数={outcome.accepted.size} "
                f"最大支撑={trace.records[-1].max_support}"
            )

        trace.termination_reason = reason
        elapsed = (time.perf_counter() - start) * 1000
        logger.info(
            f"DictApprox 结束: 原因={reason}, 迭代={state.t}, psi={state.psi:.6e}, "
            f"原子数={model.atom_count}, 最大码长={model.max_code_length}, 耗时={elapsed:.1f}ms"
        )
        return model, trace


def dict_approx(
    X: SignalMatrix,
    config: LearnConfig,
    solver: Optional[TCSolver] = None,
    n_jobs: Optional[int] = None,
) -> Tuple[DictModel, LearnTrace]:
    """运行 DictApprox，返回 (模型, 轨迹)"""
    return DictApproxLearner(config, solver=solver, n_jobs=n_jobs).fit(X)


@dataclass
class InequalityCheck:
    lhs: float
    rhs: float
    passed: bool


@dataclass
class AnalysisReport:
    """分析不等式检查结果

    Attributes:
        theta: ||u - Pi_T u||
        increment: sum_i <u - Pi_T u, s_i>^2 >= (theta^2 - ||z||^2)_+^2 / (4 sum_i alpha_i^2)
        convexity: sum_i (theta_i - gamma_i)_+^2 ||x_i||^2 >= (psi - gamma*)_+^2 ||X||_F^2，未提供列数据时为 None
    """
    theta: float
    increment: InequalityCheck
    convexity: Optional[InequalityCheck] = None

    @property
    def passed(self) -> bool:
        return self.increment.passed and (self.convexity is None or self.convexity.passed)


@dataclass
class ColumnErrorProfile:
    """逐列误差数据：theta_i、gamma_i 与 ||x_i||^2"""
    thetas: np.ndarray
    gammas: np.ndarray
    col_sq: np.ndarray


def _holds(lhs: float, rhs: float, slack: float) -> bool:
    return lhs >= rhs - slack * max(1.0, abs(rhs))


def verify_convexity_inequality(profile: ColumnErrorProfile, slack: float = 1e-10) -> InequalityCheck:
    """sum_i (theta_i - gamma_i)_+^2 ||x_i||^2 >= (psi - gamma*)_+^2 ||X||_F^2"""
    thetas = np.asarray(profile.thetas, dtype=np.float64)
    gammas = np.asarray(profile.gammas, dtype=np.float64)
    col_sq = np.asarray(profile.col_sq, dtype=np.float64)
    if not (thetas.shape == gammas.shape == col_sq.shape):
        raise ContractViolationError("theta、gamma 与列范数长度不一致")
    frob_sq = float(col_sq.sum())
    if frob_sq <= 0.0:
        return InequalityCheck(0.0, 0.0, True)
    psi = float(thetas @ col_sq) / frob_sq
    gamma_star = float(gammas @ col_sq) / frob_sq
    lhs = float((np.maximum(thetas - gammas, 0.0) ** 2) @ col_sq)
    rhs = positive_part(psi - gamma_star) ** 2 * frob_sq
    return InequalityCheck(lhs, rhs, _holds(lhs, rhs, slack))


def verify_analysis_inequalities(
    u: np.ndarray,
    atoms: Sequence[np.ndarray],
    coeffs: Sequence[float],
    z: np.ndarray,
    T_basis: np.ndarray,
    column_data: Optional[ColumnErrorProfile] = None,
    slack: float = 1e-10,
) -> AnalysisReport:
    """检查增量不等式（以及可选的凸性不等式）

    Args:
        u: 单位向量，满足 u = sum_i alpha_i s_i + z
        atoms: 单位向量 s_1..s_k
        coeffs: alpha_1..alpha_k
        z: 分解余项
        T_basis: d x r 的正交规范基（r 可为 0）
        column_data: 逐列数据，提供时同时检查凸性不等式
        slack: 判定容差

    Returns:
        AnalysisReport: 两侧取值及是否通过
    """
    u = check_unit(u, "u")
    d = u.shape[0]
    S = np.column_stack([check_unit(s, f"s_{j}") for j, s in enumerate(atoms)]) if len(atoms) else np.zeros((d, 0))
    alphas = np.asarray(coeffs, dtype=np.float64).ravel()
    z = np.asarray(z, dtype=np.float64).ravel()
    if S.shape[0] != d or z.shape[0] != d:
        raise ContractViolationError("u、s_i 与 z 维度不一致")
    if alphas.shape[0] != S.shape[1]:
        raise ContractViolationError(f"系数个数 {alphas.shape[0]} 与原子个数 {S.shape[1]} 不一致")

    gap = float(np.linalg.norm(u - S @ alphas - z))
    if gap > 1e-8:
        raise DecompositionError(f"u = sum alpha_i s_i + z 不成立，偏差 {gap!r}")

    T = np.asarray(T_basis, dtype=np.float64)
    if T.size == 0:
        T = np.zeros((d, 0))
    if T.ndim != 2 or T.shape[0] != d:
        raise ContractViolationError(f"T_basis 形状非法: {T.shape}")
    if T.shape[1] and np.max(np.abs(T.T @ T - np.eye(T.shape[1]))) > UNIT_TOL:
        raise ContractViolationError("T_basis 不是正交规范基")

    u_perp = u - T @ (T.T @ u)
    theta = float(np.linalg.norm(u_perp))
    lhs = float(np.sum((S.T @ u_perp) ** 2))
    sum_alpha_sq = float(alphas @ alphas)
    numerator = positive_part(theta ** 2 - float(z @ z)) ** 2
    rhs = numerator / (4.0 * sum_alpha_sq) if sum_alpha_sq > 0 else 0.0

    report = AnalysisReport(theta=theta, increment=InequalityCheck(lhs, rhs, _holds(lhs, rhs, slack)))
    if column_data is not None:
        report.convexity = verify_convexity_inequality(column_data, slack)
    return report


@dataclass
class GammaStar:
    """gamma* 及逐列 gamma_i"""
    value: float
    per_column: np.ndarray


def compute_gamma_star(X: SignalMatrix, truth: DictModel, columns: Optional[Sequence[int]] = None) -> GammaStar:
    """gamma* = ||X - A*Y*||_F^2 / ||X||_F^2

    Args:
        X: 信号矩阵
        truth: 真值分解 (A*, Y*)
        columns: 只在这些列上计算（如内点集合）；默认全部列

    Returns:
        GammaStar: ||X||_F = 0 时 value 为 0
    """
    if truth.d != X.d or truth.n != X.n:
        raise DimensionMismatchError(f"真值维度 ({truth.d}, {truth.n}) 与 X ({X.d}, {X.n}) 不一致")
    error = X.data - truth.reconstruct()
    err_sq = np.einsum("ij,ij->j", error, error)
    x_sq = X.col_sq_norms
    per_column = np.divide(err_sq, x_sq, out=np.zeros_like(err_sq), where=x_sq > 0)

    idx = np.arange(X.n) if columns is None else np.asarray(columns, dtype=np.intp)
    denom = float(x_sq[idx].sum())
    value = float(err_sq[idx].sum()) / denom if denom > 0 else 0.0
    return GammaStar(value=value, per_column=per_column)


def bound_ratios(trace: LearnTrace, config: LearnConfig, gamma_star: float) -> List[float]:
    """(psi^(t) - gamma*) beta t / (16 m Lambda)，逐行"""
    scale = config.beta / (16.0 * config.m * config.lam)
    return [(r.psi - gamma_star) * scale * r.t for r in trace.records]


def progress_ratios(trace: LearnTrace, config: LearnConfig, gamma_star: float) -> List[Optional[float]]:
    """实际下降 psi^(t) - psi^(t+1) 与保证下降 beta (psi^(t) - gamma*)^2 / (16 m Lambda) 之比

    psi^(t) <= gamma* 时保证为零，记为 None。
    """
    scale = config.beta / (16.0 * config.m * config.lam)
    ratios: List[Optional[float]] = []
    for prev, cur in zip(trace.records, trace.records[1:]):
        guaranteed = scale * positive_part(prev.psi - gamma_star) ** 2
        ratios.append((prev.psi - cur.psi) / guaranteed if guaranteed > 0 else None)
    return ratios
