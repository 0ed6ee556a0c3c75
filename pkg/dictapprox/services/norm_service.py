"""超压缩 2->p 范数下界

按 2 的幂划分阈值层级，每层在行向量（单位权重）上运行 tau-TC 求解器，
同时把每个归一化行作为直接见证，返回真实目标 ||Ax||_p / ||x||_2 最大的见证。
"""
import math
from typing import List, Optional, Tuple

import numpy as np

from dictapprox.core.config import settings
from dictapprox.core.exceptions import ContractViolationError
from dictapprox.core.linalg import ZERO_NORM_TOL, basis_vector
from dictapprox.core.logger import setup_logger
from dictapprox.models.norms import LowerBoundResult, NormInstance
from dictapprox.models.tc import TCInstance
from dictapprox.services.tc_service import BicriteriaTCSolver
from dictapprox.utils.parallel import chunked_map
from dictapprox.utils.sphere import iter_sphere_grid

logger = setup_logger("dictapprox.norms")

LEVEL_CHUNK = 8


def eval_2_to_p(A: np.ndarray, p: float, x: np.ndarray) -> float:
    """||A x||_p / ||x||_2"""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != A.shape[1]:
        raise ContractViolationError(f"x 维度 {x.shape[0]} 与矩阵列数 {A.shape[1]} 不一致")
    if p < 1:
        raise ContractViolationError(f"p 必须不小于 1: {p!r}")
    norm_x = float(np.linalg.norm(x))
    if norm_x == 0.0:
        raise ContractViolationError("x 不能为零向量")
    return float(np.linalg.norm(A @ x, ord=p)) / norm_x


def level_thresholds(n: int, p: float, eta: Optional[float] = None) -> np.ndarray:
    """tau_j = 2^-j，j = 0 .. ceil(log2(4n)) + ceil(p log2(1/eta))"""
    eta = eta or settings.NORM_LEVEL_FLOOR
    top = math.ceil(math.log2(4 * n)) + math.ceil(p * math.log2(1.0 / eta))
    return np.ldexp(1.0, -np.arange(top + 1))


def level_approximation_factor(tau: float, n: int, p: float) -> float:
    """层级 tau 的双准则参数 (tau/4, tau^2/32) 给出的近似因子

    alpha^(1/2 - 1/p) beta^(1/p) / (2^(1/2 + 1/p) (log2 n + 1)^(1/p))
    """
    alpha, beta = tau / 4.0, tau ** 2 / 32.0
    return (
        alpha ** (0.5 - 1.0 / p) * beta ** (1.0 / p)
        / (2.0 ** (0.5 + 1.0 / p) * (math.log2(n) + 1.0) ** (1.0 / p))
    )


def _best_row_witness(instance: NormInstance) -> Tuple[float, Optional[np.ndarray]]:
    norms = np.linalg.norm(instance.A, axis=1)
    usable = np.flatnonzero(norms >= ZERO_NORM_TOL * instance.row_scale)
    if usable.size == 0:
        return 0.0, None
    units = instance.A[usable] / norms[usable, None]
    values = np.linalg.norm(units @ instance.A.T, ord=instance.p, axis=1)
    best = int(np.argmax(values))
    witness = units[best].copy()
    return eval_2_to_p(instance.A, instance.p, witness), witness


def lower_bound_2_to_p(
    instance: NormInstance,
    n_jobs: Optional[int] = None,
    eta: Optional[float] = None,
) -> LowerBoundResult:
    """2->p 范数的可验证下界

    Args:
        instance: 范数实例
        n_jobs: 层级并行线程数
        eta: 层级下限，默认 settings.NORM_LEVEL_FLOOR

    Returns:
        LowerBoundResult: value 恰为 eval_2_to_p(A, p, witness)
    """
    if instance.row_scale <= 0.0:
        logger.info("零矩阵，下界为 0")
        return LowerBoundResult(value=0.0, witness=basis_vector(instance.d), level_used=None, row_scale=0.0)

    taus = level_thresholds(instance.n, instance.p, eta)
    ones = np.ones(instance.n, dtype=np.float64)
    solver = BicriteriaTCSolver(n_jobs=1)

    def run_levels(chunk: slice) -> List[Tuple[float, Optional[np.ndarray]]]:
        out = []
        for tau in taus[chunk]:
            solution = solver.solve(TCInstance(instance.scaled_rows, ones, float(tau)))
            if solution.degenerate:
                out.append((-1.0, None))
            else:
                out.append((eval_2_to_p(instance.A, instance.p, solution.x), solution.x))
        return out

    results = [r for chunk in chunked_map(run_levels, taus.size, LEVEL_CHUNK, n_jobs) for r in chunk]

    best_level, best_value, best_x = None, -1.0, None
    for j, (value, x) in enumerate(results):
        # 严格大于：同值取最低层级
        if x is not None and value > best_value:
            best_level, best_value, best_x = j, value, x

    row_value, row_x = _best_row_witness(instance)
    if best_x is None or row_value > best_value:
        logger.info(f"2->p 下界由行见证给出: value={row_value:.6e}")
        return LowerBoundResult(value=row_value, witness=row_x, level_used=None, row_scale=instance.row_scale)

    tau_star = float(taus[best_level])
    logger.info(f"2->p 下界: value={best_value:.6e}, 层级 tau={tau_star!r}, 层级数={taus.size}")
    return LowerBoundResult(
        value=best_value,
        witness=best_x,
        level_used=tau_star,
        row_scale=instance.row_scale,
        guaranteed_factor=level_approximation_factor(tau_star, instance.n, instance.p),
    )


def sphere_sweep_2_to_p(
    A: np.ndarray,
    p: float,
    resolution: Optional[float] = None,
    include_rows: bool = True,
) -> Tuple[float, np.ndarray]:
    """d <= 3 时在单位球网格上穷举 ||Ax||_p

    Args:
        A: n x d 矩阵
        p: 指数
        resolution: 网格角分辨率，默认 settings.ORACLE_RESOLUTION
        include_rows: 是否把归一化行也作为候选点

    Returns:
        Tuple[float, np.ndarray]: (估计值, 取得该值的单位向量)
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    resolution = resolution or settings.ORACLE_RESOLUTION
    best_value, best_x = -1.0, None
    for points in iter_sphere_grid(A.shape[1], resolution, settings.ORACLE_CHUNK_POINTS):
        values = np.linalg.norm(points @ A.T, ord=p, axis=1)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value, best_x = float(values[i]), points[i].copy()
    if include_rows:
        norms = np.linalg.norm(A, axis=1)
        usable = norms >= ZERO_NORM_TOL
        if np.any(usable):
            units = A[usable] / norms[usable, None]
            values = np.linalg.norm(units @ A.T, ord=p, axis=1)
            i = int(np.argmax(values))
            if values[i] > best_value:
                best_value, best_x = float(values[i]), units[i].copy()
    return best_value, best_x


def ratio_diagnostic(result: LowerBoundResult, oracle_value: float) -> dict:
    """下界相对参考值（如球面扫描）的实际比值，对照胜出层级的理论因子

    Returns:
        dict: achieved_ratio = oracle / value、log_ratio、log_inverse_factor（无层级胜出时为 None）、
        within_factor（log_ratio <= log_inverse_factor；无层级时为 None）
    """
    report = {
        "oracle_value": float(oracle_value),
        "achieved_ratio": None,
        "log_ratio": None,
        "log_inverse_factor": None,
        "within_factor": None,
    }
    if result.value <= 0.0 or oracle_value <= 0.0:
        return report

    report["achieved_ratio"] = oracle_value / result.value
    report["log_ratio"] = math.log(report["achieved_ratio"])
    if result.guaranteed_factor is not None:
        report["log_inverse_factor"] = -math.log(result.guaranteed_factor)
        report["within_factor"] = report["log_ratio"] <= report["log_inverse_factor"]
        if not report["within_factor"]:
            logger.warning(
                f"实际比值超出层级理论因子: log_ratio={report['log_ratio']:.6g}, "
                f"log(1/factor)={report['log_inverse_factor']:.6g}"
            )
    return report
