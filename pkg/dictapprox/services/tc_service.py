"""阈值相关（tau-TC）问题

目标函数求值、候选扫描双准则求解器（(tau/4, tau^2/32)-近似）以及两个验证用预言机。
"""
from typing import Optional, Protocol, Tuple

import numpy as np

from dictapprox.core.config import settings
from dictapprox.core.exceptions import ContractViolationError, UnsupportedDimensionError
from dictapprox.core.linalg import ZERO_NORM_TOL, basis_vector, check_unit
from dictapprox.core.logger import setup_logger
from dictapprox.models.tc import TCInstance, TCSolution
from dictapprox.utils.parallel import chunked_map
from dictapprox.utils.sphere import iter_sphere_grid

logger = setup_logger("dictapprox.tc")


def _thresholded_values(points: np.ndarray, instance: TCInstance, threshold: float) -> np.ndarray:
    """points (c x d) 每行作为 x 时的阈值目标值"""
    sq = (points @ instance.vectors) ** 2
    sq[sq < threshold] = 0.0
    return sq @ instance.weights


def evaluate(instance: TCInstance, x: np.ndarray, threshold: float) -> Tuple[float, np.ndarray]:
    """阈值目标 sum_{<x,v_i>^2 >= threshold} w_i <x, v_i>^2

    Args:
        instance: tau-TC 实例
        x: 单位向量
        threshold: 阈值，取值 [0, 1]，比较为不带容差的 >=

    Returns:
        Tuple[float, np.ndarray]: (目标值, 命中下标)
    """
    x = check_unit(x, "x")
    if x.shape[0] != instance.d:
        raise ContractViolationError(f"x 维度 {x.shape[0]} 与实例维度 {instance.d} 不一致")
    if not 0.0 <= threshold <= 1.0:
        raise ContractViolationError(f"阈值必须在 [0, 1] 内: {threshold!r}")
    sq = (x @ instance.vectors) ** 2
    mask = sq >= threshold
    value = float(np.dot(instance.weights[mask], sq[mask]))
    return value, np.flatnonzero(mask)


class TCSolver(Protocol):
    """tau-TC 双准则求解器接口"""

    def alpha(self, tau: float) -> float: ...

    def beta(self, tau: float) -> float: ...

    def solve(self, instance: TCInstance) -> TCSolution: ...


class BicriteriaTCSolver:
    """候选扫描求解器

    对每个范数不小于 1e-12 的输入向量 v_l，以 v_l / ||v_l|| 为候选，
    在阈值 alpha * tau 下打分，取最大者（并列取最小下标）。
    """

    def __init__(self, n_jobs: Optional[int] = None, chunk_size: Optional[int] = None):
        self.n_jobs = n_jobs or settings.DEFAULT_THREADS
        self.chunk_size = chunk_size or settings.TC_CHUNK_SIZE

    def alpha(self, tau: float) -> float:
        return tau / 4.0

    def beta(self, tau: float) -> float:
        return tau ** 2 / 32.0

    def score_candidates(self, instance: TCInstance, threshold: float) -> Tuple[np.ndarray, np.ndarray]:
        """对所有候选打分

        Returns:
            Tuple[np.ndarray, np.ndarray]: (候选下标, 对应目标值)
        """
        candidates = np.flatnonzero(instance.norms >= ZERO_NORM_TOL)
        if candidates.size == 0:
            return candidates, np.zeros(0, dtype=np.float64)

        unit = instance.vectors[:, candidates] / instance.norms[candidates]

        def score(chunk: slice) -> np.ndarray:
            return _thresholded_values(unit[:, chunk].T, instance, threshold)

        scores = chunked_map(score, candidates.size, self.chunk_size, self.n_jobs)
        return candidates, np.concatenate(scores)

    def best_candidate(self, instance: TCInstance, threshold: float) -> Tuple[Optional[int], float]:
        """阈值 threshold 下最好的输入候选 (下标, 值)；无候选时为 (None, 0)"""
        candidates, scores = self.score_candidates(instance, threshold)
        if candidates.size == 0:
            return None, 0.0
        best = int(np.argmax(scores))
        return int(candidates[best]), float(scores[best])

    def solve(self, instance: TCInstance) -> TCSolution:
        """(tau/4, tau^2/32)-近似求解

        Returns:
            TCSolution: effective_threshold = tau^2 / 4；无可用候选或权重全零时返回退化解
        """
        tau = instance.tau
        alpha, beta = self.alpha(tau), self.beta(tau)
        effective = alpha * tau

        index = None
        if np.any(instance.weights > 0):
            index, _ = self.best_candidate(instance, effective)

        if index is None:
            logger.debug("tau-TC 实例退化：无非零向量或权重全零")
            return TCSolution(
                x=basis_vector(instance.d),
                objective_at=0.0,
                effective_threshold=effective,
                hit_set=np.zeros(0, dtype=np.intp),
                alpha=alpha,
                beta=beta,
                candidate_index=None,
                degenerate=True,
            )

        x = instance.vectors[:, index] / instance.norms[index]
        value, hits = evaluate(instance, x, effective)
        return TCSolution(
            x=x,
            objective_at=value,
            effective_threshold=effective,
            hit_set=hits,
            alpha=alpha,
            beta=beta,
            candidate_index=index,
        )


def solve_bicriteria(instance: TCInstance, n_jobs: Optional[int] = None) -> TCSolution:
    """候选扫描双准则求解的便捷入口"""
    return BicriteriaTCSolver(n_jobs=n_jobs).solve(instance)


def best_candidate_witness(instance: TCInstance, threshold: float, n_jobs: Optional[int] = None) -> Tuple[Optional[int], float]:
    """以归一化输入向量为候选，在任意阈值下的最好值"""
    return BicriteriaTCSolver(n_jobs=n_jobs).best_candidate(instance, threshold)


def oracle_grid(instance: TCInstance, angular_resolution: Optional[float] = None) -> Tuple[float, np.ndarray]:
    """d <= 3 时在均匀角度网格上穷举阈值 tau 的目标

    Returns:
        Tuple[float, np.ndarray]: (最优值, 最优单位向量)，是真实最优值的下界
    """
    resolution = angular_resolution or settings.ORACLE_RESOLUTION
    if instance.d > 3:
        raise UnsupportedDimensionError(f"oracle_grid 只支持 d <= 3，实际 d = {instance.d}，请改用 oracle_sample")

    best_value, best_x = -1.0, None
    for points in iter_sphere_grid(instance.d, resolution, settings.ORACLE_CHUNK_POINTS):
        values = _thresholded_values(points, instance, instance.tau)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value, best_x = float(values[i]), points[i].copy()
    return best_value, best_x


def oracle_sample(instance: TCInstance, num_samples: int, seed: int) -> Tuple[float, np.ndarray]:
    """归一化输入向量加上 num_samples 个随机单位向量，取阈值 tau 目标的最好值

    输入候选排在随机样本之前，并列时输入优先。结果由 seed 唯一确定。
    """
    if num_samples < 0:
        raise ContractViolationError(f"num_samples 不能为负: {num_samples}")

    blocks = []
    usable = instance.norms >= ZERO_NORM_TOL
    if np.any(usable):
        blocks.append((instance.vectors[:, usable] / instance.norms[usable]).T)
    if num_samples > 0:
        rng = np.random.default_rng(seed)
        samples = rng.standard_normal((num_samples, instance.d))
        norms = np.linalg.norm(samples, axis=1)
        samples = samples[norms >= ZERO_NORM_TOL] / norms[norms >= ZERO_NORM_TOL, None]
        blocks.append(samples)
    if not blocks:
        return 0.0, basis_vector(instance.d)

    points = np.vstack(blocks)
    values = _thresholded_values(points, instance, instance.tau)
    i = int(np.argmax(values))
    return float(values[i]), points[i].copy()


def top_singular_direction(instance: TCInstance) -> Tuple[np.ndarray, float]:
    """tau = 0 时的精确解：加权向量矩阵的最大左奇异向量及奇异值平方"""
    weighted = instance.vectors * np.sqrt(instance.weights)
    U, s, _ = np.linalg.svd(weighted, full_matrices=False)
    return U[:, 0].copy(), float(s[0] ** 2)
