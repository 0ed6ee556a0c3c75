from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dictapprox.core.exceptions import ContractViolationError
from dictapprox.core.linalg import UNIT_TOL


@dataclass(frozen=True, eq=False)
class TCInstance:
    """tau-TC 问题实例

    Attributes:
        vectors: d x n，第 i 列为 v_i，||v_i|| <= 1
        weights: n 个非负权重 w_i
        tau: 阈值，取值 [0, 1]
    """
    vectors: np.ndarray
    weights: np.ndarray
    tau: float
    norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64, copy=True)
        if vectors.ndim == 1:
            vectors = vectors.reshape(-1, 1)
        weights = np.array(self.weights, dtype=np.float64, copy=True).ravel()
        if vectors.ndim != 2 or vectors.shape[0] < 1:
            raise ContractViolationError(f"向量矩阵形状非法: {vectors.shape}")
        if weights.shape[0] != vectors.shape[1]:
            raise ContractViolationError(f"权重个数 {weights.shape[0]} 与向量个数 {vectors.shape[1]} 不一致")
        if not (np.all(np.isfinite(vectors)) and np.all(np.isfinite(weights))):
            raise ContractViolationError("实例包含非有限值")
        if np.any(weights < 0):
            raise ContractViolationError("权重必须非负")
        if not 0.0 <= float(self.tau) <= 1.0:
            raise ContractViolationError(f"tau 必须在 [0, 1] 内: {self.tau!r}")
        norms = np.sqrt(np.einsum("ij,ij->j", vectors, vectors))
        if norms.size and float(norms.max()) > 1.0 + UNIT_TOL:
            raise ContractViolationError(f"向量超出单位球: max ||v_i|| = {float(norms.max())!r}")
        vectors.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "norms", norms)

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def with_weights(self, weights: np.ndarray) -> "TCInstance":
        return TCInstance(self.vectors, weights, self.tau)


@dataclass(frozen=True, eq=False)
class TCSolution:
    """双准则求解结果

    Attributes:
        x: 单位向量
        objective_at: 在 effective_threshold 下的阈值目标值
        effective_threshold: 计算 objective_at 所用阈值（双准则求解器为 alpha * tau）
        hit_set: <x, v_i>^2 >= effective_threshold 的下标
        alpha, beta: 求解器的双准则参数
        candidate_index: 胜出的输入候选下标，退化时为 None
        degenerate: 所有向量近零或权重全零时为 True
    """
    x: np.ndarray
    objective_at: float
    effective_threshold: float
    hit_set: np.ndarray
    alpha: float
    beta: float
    candidate_index: Optional[int] = None
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "effective_threshold": float(self.effective_threshold),
            "objective": float(self.objective_at),
            "hit_set": [int(i) for i in self.hit_set],
            "degenerate": bool(self.degenerate),
        }
