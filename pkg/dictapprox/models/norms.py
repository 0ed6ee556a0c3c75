from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dictapprox.core.exceptions import ContractViolationError


@dataclass(frozen=True, eq=False)
class NormInstance:
    """2->p 范数实例

    Attributes:
        A: n x d 原始矩阵（行 v_i）
        p: 指数，p > 2
        row_scale: max_i ||v_i||，缩放后所有行落在单位球内
        scaled_rows: d x n，第 i 列为 v_i / row_scale（供 tau-TC 使用）
    """
    A: np.ndarray
    p: float
    row_scale: float = field(init=False)
    scaled_rows: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64, copy=True)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ContractViolationError(f"矩阵形状非法: {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ContractViolationError("矩阵包含非有限值")
        if not float(self.p) > 2.0:
            raise ContractViolationError(f"p 必须大于 2: {self.p!r}")
        row_norms = np.linalg.norm(A, axis=1)
        row_scale = float(row_norms.max())
        scaled = A.T / row_scale if row_scale > 0 else np.zeros_like(A.T)
        A.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "row_scale", row_scale)
        object.__setattr__(self, "scaled_rows", np.ascontiguousarray(scaled))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class LowerBoundResult:
    """2->p 范数下界

    Attributes:
        value: ||A x||_p / ||x||_2，可由 witness 精确复现
        witness: 单位向量
        level_used: 胜出层级的阈值 tau_j；行见证胜出或零矩阵时为 None
        row_scale: 行缩放因子
        guaranteed_factor: 胜出层级的理论近似因子（仅诊断）
    """
    value: float
    witness: np.ndarray
    level_used: Optional[float]
    row_scale: float
    guaranteed_factor: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "witness": [float(v) for v in self.witness],
            "level": None if self.level_used is None else float(self.level_used),
            "row_scale": float(self.row_scale),
            "guaranteed_factor": None if self.guaranteed_factor is None else float(self.guaranteed_factor),
        }
