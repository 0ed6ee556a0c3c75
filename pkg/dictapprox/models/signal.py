from dataclasses import dataclass, field

import numpy as np

from dictapprox.core.exceptions import ContractViolationError


@dataclass(frozen=True, eq=False)
class SignalMatrix:
    """观测矩阵 X (d x n)

    列是信号，按列连续存储（Fortran 序），构造后只读。

    Attributes:
        data: d 行 n 列的实矩阵
        col_norms: 每列的 l2 范数
        frob_sq: ||X||_F^2
    """
    data: np.ndarray
    col_norms: np.ndarray = field(init=False, repr=False)
    frob_sq: float = field(init=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, order="F", copy=True)
        if data.ndim == 1:
            data = data.reshape(-1, 1, order="F")
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ContractViolationError(f"信号矩阵必须是非空二维矩阵，实际形状 {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ContractViolationError("信号矩阵包含非有限值")
        data.flags.writeable = False

        col_sq = np.einsum("ij,ij->j", data, data)
        col_norms = np.sqrt(col_sq)
        col_norms.flags.writeable = False

        object.__setattr__(self, "data", data)
        object.__setattr__(self, "col_norms", col_norms)
        object.__setattr__(self, "frob_sq", float(col_sq.sum()))

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def col_sq_norms(self) -> np.ndarray:
        return self.col_norms ** 2

    def nonzero_columns(self, tol: float = 0.0) -> np.ndarray:
        """范数大于 tol 的列下标"""
        return np.flatnonzero(self.col_norms > tol)

    def frob_sq_of(self, columns) -> float:
        """子集列的 Frobenius 范数平方，如 ||X_I||_F^2"""
        return float(np.sum(self.col_sq_norms[np.asarray(columns, dtype=np.intp)]))
