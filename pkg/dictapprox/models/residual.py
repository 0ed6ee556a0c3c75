from dataclasses import dataclass, field

import numpy as np

from dictapprox.core.linalg import residual_update_columns
from dictapprox.models.signal import SignalMatrix


@dataclass(eq=False)
class ResidualState:
    """一次学习运行独占的残差状态

    Attributes:
        residuals: d x n，第 i 列为 z_i^(t)
        support_counts: Y' 第 i 列的非零个数
        phi: Phi^(t) = sum_i ||z_i^(t)||^2
        frob_sq: ||X||_F^2
        t: 已完成的迭代数
    """
    residuals: np.ndarray
    support_counts: np.ndarray
    col_sq: np.ndarray
    frob_sq: float
    x_col_sq: np.ndarray = field(repr=False)
    phi: float = 0.0
    t: int = 0

    @classmethod
    def from_signals(cls, X: SignalMatrix) -> "ResidualState":
        """z_i^(0) = x_i"""
        residuals = np.array(X.data, dtype=np.float64, order="F", copy=True)
        col_sq = X.col_sq_norms.copy()
        return cls(
            residuals=residuals,
            support_counts=np.zeros(X.n, dtype=np.int64),
            col_sq=col_sq,
            frob_sq=X.frob_sq,
            x_col_sq=X.col_sq_norms.copy(),
            phi=float(col_sq.sum()),
        )

    @property
    def n(self) -> int:
        return self.residuals.shape[1]

    @property
    def psi(self) -> float:
        """psi^(t) = Phi^(t) / ||X||_F^2，||X||_F = 0 时取 0"""
        if self.frob_sq <= 0.0:
            return 0.0
        return self.phi / self.frob_sq

    def theta(self, i: int) -> float:
        """theta_i^(t) = ||z_i||^2 / ||x_i||^2，零列取 0"""
        if self.x_col_sq[i] <= 0.0:
            return 0.0
        return float(self.col_sq[i] / self.x_col_sq[i])

    def apply(self, v: np.ndarray, columns: np.ndarray) -> np.ndarray:
        """对选中列执行残差更新，维护列范数、支撑计数与 Phi

        Returns:
            np.ndarray: 各列系数 <z_i, v>
        """
        coeffs = residual_update_columns(self.residuals, v, columns)
        if columns.size:
            # 由残差直接重算，不用勾股差分
            block = self.residuals[:, columns]
            self.col_sq[columns] = np.einsum("ij,ij->j", block, block)
            self.support_counts[columns] += 1
            self.phi = float(self.col_sq.sum())
        self.t += 1
        return coeffs

    def recompute_col_sq(self) -> np.ndarray:
        """从残差重新计算各列范数平方（不修改状态）"""
        return np.einsum("ij,ij->j", self.residuals, self.residuals)

    def recompute_phi(self) -> float:
        return float(self.recompute_col_sq().sum())
