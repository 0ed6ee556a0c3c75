from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np

from dictapprox.core.exceptions import MatrixFormatError
from dictapprox.models.dictionary import DictModel
from dictapprox.models.signal import SignalMatrix


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    """带已知真值的合成实例 X = A*Y* + E + N*

    Attributes:
        X: 信号矩阵
        A_star: d x m，单位列
        Y_star: m x n，内点列支撑大小 <= k，离群列为零
        outlier_indices: 离群列下标（升序）
        N_star: d x |outliers|，离群列的取值
        gamma_star_actual: ||X_I - A*Y*_I||_F^2 / ||X_I||_F^2
        lambda_actual: max_{i in I} ||Y_i*||^2 / ||x_i||^2
        inlier_indices: 内点集合 I（升序）
        seed: 生成器种子
        params: 生成参数回显
    """
    X: SignalMatrix
    A_star: np.ndarray
    Y_star: np.ndarray
    outlier_indices: np.ndarray
    N_star: np.ndarray
    gamma_star_actual: float
    lambda_actual: float
    inlier_indices: np.ndarray
    seed: int
    params: Dict[str, Any]

    @property
    def supports(self) -> List[np.ndarray]:
        """S_i*"""
        return [np.flatnonzero(self.Y_star[:, i]) for i in range(self.Y_star.shape[1])]

    def truth_model(self) -> DictModel:
        """(A*, Y*) 作为 DictModel"""
        return DictModel.from_dense(self.A_star, self.Y_star)

    def to_truth_json(self) -> Dict[str, Any]:
        rows, cols = np.nonzero(self.Y_star)
        return {
            "A_star": [[float(v) for v in self.A_star[:, j]] for j in range(self.A_star.shape[1])],
            "Y_star": [[int(r), int(c), float(self.Y_star[r, c])] for r, c in zip(rows, cols)],
            "shape": [int(self.X.d), int(self.X.n), int(self.A_star.shape[1])],
            "outliers": {
                "indices": [int(i) for i in self.outlier_indices],
                "values": [[float(v) for v in self.N_star[:, j]] for j in range(self.N_star.shape[1])],
            },
            "inliers": [int(i) for i in self.inlier_indices],
            "gamma_star": float(self.gamma_star_actual),
            "lambda": float(self.lambda_actual),
            "seed": int(self.seed),
            "params": self.params,
        }

    @classmethod
    def from_truth_json(cls, X: SignalMatrix, payload: Dict[str, Any]) -> "PlantedInstance":
        """由 truth.json 与重新读入的 X 还原实例"""
        try:
            d, n, m = (int(v) for v in payload["shape"])
            A_star = np.array(payload["A_star"], dtype=np.float64).reshape(m, d).T
            Y_star = np.zeros((m, n), dtype=np.float64)
            for r, c, v in payload["Y_star"]:
                Y_star[int(r), int(c)] = float(v)
            outlier_indices = np.array(payload["outliers"]["indices"], dtype=np.intp)
            values = payload["outliers"]["values"]
            N_star = np.array(values, dtype=np.float64).reshape(len(values), d).T
            inliers = np.array(payload["inliers"], dtype=np.intp)
            return cls(
                X=X,
                A_star=A_star,
                Y_star=Y_star,
                outlier_indices=outlier_indices,
                N_star=N_star,
                gamma_star_actual=float(payload["gamma_star"]),
                lambda_actual=float(payload["lambda"]),
                inlier_indices=inliers,
                seed=int(payload["seed"]),
                params=dict(payload.get("params", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise MatrixFormatError(f"truth.json 格式错误: {e}")
