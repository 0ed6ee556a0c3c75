"""稠密向量/矩阵基础运算

残差更新、正部函数以及全库共用的数值容差。
"""
from typing import Tuple

import numpy as np

from dictapprox.core.exceptions import ContractViolationError

# 单位向量容差
UNIT_TOL = 1e-9
# 重构恒等式的相对容差
RECON_TOL = 1e-8
# 低于该范数的向量视为零向量
ZERO_NORM_TOL = 1e-12
# 目标值低于 DEGENERATE_TOL * ||X||_F^2 视为无进展
DEGENERATE_TOL = 1e-15


def positive_part(xi: float) -> float:
    """(xi)_+ = max{0, xi}"""
    return max(0.0, float(xi))


def check_unit(v: np.ndarray, name: str = "v") -> np.ndarray:
    """校验 v 为单位向量，返回 float64 一维数组"""
    v = np.asarray(v, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(v))
    if not np.isfinite(norm) or abs(norm - 1.0) > UNIT_TOL:
        raise ContractViolationError(f"{name} 不是单位向量: ||{name}|| = {norm!r}")
    return v


def basis_vector(d: int, index: int = 0) -> np.ndarray:
    e = np.zeros(d, dtype=np.float64)
    e[index] = 1.0
    return e


def residual_update(z: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, float]:
    """残差更新 z <- z - <z, v> v

    Args:
        z: 当前残差
        v: 单位向量（新原子）

    Returns:
        Tuple[np.ndarray, float]: (新残差, 系数 <z, v>)
    """
    v = check_unit(v)
    z = np.asarray(z, dtype=np.float64).ravel()
    if z.shape != v.shape:
        raise ContractViolationError(f"维度不一致: z{z.shape} vs v{v.shape}")
    coeff = float(z @ v)
    return z - coeff * v, coeff


def residual_update_columns(Z: np.ndarray, v: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """对 Z 的若干列原地执行 residual_update，返回各列系数

    与逐列调用 residual_update 数学上等价，columns 之间互不影响。
    """
    v = check_unit(v)
    if columns.size == 0:
        return np.zeros(0, dtype=np.float64)
    block = Z[:, columns]
    coeffs = v @ block
    Z[:, columns] = block - np.outer(v, coeffs)
    return coeffs
