"""带已知真值的合成实例生成

X = A*Y* + E + N*：内点列由 k 个原子的高斯组合加上与之正交的噪声构成，
噪声整体缩放到 ||E||_F^2 = noise_ratio ||A*Y*_I||_F^2；离群列是随机方向、
范数为内点中位范数 [2, 10] 倍的向量。给定 seed 时结果逐位确定。
"""
import math
from typing import Literal

import numpy as np

from dictapprox.core.exceptions import ConfigError, ContractViolationError
from dictapprox.core.logger import setup_logger
from dictapprox.models.learning import outlier_budget
from dictapprox.models.planted import PlantedInstance
from dictapprox.models.signal import SignalMatrix

logger = setup_logger("dictapprox.synth")

DictKind = Literal["orthonormal", "random_unit"]
DICT_KINDS = ("orthonormal", "random_unit")


def _validate(d: int, n: int, m: int, k: int, noise_ratio: float, rho: float, dict_kind: str) -> None:
    if min(d, n, m, k) < 1:
        raise ConfigError(f"d, n, m, k 必须为正整数: d={d}, n={n}, m={m}, k={k}")
    if k > m:
        raise ConfigError(f"k={k} 不能大于 m={m}")
    if dict_kind not in DICT_KINDS:
        raise ConfigError(f"未知字典类型: {dict_kind}，可选 {DICT_KINDS}")
    if dict_kind == "orthonormal" and m > d:
        raise ConfigError(f"正交字典要求 m <= d: m={m}, d={d}")
    if not 0.0 <= noise_ratio <= 0.5:
        raise ConfigError(f"noise_ratio 必须在 [0, 0.5] 内: {noise_ratio!r}")
    if not 0.0 <= rho < 0.5:
        raise ConfigError(f"rho 必须在 [0, 0.5) 内: {rho!r}")


def _draw_dictionary(rng: np.random.Generator, d: int, m: int, dict_kind: str) -> np.ndarray:
    G = rng.standard_normal((d, m))
    if dict_kind == "orthonormal":
        Q, R = np.linalg.qr(G)
        signs = np.where(np.diag(R) < 0, -1.0, 1.0)
        G = Q * signs
    return G / np.linalg.norm(G, axis=0)


def generate(
    d: int,
    n: int,
    m: int,
    k: int,
    noise_ratio: float = 0.0,
    rho: float = 0.0,
    dict_kind: DictKind = "orthonormal",
    seed: int = 0,
) -> PlantedInstance:
    """生成带已知 (A*, Y*, N*) 的实例

    Args:
        d: 信号维度
        n: 信号个数
        m: 字典大小
        k: 每个内点列的支撑大小
        noise_ratio: ||E||_F^2 / ||A*Y*_I||_F^2
        rho: 离群比例，离群列数为 floor(rho n)
        dict_kind: orthonormal 或 random_unit
        seed: 随机种子

    Returns:
        PlantedInstance: gamma* 与 Lambda 为实测值
    """
    _validate(d, n, m, k, noise_ratio, rho, dict_kind)
    rng = np.random.default_rng(seed)

    A_star = _draw_dictionary(rng, d, m, dict_kind)

    n_out = outlier_budget(n, rho)
    outliers = np.sort(rng.choice(n, size=n_out, replace=False)) if n_out else np.zeros(0, dtype=np.intp)
    inliers = np.setdiff1d(np.arange(n), outliers)

    Y_star = np.zeros((m, n), dtype=np.float64)
    for i in inliers:
        support = np.sort(rng.choice(m, size=k, replace=False))
        Y_star[support, i] = rng.standard_normal(k)
    clean = A_star @ Y_star

    E = np.zeros((d, n), dtype=np.float64)
    if noise_ratio > 0:
        E[:, inliers] = rng.standard_normal((d, inliers.size))
        clean_sq = np.einsum("ij,ij->j", clean, clean)
        proj = np.divide(
            np.einsum("ij,ij->j", E, clean), clean_sq, out=np.zeros(n), where=clean_sq > 0
        )
        # 噪声与干净列正交
        E -= clean * proj
        noise_sq = float(np.sum(E * E))
        if noise_sq <= 0.0:
            raise ContractViolationError("无法构造与信号正交的噪声（d 过小）")
        E *= math.sqrt(noise_ratio * float(clean_sq[inliers].sum()) / noise_sq)

    X = clean + E
    inlier_norms = np.linalg.norm(X[:, inliers], axis=0)
    median_norm = float(np.median(inlier_norms)) if inliers.size else 1.0
    N_star = np.zeros((d, n_out), dtype=np.float64)
    for j in range(n_out):
        direction = rng.standard_normal(d)
        direction /= np.linalg.norm(direction)
        N_star[:, j] = direction * rng.uniform(2.0, 10.0) * median_norm
    X[:, outliers] = N_star

    error = X[:, inliers] - clean[:, inliers]
    x_sq = np.einsum("ij,ij->j", X[:, inliers], X[:, inliers])
    gamma_star = float(np.sum(error * error)) / float(x_sq.sum())
    y_sq = np.einsum("ij,ij->j", Y_star[:, inliers], Y_star[:, inliers])
    lambda_actual = float(np.max(y_sq / x_sq))

    logger.info(
        f"生成实例: d={d}, n={n}, m={m}, k={k}, noise_ratio={noise_ratio}, rho={rho}, "
        f"dict_kind={dict_kind}, seed={seed}, gamma*={gamma_star:.6g}, lambda={lambda_actual:.6g}"
    )
    return PlantedInstance(
        X=SignalMatrix(X),
        A_star=A_star,
        Y_star=Y_star,
        outlier_indices=outliers,
        N_star=N_star,
        gamma_star_actual=gamma_star,
        lambda_actual=lambda_actual,
        inlier_indices=inliers,
        seed=seed,
        params={
            "d": d,
            "n": n,
            "m": m,
            "k": k,
            "noise_ratio": noise_ratio,
            "rho": rho,
            "dict_kind": dict_kind,
        },
    )
