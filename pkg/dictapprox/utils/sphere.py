"""单位球面上的均匀角度网格（d = 1, 2, 3）

目标函数关于 x -> -x 对称，因此 d = 2 只取半圆，d = 3 只取上半球。
"""
import math
from typing import Iterator

import numpy as np

from dictapprox.core.exceptions import ContractViolationError, UnsupportedDimensionError


def _polar_angles(resolution: float) -> np.ndarray:
    n_polar = math.ceil((math.pi / 2) / resolution)
    return np.linspace(0.0, math.pi / 2, n_polar + 1)


def _azimuth_count(phi: float, resolution: float) -> int:
    return max(1, math.ceil(2 * math.pi * math.sin(phi) / resolution))


def iter_sphere_grid(d: int, resolution: float, chunk_points: int) -> Iterator[np.ndarray]:
    """按块产出网格点，每块是 (points x d) 的单位向量矩阵，顺序固定"""
    if not 0.0 < resolution <= 0.1:
        raise ContractViolationError(f"角分辨率必须在 (0, 0.1] 内: {resolution!r}")
    if d == 1:
        yield np.array([[1.0], [-1.0]])
        return
    if d == 2:
        count = math.ceil(math.pi / resolution)
        for start in range(0, count, chunk_points):
            theta = np.arange(start, min(start + chunk_points, count)) * (math.pi / count)
            yield np.column_stack([np.cos(theta), np.sin(theta)])
        return
    if d == 3:
        buffer = []
        buffered = 0
        for phi in _polar_angles(resolution):
            n_az = _azimuth_count(phi, resolution)
            theta = np.arange(n_az) * (2 * math.pi / n_az)
            ring = np.column_stack([
                math.sin(phi) * np.cos(theta),
                math.sin(phi) * np.sin(theta),
                np.full(n_az, math.cos(phi)),
            ])
            buffer.append(ring)
            buffered += n_az
            if buffered >= chunk_points:
                yield np.vstack(buffer)
                buffer, buffered = [], 0
        if buffer:
            yield np.vstack(buffer)
        return
    raise UnsupportedDimensionError(f"网格只支持 d <= 3，实际 d = {d}")
