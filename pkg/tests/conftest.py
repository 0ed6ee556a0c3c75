import numpy as np
import pytest

from dictapprox.models import TCInstance


def random_unit(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_tc_instance(rng: np.random.Generator, d: int, n: int, tau: float) -> TCInstance:
    """单位球内随机向量（方向均匀，长度 [0, 1] 均匀）与 [0, 1] 均匀权重"""
    directions = rng.standard_normal((d, n))
    directions /= np.linalg.norm(directions, axis=0)
    vectors = directions * rng.uniform(0.0, 1.0, size=n)
    weights = rng.uniform(0.0, 1.0, size=n)
    return TCInstance(vectors=vectors, weights=weights, tau=tau)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
