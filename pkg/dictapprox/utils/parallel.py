"""固定分块的并行映射

块的划分只取决于 chunk_size，与线程数无关；结果按块顺序拼接，
因此任何 n_jobs 下输出逐位一致。
"""
from typing import Callable, List, Optional, TypeVar

from joblib import Parallel, delayed

from dictapprox.core.config import settings

T = TypeVar("T")


def fixed_slices(n_items: int, chunk_size: int) -> List[slice]:
    return [slice(start, min(start + chunk_size, n_items)) for start in range(0, n_items, chunk_size)]


def chunked_map(
    func: Callable[[slice], T],
    n_items: int,
    chunk_size: int,
    n_jobs: Optional[int] = None,
) -> List[T]:
    """按固定块对 [0, n_items) 调用 func，返回按块顺序排列的结果

    Args:
        func: 接收一个 slice 的纯函数
        n_items: 元素总数
        chunk_size: 每块元素数
        n_jobs: 线程数，默认 settings.DEFAULT_THREADS
    """
    slices = fixed_slices(n_items, chunk_size)
    n_jobs = n_jobs or settings.DEFAULT_THREADS
    if n_jobs == 1 or len(slices) <= 1:
        return [func(s) for s in slices]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(s) for s in slices)
