"""矩阵 CSV 与 JSON 读写

CSV 约定：每行一个矩阵行，逗号分隔，无表头，维度由内容推断。
浮点数按 repr 输出（最短可逆表示，至多 17 位有效数字），读回后逐位一致。
"""
import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

import numpy as np

from dictapprox.core.exceptions import MatrixFormatError, UsageError
from dictapprox.core.logger import setup_logger

logger = setup_logger("dictapprox.matrix_io")

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise MatrixFormatError(f"无法序列化非有限值: {value!r}")
    return repr(value)


def _format_cell(value: Any) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if value is None:
        return ""
    return format_float(value)


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """读取 CSV 矩阵

    Args:
        path: 文件路径

    Returns:
        np.ndarray: float64 二维矩阵
    """
    path = Path(path)
    if not path.exists():
        raise UsageError(f"矩阵文件不存在: {path}")

    rows: List[List[float]] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            # 跳过空行
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise MatrixFormatError(f"{path}:{line_no} 含有非数值单元格")

    if not rows:
        raise MatrixFormatError(f"矩阵文件为空: {path}")
    width = len(rows[0])
    for line_no, row in enumerate(rows, start=1):
        if len(row) != width:
            raise MatrixFormatError(f"{path} 第 {line_no} 个数据行有 {len(row)} 列，期望 {width} 列")

    matrix = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(matrix)):
        raise MatrixFormatError(f"{path} 含有非有限值")
    logger.debug(f"读取矩阵 {path}: {matrix.shape[0]} x {matrix.shape[1]}")
    return matrix


def matrix_to_csv(matrix: np.ndarray) -> str:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    buf = io.StringIO()
    for row in matrix:
        buf.write(",".join(format_float(v) for v in row))
        buf.write("\n")
    return buf.getvalue()


def write_matrix_csv(path: PathLike, matrix: np.ndarray) -> None:
    _write_text(path, matrix_to_csv(matrix))


def rows_to_csv(header: Optional[Sequence[str]], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    if header:
        buf.write(",".join(header))
        buf.write("\n")
    for row in rows:
        buf.write(",".join(_format_cell(v) for v in row))
        buf.write("\n")
    return buf.getvalue()


def write_rows_csv(path: PathLike, header: Optional[Sequence[str]], rows: Iterable[Sequence[Any]]) -> None:
    """写轨迹类 CSV（带表头）"""
    _write_text(path, rows_to_csv(header, rows))


def read_rows_csv(path: PathLike) -> List[dict]:
    """读取带表头的轨迹 CSV，数值列转为 float/int"""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"文件不存在: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        records = []
        for row in reader:
            parsed = {}
            for key, value in row.items():
                try:
                    parsed[key] = int(value) if value.lstrip("-").isdigit() else float(value)
                except (ValueError, AttributeError):
                    raise MatrixFormatError(f"{path} 列 {key} 含有非数值: {value!r}")
            records.append(parsed)
    return records


def dumps_json(payload: Any) -> str:
    return json.dumps(payload, ensure_ascii=False, allow_nan=False)


def write_json(path: PathLike, payload: Any) -> None:
    _write_text(path, dumps_json(payload) + "\n")


def read_json(path: PathLike) -> Any:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"文件不存在: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise MatrixFormatError(f"{path} 不是合法 JSON: {e}")


def _write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.debug(f"写入文件: {path}")
