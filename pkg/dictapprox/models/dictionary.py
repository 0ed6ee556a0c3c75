from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from dictapprox.core.exceptions import ContractViolationError, MatrixFormatError
from dictapprox.core.linalg import UNIT_TOL

CodeEntry = Tuple[int, float]


@dataclass(eq=False)
class DictModel:
    """学习得到的字典 A' 与列稀疏系数 Y'

    Attributes:
        d: 原子维度
        atoms: 有序的单位向量列表（A' 的列）
        codes: codes[i] 是信号 i 的 (原子下标, 系数) 列表（Y' 的第 i 列）
    """
    d: int
    atoms: List[np.ndarray] = field(default_factory=list)
    codes: List[List[CodeEntry]] = field(default_factory=list)

    @classmethod
    def empty(cls, d: int, n: int) -> "DictModel":
        return cls(d=d, atoms=[], codes=[[] for _ in range(n)])

    @classmethod
    def from_dense(cls, atoms: np.ndarray, coefficients: np.ndarray, tol: float = 0.0) -> "DictModel":
        """由稠密的 A (d x m) 与 Y (m x n) 构造，|Y_ji| <= tol 的项视为零"""
        atoms = np.asarray(atoms, dtype=np.float64)
        coefficients = np.asarray(coefficients, dtype=np.float64)
        if atoms.shape[1] != coefficients.shape[0]:
            raise ContractViolationError(f"A 列数 {atoms.shape[1]} 与 Y 行数 {coefficients.shape[0]} 不一致")
        codes = []
        for i in range(coefficients.shape[1]):
            support = np.flatnonzero(np.abs(coefficients[:, i]) > tol)
            codes.append([(int(j), float(coefficients[j, i])) for j in support])
        model = cls(d=atoms.shape[0], atoms=[atoms[:, j].copy() for j in range(atoms.shape[1])], codes=codes)
        model.validate()
        return model

    @property
    def atom_count(self) -> int:
        return len(self.atoms)

    @property
    def n(self) -> int:
        return len(self.codes)

    @property
    def max_code_length(self) -> int:
        return max((len(c) for c in self.codes), default=0)

    def add_atom(self, v: np.ndarray) -> int:
        """追加原子并返回其下标"""
        self.atoms.append(np.array(v, dtype=np.float64, copy=True))
        return len(self.atoms) - 1

    def add_code(self, i: int, atom_index: int, coeff: float) -> None:
        self.codes[i].append((atom_index, float(coeff)))

    def atom_matrix(self) -> np.ndarray:
        """A' (d x m')"""
        if not self.atoms:
            return np.zeros((self.d, 0), dtype=np.float64)
        return np.column_stack(self.atoms)

    def code_matrix(self) -> np.ndarray:
        """Y' (m' x n)"""
        Y = np.zeros((self.atom_count, self.n), dtype=np.float64)
        for i, code in enumerate(self.codes):
            for j, c in code:
                Y[j, i] += c
        return Y

    def reconstruct(self) -> np.ndarray:
        """A'Y' (d x n)"""
        return self.atom_matrix() @ self.code_matrix()

    def code_lengths(self) -> np.ndarray:
        return np.array([len(c) for c in self.codes], dtype=np.int64)

    def validate(self) -> None:
        """检查原子单位范数以及 codes 的下标合法且不重复"""
        for j, a in enumerate(self.atoms):
            if a.shape != (self.d,):
                raise ContractViolationError(f"原子 {j} 维度错误: {a.shape}")
            norm = float(np.linalg.norm(a))
            if abs(norm - 1.0) > UNIT_TOL:
                raise ContractViolationError(f"原子 {j} 不是单位向量: {norm!r}")
        for i, code in enumerate(self.codes):
            seen = set()
            for j, _ in code:
                if not 0 <= j < self.atom_count:
                    raise ContractViolationError(f"信号 {i} 引用了不存在的原子 {j}")
                if j in seen:
                    raise ContractViolationError(f"信号 {i} 重复引用原子 {j}")
                seen.add(j)

    def to_json(self) -> Dict[str, Any]:
        return {
            "atoms": [[float(x) for x in a] for a in self.atoms],
            "codes": [[[int(j), float(c)] for j, c in code] for code in self.codes],
        }

    @classmethod
    def from_json(cls, payload: Dict[str, Any], d: int = None) -> "DictModel":
        try:
            atoms = [np.asarray(a, dtype=np.float64) for a in payload["atoms"]]
            codes = [[(int(j), float(c)) for j, c in code] for code in payload["codes"]]
        except (KeyError, TypeError, ValueError) as e:
            raise MatrixFormatError(f"模型 JSON 格式错误: {e}")
        if d is None:
            if not atoms:
                raise MatrixFormatError("空模型必须显式给出维度 d")
            d = atoms[0].shape[0]
        model = cls(d=d, atoms=atoms, codes=codes)
        model.validate()
        return model
