import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from dictapprox.core.exceptions import ConfigError
from dictapprox.models.dictionary import DictModel


def outlier_budget(n: int, rho: float) -> int:
    """floor(rho n)，按 rho 的十进制表示精确取整，且不超过 n - 1"""
    if n < 1:
        return 0
    return min(n - 1, math.floor(Fraction(repr(float(rho))) * n))


class LearnConfig(BaseModel):
    """DictApprox 学习参数

    Attributes:
        k: 承诺的稀疏度
        m: 承诺的字典大小
        lam: 范数界 Lambda >= 1（||Y_i*||^2 <= Lambda ||x_i||^2）
        epsilon: 精度 epsilon，取值 (0, 1]
        max_iters_override: 覆盖推导出的迭代上限 M
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    k: int = Field(ge=1)
    m: int = Field(ge=1)
    lam: float = Field(ge=1.0, alias="lambda")
    epsilon: float = Field(gt=0.0, le=1.0)
    max_iters_override: Optional[int] = Field(default=None, ge=1)

    @classmethod
    def create(cls, **kwargs) -> "LearnConfig":
        """构造配置，校验失败时抛出 ConfigError"""
        try:
            return cls(**kwargs)
        except ValidationError as e:
            raise ConfigError(f"学习参数非法: {e.errors()}")

    @property
    def tau(self) -> float:
        """tau = epsilon^2 / (16 k Lambda)"""
        return self.epsilon ** 2 / (16.0 * self.k * self.lam)

    @property
    def alpha(self) -> float:
        return self.tau / 4.0

    @property
    def beta(self) -> float:
        return self.tau ** 2 / 32.0

    @property
    def accept_threshold(self) -> float:
        """alpha * tau，更新判据 <z_i, v>^2 >= alpha tau ||x_i||^2 中的系数"""
        return self.alpha * self.tau

    @property
    def derived_max_iters(self) -> int:
        """M = ceil(16 m Lambda / (beta epsilon))"""
        return math.ceil(16.0 * self.m * self.lam / (self.beta * self.epsilon))

    @property
    def max_iters(self) -> int:
        return self.max_iters_override or self.derived_max_iters

    @property
    def sparsity_cap(self) -> int:
        """ceil(1 / (alpha tau))"""
        return math.ceil(1.0 / self.accept_threshold)

    @property
    def closed_form_atom_bound(self) -> float:
        """16 m Lambda / (beta epsilon) 的闭式 131072 m k^2 Lambda^3 / epsilon^5"""
        return 131072.0 * self.m * self.k ** 2 * self.lam ** 3 / self.epsilon ** 5

    @property
    def closed_form_sparsity_bound(self) -> float:
        """1 / (alpha tau) 的闭式 1024 k^2 Lambda^2 / epsilon^4"""
        return 1024.0 * self.k ** 2 * self.lam ** 2 / self.epsilon ** 4

    def echo(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "m": self.m,
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "max_iters_override": self.max_iters_override,
            "tau": self.tau,
            "alpha": self.alpha,
            "beta": self.beta,
            "max_iters": self.max_iters,
            "sparsity_cap": self.sparsity_cap,
        }


class OutlierConfig(LearnConfig):
    """OutlierDictApprox 参数，在 LearnConfig 基础上增加离群比例 rho"""

    rho: float = Field(ge=0.0, lt=1.0)

    @property
    def stop_threshold(self) -> float:
        """delta = beta epsilon^3 / (16 m Lambda)"""
        return self.beta * self.epsilon ** 3 / (16.0 * self.m * self.lam)

    @property
    def derived_max_iters(self) -> int:
        """ceil(16 m Lambda / (epsilon^3 beta))"""
        return math.ceil(16.0 * self.m * self.lam / (self.epsilon ** 3 * self.beta))

    def outlier_count(self, n: int) -> int:
        return outlier_budget(n, self.rho)

    def echo(self) -> Dict[str, Any]:
        data = super().echo()
        data.update({"rho": self.rho, "stop_threshold": self.stop_threshold})
        return data


@dataclass
class TraceRecord:
    """单次迭代后的状态"""
    t: int
    psi: float
    phi: float
    tc_objective: float
    atoms: int
    max_support: int

    def as_row(self) -> List[Any]:
        return [self.t, self.psi, self.phi, self.tc_objective, self.atoms, self.max_support]


TRACE_COLUMNS = ["t", "psi", "phi", "tc_objective", "atoms", "max_support"]


@dataclass
class LearnTrace:
    """学习轨迹

    Attributes:
        records: t = 0 起的逐次迭代记录
        model: 最终 DictModel
        termination_reason: max_iters / degenerate_tc / psi_floor
    """
    records: List[TraceRecord] = field(default_factory=list)
    model: Optional[DictModel] = None
    termination_reason: str = "max_iters"

    @property
    def psi_history(self) -> List[float]:
        return [r.psi for r in self.records]

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]


@dataclass
class OutlierTraceRecord:
    t: int
    phi: float
    psi_hat: float
    phi_drop: float

    def as_row(self) -> List[Any]:
        return [self.t, self.phi, self.psi_hat, self.phi_drop]


OUTLIER_TRACE_COLUMNS = ["t", "phi", "psi_hat", "phi_drop"]


@dataclass
class OutlierResult:
    """OutlierDictApprox 结果

    Attributes:
        model: 学得的 DictModel
        outlier_indices: 恰好 floor(rho n) 个被宣告为离群的列（按下标升序）
        psi_hat_final: 终止时的 psi_hat（未归一化）
        trace: 逐次迭代记录
        termination_reason: early_return / phi_drop / max_iters / degenerate_tc / psi_floor
    """
    model: DictModel
    outlier_indices: List[int]
    psi_hat_final: float
    trace: List[OutlierTraceRecord] = field(default_factory=list)
    termination_reason: str = "phi_drop"

    @property
    def iterations(self) -> int:
        return self.model.atom_count
