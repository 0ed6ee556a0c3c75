from .signal import SignalMatrix
from .dictionary import DictModel
from .residual import ResidualState
from .tc import TCInstance, TCSolution
from .learning import (
    LearnConfig,
    LearnTrace,
    OutlierConfig,
    OutlierResult,
    OutlierTraceRecord,
    TraceRecord,
)
from .norms import LowerBoundResult, NormInstance
from .planted import PlantedInstance
from .metrics import RunMetrics, RunSummary

__all__ = [
    "SignalMatrix",
    "DictModel",
    "ResidualState",
    "TCInstance",
    "TCSolution",
    "LearnConfig",
    "LearnTrace",
    "TraceRecord",
    "OutlierConfig",
    "OutlierResult",
    "OutlierTraceRecord",
    "NormInstance",
    "LowerBoundResult",
    "PlantedInstance",
    "RunMetrics",
    "RunSummary",
]
