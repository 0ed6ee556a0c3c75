"""异常定义

每个异常都带有 exit_code，命令行入口据此决定进程退出码：
1 表示用法/输入文件问题，2 表示数值或契约违例。
"""


class DictApproxError(Exception):
    """所有 dictapprox 异常的基类"""
    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class UsageError(DictApproxError):
    """命令行用法错误或输入文件不可用"""
    exit_code = 1


class MatrixFormatError(UsageError):
    """CSV/JSON 矩阵文件格式错误"""


class ContractViolationError(DictApproxError, ValueError):
    """前置条件不满足（非单位向量、阈值越界等）"""


class ConfigError(ContractViolationError):
    """学习参数非法"""


class DecompositionError(ContractViolationError):
    """调用方给出的分解恒等式不成立"""


class UnsupportedDimensionError(ContractViolationError):
    """网格预言机不支持的维度"""


class DimensionMismatchError(ContractViolationError):
    """模型、信号矩阵与真值维度不一致"""
