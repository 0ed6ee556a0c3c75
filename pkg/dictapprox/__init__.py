"""dictapprox: 无假设近似字典学习（阈值相关追踪）"""

__version__ = "0.1.0"
