import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Dict, Optional

from dictapprox.core.config import settings

# 日志格式
log_format = logging.Formatter(
    "[%(asctime)s] [%(levelname)s] [%(name)s] %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)

# 全局文件处理器（所有日志都写入同一个文件）
_global_file_handler: Optional[RotatingFileHandler] = None

# 单次运行专用文件处理器缓存
_run_file_handlers: Dict[str, RotatingFileHandler] = {}


def _log_dir() -> Path:
    log_dir = Path(settings.LOG_DIR)
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir


def get_global_file_handler() -> RotatingFileHandler:
    """获取全局文件处理器"""
    global _global_file_handler
    if _global_file_handler is None:
        _global_file_handler = RotatingFileHandler(
            _log_dir() / f"{settings.APP_NAME}.log",
            maxBytes=settings.LOG_MAX_BYTES,
            backupCount=settings.LOG_BACKUP_COUNT,
            encoding="utf-8"
        )
        _global_file_handler.setFormatter(log_format)
    return _global_file_handler


def get_run_file_handler(run_tag: str) -> RotatingFileHandler:
    """获取某次运行（如某个 CLI 子命令）的专用文件处理器"""
    if run_tag not in _run_file_handlers:
        # 去除特殊字符作为文件名
        safe_tag = "".join(c for c in run_tag if c.isalnum() or c in ("-", "_")).strip() or "run"
        handler = RotatingFileHandler(
            _log_dir() / f"run_{safe_tag}.log",
            maxBytes=settings.LOG_MAX_BYTES,
            backupCount=settings.LOG_BACKUP_COUNT,
            encoding="utf-8"
        )
        handler.setFormatter(log_format)
        _run_file_handlers[run_tag] = handler
    return _run_file_handlers[run_tag]


def setup_logger(name: str) -> logging.Logger:
    """设置日志记录器

    Args:
        name: 日志器名称；开启 LOG_TO_FILE 时同时写入全局日志文件
    """
    logger = logging.getLogger(name)

    # 避免重复添加处理器
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG if settings.DEBUG else logging.INFO)
    logger.propagate = False

    # 控制台处理器；stdout 留给 JSON 结果
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(log_format)
    logger.addHandler(console_handler)

    if settings.LOG_TO_FILE:
        logger.addHandler(get_global_file_handler())

    return logger


def attach_run_log(logger: logging.Logger, run_tag: str) -> None:
    """为已有日志器追加单次运行的文件处理器（仅在开启文件日志时生效）"""
    if not settings.LOG_TO_FILE:
        return
    handler = get_run_file_handler(run_tag)
    if handler not in logger.handlers:
        logger.addHandler(handler)


logger = setup_logger(settings.APP_NAME)
