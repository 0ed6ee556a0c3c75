import json
import os
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用配置

    字段可以来自 config/config.{env}.json，也可以通过 DICTAPPROX_ 前缀的环境变量
    （或 .env 文件）提供。JSON 文件中的值优先。
    """
    model_config = SettingsConfigDict(
        env_prefix="DICTAPPROX_",
        env_file=".env",
        extra="ignore",
    )

    # 应用配置
    APP_NAME: str = "dictapprox"
    DEBUG: bool = False

    # 日志配置
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = False  # 是否写入滚动日志文件
    LOG_MAX_BYTES: int = 10 * 1024 * 1024  # 10MB
    LOG_BACKUP_COUNT: int = 5

    # 计算配置
    DEFAULT_THREADS: int = Field(default=1, ge=1)  # 候选扫描的默认并行度
    TC_CHUNK_SIZE: int = Field(default=256, ge=1)  # 每个打分块的候选数，与线程数无关
    ORACLE_RESOLUTION: float = Field(default=1e-3, gt=0, le=0.1)  # 网格预言机角分辨率（弧度）
    ORACLE_CHUNK_POINTS: int = Field(default=4096, ge=1)  # 每个网格块的点数
    NORM_LEVEL_FLOOR: float = Field(default=1e-6, gt=0, lt=1)  # 2→p 层级网格的下限 η


def get_config(env: Optional[str] = None) -> Settings:
    """获取配置

    Args:
        env: 环境名，默认读取 DICTAPPROX_ENV，未设置时为 dev

    Returns:
        Settings: 配置对象；找不到配置文件时仅使用默认值和环境变量
    """
    env = env or os.environ.get("DICTAPPROX_ENV", "dev")
    config_dir = Path(__file__).parent.parent.parent / "config"
    config_file = config_dir / f"config.{env}.json"

    if not config_file.exists():
        config_file = config_dir / "config.json"  # 默认配置文件

    if not config_file.exists():
        return Settings()

    with open(config_file, "r", encoding="utf-8") as f:
        config_data = json.load(f)

    return Settings(**config_data)


settings = get_config()
