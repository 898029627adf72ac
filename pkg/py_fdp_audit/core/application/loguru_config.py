import sys
from enum import Enum
from typing import Optional

from loguru import logger
from pydantic import BaseModel


class LogLevel(str, Enum):
    TRACE = "TRACE"
    DEBUG = "DEBUG"
    INFO = "INFO"
    SUCCESS = "SUCCESS"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class LoguruConfig(BaseModel):
    log_format: str = (
        "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
        "<level>{level: <8}</level> | "
        "<cyan>{module}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
        "<level>{message}</level>"
    )
    log_level: LogLevel = LogLevel.INFO
    log_rotation: Optional[str] = "1 day"  # None disables rotation
    log_retention: Optional[str] = "7 days"  # None disables retention
    log_file_path: Optional[str] = None
    enable_backtrace: bool = False
    enable_diagnose: bool = False


def configure_logging(config: LoguruConfig) -> None:
    """Replaces every loguru sink with stderr (and the log file, when configured)."""
    logger.remove()
    logger.add(
        sys.stderr,
        format=config.log_format,
        level=config.log_level.value,
        backtrace=config.enable_backtrace,
        diagnose=config.enable_diagnose,
    )
    if not config.log_file_path:
        return
    logger.add(
        config.log_file_path,
        format=config.log_format,
        level=config.log_level.value,
        rotation=config.log_rotation,
        retention=config.log_retention,
        backtrace=config.enable_backtrace,
        diagnose=config.enable_diagnose,
    )
