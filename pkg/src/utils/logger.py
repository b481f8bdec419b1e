"""
Логирование: консоль, общий файл и журнал каждого запуска
"""

import os
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Union

from loguru import logger

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - "
    "<level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"
RUN_LOG_NAME = "train.log"


def setup_logger(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    rotation: str = "10 MB",
    retention: str = "1 week"
) -> None:
    """
    Настройка логгера для командной строки

    Args:
        log_level: Уровень логирования (DEBUG, INFO, WARNING, ERROR)
        log_file: Общий файл логов; None - только консоль
        rotation: Размер файла для ротации
        retention: Время хранения старых логов
    """
    logger.remove()

    # stdout занят отчётами команд (таблица турнира, сводки)
    logger.add(sink=sys.stderr, level=log_level, format=CONSOLE_FORMAT, colorize=True,
               backtrace=False, diagnose=False)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        logger.add(sink=log_file, level=log_level, format=FILE_FORMAT,
                   rotation=rotation, retention=retention, compression="zip")
        logger.info(f"Логирование настроено. Файл: {log_file}")
    else:
        logger.info("Логирование настроено (только консоль)")


@contextmanager
def run_log(run_dir: Union[str, Path], log_level: str = "DEBUG") -> Iterator[Path]:
    """
    Журнал запуска обучения в run_dir/train.log на время блока

    Файл дописывается, так что продолжение запуска попадает в тот же журнал.
    """
    path = Path(run_dir) / RUN_LOG_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    sink_id = logger.add(sink=str(path), level=log_level, format=FILE_FORMAT, mode="a", enqueue=False)
    try:
        yield path
    finally:
        logger.remove(sink_id)


def get_logger(name: str):
    """Логгер с привязанным именем компонента"""
    return logger.bind(name=name)
