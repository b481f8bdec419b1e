"""
Базовые тесты для проверки работы модулей
"""

import sys
import os
import pytest

# Добавляем путь к модулям проекта
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from utils.config import Config, default_worker_count
from utils.errors import ArenaError, CheckpointError, ConfigError, ContractError, IncompatibilityError, NumericError, ShapeError
from harness import default_run_config


def test_config_initialization(monkeypatch):
    """Тест инициализации конфигурации"""
    for key in ("HARL_OUTPUT_DIR", "LOG_LEVEL", "LOG_FILE"):
        monkeypatch.delenv(key, raising=False)
    config = Config()
    assert config is not None
    assert config.get('HARL_OUTPUT_DIR') == 'runs'
    assert config.get('LOG_LEVEL') == 'INFO'
    assert config.get('LOG_FILE') == 'logs/harl_arena.log'
    assert config.worker_count() >= 1


def test_config_reads_environment(monkeypatch):
    """Переменные окружения перекрывают значения по умолчанию"""
    monkeypatch.setenv('HARL_ARENA_THREADS', '3')
    monkeypatch.setenv('HARL_OUTPUT_DIR', '/tmp/harl')
    config = Config()
    assert config.worker_count() == 3
    assert config.get('HARL_OUTPUT_DIR') == '/tmp/harl'

    config.set('HARL_ARENA_THREADS', 0)
    assert config.worker_count() == 1
    assert config.get('MISSING', 'x') == 'x'


def test_default_worker_count_is_read_once(monkeypatch):
    """HARL_ARENA_THREADS читается при первом обращении и дальше не перечитывается"""
    from harness import map_chunks

    default_worker_count.cache_clear()
    try:
        monkeypatch.setenv('HARL_ARENA_THREADS', '3')
        assert default_worker_count() == 3
        monkeypatch.setenv('HARL_ARENA_THREADS', '5')
        assert default_worker_count() == 3
        assert len(map_chunks(lambda chunk: chunk, 10)) == 3
    finally:
        default_worker_count.cache_clear()


def test_error_hierarchy():
    """Все ошибки предметной области ловятся как ArenaError"""
    for error in (ShapeError, NumericError, ConfigError, ContractError, IncompatibilityError, CheckpointError):
        assert issubclass(error, ArenaError)


def test_default_run_config_output_dir(monkeypatch):
    monkeypatch.delenv('HARL_OUTPUT_DIR', raising=False)
    config = default_run_config()
    assert str(config.output_dir()) == 'runs'
    assert str(config.with_overrides(out='elsewhere').output_dir()) == 'elsewhere'


if __name__ == "__main__":
    pytest.main([__file__])
