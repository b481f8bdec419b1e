"""
Вспомогательные модули
"""

from .config import Config
from .errors import (
    ArenaError,
    CheckpointError,
    ConfigError,
    ContractError,
    IncompatibilityError,
    NumericError,
    ShapeError,
)

__all__ = [
    'Config',
    'ArenaError',
    'CheckpointError',
    'ConfigError',
    'ContractError',
    'IncompatibilityError',
    'NumericError',
    'ShapeError',
]
