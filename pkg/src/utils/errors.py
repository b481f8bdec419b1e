"""
Иерархия исключений фреймворка
"""


class ArenaError(Exception):
    """Базовое исключение фреймворка"""


class ShapeError(ArenaError):
    """Несовпадение размерностей или арности действий"""


class NumericError(ArenaError):
    """Нечисловые значения (NaN/inf) во входах, градиентах или потерях"""


class ConfigError(ArenaError):
    """Некорректная или неизвестная конфигурация"""


class ContractError(ArenaError):
    """Нарушено предусловие операции"""


class IncompatibilityError(ArenaError):
    """Несовместимые раскладки наблюдений при переносе чекпоинта"""


class CheckpointError(ArenaError):
    """Повреждённый, усечённый или несовместимый по версии чекпоинт"""
