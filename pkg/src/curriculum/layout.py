"""
Раскладка наблюдения: именованные слоты, активация по стадиям и нулевой буфер
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from utils.errors import ConfigError, ContractError, ShapeError

BUFFER_SLOT = "zero_buffer"


@dataclass(frozen=True)
class ObservationSlot:
    """Слот наблюдения; active_from_stage=None - слот никогда не активен (буфер)"""

    name: str
    width: int
    active_from_stage: Optional[int]
    offset: int

    def is_active(self, stage: int) -> bool:
        return self.active_from_stage is not None and stage >= self.active_from_stage


@dataclass(frozen=True)
class ObservationLayout:
    """Упорядоченные слоты и общая ширина, одинаковая для всех стадий"""

    slots: Tuple[ObservationSlot, ...]
    total_width: int

    def __post_init__(self):
        names = [s.name for s in self.slots]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ConfigError(f"Повторяющиеся слоты наблюдения: {duplicates}")
        offset = 0
        for s in self.slots:
            if s.width < 0 or s.offset != offset:
                raise ConfigError(f"Слот {s.name}: некорректное смещение или ширина")
            offset += s.width
        if offset != self.total_width:
            raise ConfigError(f"Сумма ширин слотов {offset} != total_width {self.total_width}")

    def slot(self, name: str) -> ObservationSlot:
        for s in self.slots:
            if s.name == name:
                return s
        raise ContractError(f"Слот '{name}' отсутствует в раскладке")

    def has_slot(self, name: str) -> bool:
        return any(s.name == name for s in self.slots)

    def active_slots(self, stage: int) -> List[ObservationSlot]:
        return [s for s in self.slots if s.is_active(stage)]

    def active_mask(self, stage: int) -> np.ndarray:
        mask = np.zeros(self.total_width, dtype=bool)
        for s in self.active_slots(stage):
            mask[s.offset:s.offset + s.width] = True
        return mask

    def to_dict(self) -> Dict:
        return {
            "total_width": self.total_width,
            "slots": [[s.name, s.width, s.active_from_stage] for s in self.slots],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ObservationLayout":
        layout = build_layout([tuple(s) for s in data["slots"]])
        if layout.total_width != data["total_width"]:
            raise ConfigError("Ширина раскладки не совпадает с сохранённой")
        return layout


def build_layout(specs: Sequence[Tuple[str, int, Optional[int]]], buffer_width: int = 0) -> ObservationLayout:
    """
    Собирает раскладку из (имя, ширина, стадия активации)

    Буфер нулей добавляется в конец, чтобы активация новых признаков
    не сдвигала существующие индексы.
    """
    if buffer_width < 0:
        raise ConfigError(f"Ширина буфера не может быть отрицательной: {buffer_width}")
    slots = []
    offset = 0
    for name, width, stage in specs:
        slots.append(ObservationSlot(str(name), int(width), None if stage is None else int(stage), offset))
        offset += int(width)
    if buffer_width > 0:
        slots.append(ObservationSlot(BUFFER_SLOT, int(buffer_width), None, offset))
        offset += int(buffer_width)
    return ObservationLayout(tuple(slots), offset)


def pad_observation(
    features: Mapping[str, np.ndarray],
    layout: ObservationLayout,
    stage: int,
    batch_shape: Tuple[int, ...] = (),
) -> np.ndarray:
    """
    Заполняет активные слоты в порядке раскладки; остальное ровно 0.0

    Args:
        features: Значения признаков формы (*batch, width)
        layout: Раскладка наблюдения
        stage: Индекс текущей стадии
        batch_shape: Форма батча, если признаков нет

    Returns:
        Вектор (*batch, total_width)
    """
    active = {s.name: s for s in layout.active_slots(stage)}
    for name in features:
        if name not in active:
            if layout.has_slot(name):
                raise ContractError(f"Запись в неактивный на стадии {stage} слот '{name}'")
            raise ContractError(f"Неизвестный слот '{name}'")
    for name in active:
        if name not in features:
            raise ContractError(f"Не передан активный признак '{name}' для стадии {stage}")

    values = {n: np.asarray(v, dtype=np.float64) for n, v in features.items()}
    if values:
        batch_shape = next(iter(values.values())).shape[:-1]
    out = np.zeros(tuple(batch_shape) + (layout.total_width,))
    for name, slot in active.items():
        value = values[name]
        if value.shape != tuple(batch_shape) + (slot.width,):
            raise ShapeError(f"Признак '{name}' формы {value.shape}, ожидалось {tuple(batch_shape) + (slot.width,)}")
        out[..., slot.offset:slot.offset + slot.width] = value
    return out
