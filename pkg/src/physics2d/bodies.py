"""
Диски, арены и лучи двумерной физики
"""

from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import List, Sequence

import numpy as np

from utils.errors import ConfigError, ContractError, ShapeError


class BodyKind(IntEnum):
    """Тип тела определяет пространство действий"""

    HOLONOMIC = 0
    DIFFERENTIAL_DRIVE = 1
    STATIC = 2


def wrap_angle(angle):
    """Приведение угла к (-pi, pi]"""
    return np.pi - np.mod(np.pi - np.asarray(angle, dtype=np.float64), 2.0 * np.pi)


@dataclass(frozen=True)
class ActuationLimits:
    """Ограничения приводов тела"""

    max_force: float = 10.0      # Н на канал (или на колесо)
    max_torque: float = 4.0      # Н*м
    axle_width: float = 0.4      # м, для дифференциального привода
    max_lift: float = 10.0       # Н, канал газа у летающих тел


@dataclass
class DiscBody:
    """Одиночный диск: удобное представление для тестов и записи"""

    position: np.ndarray
    velocity: np.ndarray
    heading: float = 0.0
    angular_velocity: float = 0.0
    radius: float = 0.3
    mass: float = 1.0
    kind: BodyKind = BodyKind.HOLONOMIC
    altitude: float = 0.0
    vertical_velocity: float = 0.0
    flying: bool = False

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(2)
        self.velocity = np.asarray(self.velocity, dtype=np.float64).reshape(2)
        self.kind = BodyKind(self.kind)
        if self.radius <= 0 or self.mass <= 0:
            raise ConfigError(f"Радиус и масса должны быть положительными: r={self.radius}, m={self.mass}")
        if self.kind == BodyKind.STATIC:
            self.velocity = np.zeros(2)
            self.angular_velocity = 0.0
        self.heading = float(wrap_angle(self.heading))

    @property
    def action_dim(self) -> int:
        return action_dim(self.kind, self.flying)


def action_dim(kind: BodyKind, flying: bool = False) -> int:
    """Арность действия для типа тела"""
    if kind == BodyKind.STATIC:
        return 0
    if kind == BodyKind.HOLONOMIC:
        return 3 if flying else 2
    return 2


@dataclass
class BodyBatch:
    """
    Состояние тел в N независимых экземплярах среды (структура массивов).

    Динамические поля имеют форму (N, B, ...), свойства тел - (B,).
    """

    position: np.ndarray
    velocity: np.ndarray
    heading: np.ndarray
    angular_velocity: np.ndarray
    altitude: np.ndarray
    vertical_velocity: np.ndarray
    radius: np.ndarray
    mass: np.ndarray
    kind: np.ndarray
    flying: np.ndarray = field(default=None)

    def __post_init__(self):
        n, b = self.position.shape[:2]
        if self.position.shape != (n, b, 2) or self.velocity.shape != (n, b, 2):
            raise ShapeError(f"Позиции/скорости должны иметь форму (N, B, 2): {self.position.shape}")
        for name in ("heading", "angular_velocity", "altitude", "vertical_velocity"):
            if getattr(self, name).shape != (n, b):
                raise ShapeError(f"Поле {name} должно иметь форму {(n, b)}")
        if self.flying is None:
            self.flying = np.zeros(b, dtype=bool)
        for name in ("radius", "mass", "kind", "flying"):
            if np.shape(getattr(self, name)) != (b,):
                raise ShapeError(f"Свойство {name} должно иметь форму {(b,)}")
        if np.any(self.radius <= 0) or np.any(self.mass <= 0):
            raise ConfigError("Радиус и масса тел должны быть положительными")

    @property
    def num_instances(self) -> int:
        return int(self.position.shape[0])

    @property
    def num_bodies(self) -> int:
        return int(self.position.shape[1])

    @property
    def inv_mass(self) -> np.ndarray:
        """Обратная масса; статические тела бесконечно тяжёлые"""
        return np.where(self.kind == BodyKind.STATIC, 0.0, 1.0 / self.mass)

    def copy(self) -> "BodyBatch":
        return replace(
            self,
            position=self.position.copy(),
            velocity=self.velocity.copy(),
            heading=self.heading.copy(),
            angular_velocity=self.angular_velocity.copy(),
            altitude=self.altitude.copy(),
            vertical_velocity=self.vertical_velocity.copy(),
        )

    def select(self, instances) -> "BodyBatch":
        """Подмножество экземпляров по индексам"""
        return replace(
            self,
            position=self.position[instances].copy(),
            velocity=self.velocity[instances].copy(),
            heading=self.heading[instances].copy(),
            angular_velocity=self.angular_velocity[instances].copy(),
            altitude=self.altitude[instances].copy(),
            vertical_velocity=self.vertical_velocity[instances].copy(),
        )

    @classmethod
    def from_bodies(cls, bodies: Sequence[DiscBody]) -> "BodyBatch":
        """Пакет из одного экземпляра по списку дисков"""
        return cls(
            position=np.array([[b.position for b in bodies]], dtype=np.float64),
            velocity=np.array([[b.velocity for b in bodies]], dtype=np.float64),
            heading=np.array([[b.heading for b in bodies]], dtype=np.float64),
            angular_velocity=np.array([[b.angular_velocity for b in bodies]], dtype=np.float64),
            altitude=np.array([[b.altitude for b in bodies]], dtype=np.float64),
            vertical_velocity=np.array([[b.vertical_velocity for b in bodies]], dtype=np.float64),
            radius=np.array([b.radius for b in bodies], dtype=np.float64),
            mass=np.array([b.mass for b in bodies], dtype=np.float64),
            kind=np.array([int(b.kind) for b in bodies], dtype=np.int64),
            flying=np.array([b.flying for b in bodies], dtype=bool),
        )

    @classmethod
    def concat(cls, batches: Sequence["BodyBatch"]) -> "BodyBatch":
        """Склейка пакетов с одинаковым набором тел по оси экземпляров"""
        first = batches[0]
        return replace(
            first,
            position=np.concatenate([b.position for b in batches]),
            velocity=np.concatenate([b.velocity for b in batches]),
            heading=np.concatenate([b.heading for b in batches]),
            angular_velocity=np.concatenate([b.angular_velocity for b in batches]),
            altitude=np.concatenate([b.altitude for b in batches]),
            vertical_velocity=np.concatenate([b.vertical_velocity for b in batches]),
        )

    def to_bodies(self, instance: int = 0) -> List[DiscBody]:
        return [
            DiscBody(
                position=self.position[instance, k].copy(),
                velocity=self.velocity[instance, k].copy(),
                heading=float(self.heading[instance, k]),
                angular_velocity=float(self.angular_velocity[instance, k]),
                radius=float(self.radius[k]),
                mass=float(self.mass[k]),
                kind=BodyKind(int(self.kind[k])),
                altitude=float(self.altitude[instance, k]),
                vertical_velocity=float(self.vertical_velocity[instance, k]),
                flying=bool(self.flying[k]),
            )
            for k in range(self.num_bodies)
        ]


class ArenaShape(str, Enum):
    RING = "ring"
    RECT = "rect"


@dataclass(frozen=True)
class ArenaSpec:
    """Круглый ринг радиуса r_max или прямоугольник width x height с центром в нуле"""

    shape: ArenaShape = ArenaShape.RING
    r_max: float = 4.0
    width: float = 20.0
    height: float = 10.0
    min_height: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shape", ArenaShape(self.shape))
        if self.shape == ArenaShape.RING and self.r_max <= 0:
            raise ConfigError(f"Радиус ринга должен быть положительным: {self.r_max}")
        if self.shape == ArenaShape.RECT and (self.width <= 0 or self.height <= 0):
            raise ConfigError(f"Размеры арены должны быть положительными: {self.width}x{self.height}")
        if self.min_height < 0:
            raise ConfigError(f"Минимальная высота не может быть отрицательной: {self.min_height}")

    @classmethod
    def ring(cls, r_max: float) -> "ArenaSpec":
        return cls(shape=ArenaShape.RING, r_max=r_max)

    @classmethod
    def rect(cls, width: float, height: float, min_height: float = 0.0) -> "ArenaSpec":
        return cls(shape=ArenaShape.RECT, width=width, height=height, min_height=min_height)


@dataclass(frozen=True)
class Ray:
    """Полупрямая origin + t * direction, t >= 0"""

    origin: np.ndarray
    direction: np.ndarray
    active: bool = True

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64).reshape(2)
        direction = np.asarray(self.direction, dtype=np.float64).reshape(2)
        if abs(np.hypot(direction[0], direction[1]) - 1.0) > 1e-9:
            raise ContractError(f"Направление луча должно быть единичным: {direction}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)
