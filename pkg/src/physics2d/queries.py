"""
Геометрические запросы: выход за ринг, расстояние до луча, стены арены
"""

from enum import Enum

import numpy as np

from utils.errors import ContractError
from .bodies import ArenaShape, ArenaSpec, BodyBatch, DiscBody, Ray


class Excursion(str, Enum):
    INSIDE = "inside"
    OUT = "out"


def _require_ring(arena: ArenaSpec) -> None:
    if arena.shape != ArenaShape.RING:
        raise ContractError(f"Проверка выхода за ринг вызвана для арены {arena.shape.value}")


def ring_excursion(body: DiscBody, arena: ArenaSpec) -> Excursion:
    """Тело вне ринга, если его центр строго дальше r_max от центра"""
    _require_ring(arena)
    out = ring_excursion_mask(body.position, arena)
    return Excursion.OUT if bool(out) else Excursion.INSIDE


def ring_excursion_mask(positions: np.ndarray, arena: ArenaSpec) -> np.ndarray:
    """Векторный вариант ring_excursion для позиций формы (..., 2)"""
    _require_ring(arena)
    positions = np.asarray(positions, dtype=np.float64)
    return np.hypot(positions[..., 0], positions[..., 1]) - arena.r_max > 0.0


def point_ray_distance(ray: Ray, point) -> float:
    """Расстояние от точки до полупрямой луча"""
    if not ray.active:
        raise ContractError("Запрос расстояния к неактивному лучу")
    return float(point_ray_distances(ray.origin, ray.direction, np.asarray(point, dtype=np.float64)))


def point_ray_distances(origins: np.ndarray, directions: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Векторный вариант: все аргументы формы (..., 2) с совместимым broadcast"""
    rel = points - origins
    t = np.maximum(np.sum(rel * directions, axis=-1), 0.0)
    closest = origins + t[..., None] * directions
    diff = points - closest
    return np.hypot(diff[..., 0], diff[..., 1])


def contain_in_rect(bodies: BodyBatch, arena: ArenaSpec) -> BodyBatch:
    """Удерживает диски внутри прямоугольной арены, гася нормальную скорость у стены"""
    if arena.shape != ArenaShape.RECT:
        raise ContractError(f"Стены заданы только для прямоугольной арены, получено {arena.shape.value}")
    out = bodies.copy()
    half = np.array([arena.width / 2.0, arena.height / 2.0])
    limit = half[None, None, :] - bodies.radius[None, :, None]
    low_hit = out.position < -limit
    high_hit = out.position > limit
    out.position = np.clip(out.position, -limit, limit)
    out.velocity = np.where(low_hit, np.maximum(out.velocity, 0.0), out.velocity)
    out.velocity = np.where(high_hit, np.minimum(out.velocity, 0.0), out.velocity)
    return out
