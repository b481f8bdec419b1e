"""
Приводы, интегрирование и разрешение столкновений дисков
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from utils.errors import ContractError, NumericError, ShapeError
from .bodies import ActuationLimits, BodyBatch, BodyKind, DiscBody, action_dim, wrap_angle


@dataclass(frozen=True)
class PhysicsConfig:
    """Параметры шага физики"""

    dt: float = 1.0 / 60.0
    substeps: int = 1
    drag: float = 0.5            # 1/с, линейное сопротивление
    restitution: float = 0.0
    gravity: float = 0.0         # м/с^2, только для высоты летающих тел


@dataclass
class Actuation:
    """Сила (..., 2), момент (...) и подъёмная сила (...)"""

    force: np.ndarray
    torque: np.ndarray
    lift: np.ndarray


def _actuate(kind: BodyKind, flying: bool, heading: np.ndarray, action: np.ndarray,
             limits: ActuationLimits) -> Actuation:
    shape = np.shape(heading)
    force = np.zeros(shape + (2,))
    torque = np.zeros(shape)
    lift = np.zeros(shape)
    if kind == BodyKind.STATIC:
        return Actuation(force, torque, lift)

    a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
    if kind == BodyKind.HOLONOMIC:
        force = a[..., :2] * limits.max_force
        if flying:
            lift = a[..., 2] * limits.max_lift
    else:
        left = a[..., 0] * limits.max_force
        right = a[..., 1] * limits.max_force
        forward = left + right
        force = np.stack([forward * np.cos(heading), forward * np.sin(heading)], axis=-1)
        torque = np.clip((right - left) * 0.5 * limits.axle_width, -limits.max_torque, limits.max_torque)
    return Actuation(force, torque, lift)


def apply_action(body: DiscBody, action, limits: ActuationLimits) -> Actuation:
    """
    Перевод действия тела в силу и момент

    Голономное тело: плоская сила (2 канала, третий - газ у летающих).
    Дифференциальный привод: тяга левого и правого колеса.
    Статическое тело: нулевой вектор действия.
    """
    action = np.asarray(action, dtype=np.float64).reshape(-1)
    expected = body.action_dim
    if action.shape != (expected,):
        raise ShapeError(f"Тело {body.kind.name}: ожидалось действие длины {expected}, получено {action.shape[0]}")
    return _actuate(body.kind, body.flying, np.float64(body.heading), action, limits)


def apply_actions(bodies: BodyBatch, actions: Sequence[Optional[np.ndarray]],
                  limits: Sequence[ActuationLimits]) -> Actuation:
    """Пакетный вариант apply_action: actions[b] формы (N, k) или None"""
    n, b_count = bodies.num_instances, bodies.num_bodies
    if len(actions) != b_count or len(limits) != b_count:
        raise ShapeError(f"Ожидалось {b_count} действий и ограничений")

    force = np.zeros((n, b_count, 2))
    torque = np.zeros((n, b_count))
    lift = np.zeros((n, b_count))
    for b in range(b_count):
        kind = BodyKind(int(bodies.kind[b]))
        k = action_dim(kind, bool(bodies.flying[b]))
        act = actions[b]
        if act is None:
            act = np.zeros((n, k))
        act = np.asarray(act, dtype=np.float64)
        if act.shape != (n, k):
            raise ShapeError(f"Тело {b}: ожидалось действие формы {(n, k)}, получено {act.shape}")
        if k == 0:
            continue
        out = _actuate(kind, bool(bodies.flying[b]), bodies.heading[:, b], act, limits[b])
        force[:, b] = out.force
        torque[:, b] = out.torque
        lift[:, b] = out.lift
    return Actuation(force, torque, lift)


def _as_batch(bodies):
    if isinstance(bodies, BodyBatch):
        return bodies, False
    return BodyBatch.from_bodies(bodies), True


def _as_actuation(forces, n_bodies: int) -> Actuation:
    if isinstance(forces, Actuation):
        force = np.asarray(forces.force, dtype=np.float64)
        if force.ndim == 2:
            return Actuation(force[None], np.asarray(forces.torque, dtype=np.float64)[None],
                             np.asarray(forces.lift, dtype=np.float64)[None])
        return forces
    if len(forces) != n_bodies:
        raise ShapeError(f"Ожидалось {n_bodies} воздействий, получено {len(forces)}")
    return Actuation(
        force=np.array([[np.asarray(f.force, dtype=np.float64) for f in forces]]),
        torque=np.array([[float(f.torque) for f in forces]]),
        lift=np.array([[float(f.lift) for f in forces]]),
    )


def integrate(
    bodies: Union[BodyBatch, Sequence[DiscBody]],
    forces,
    dt: float,
    drag: float = 0.5,
    gravity: float = 0.0,
    frozen: Optional[np.ndarray] = None,
):
    """
    Полунеявный Эйлер: сначала скорость, затем позиция

    Статические и замороженные тела не двигаются. Возвращает новый объект
    того же вида, что и вход (BodyBatch или список DiscBody).
    """
    if dt <= 0:
        raise ContractError(f"Шаг интегрирования должен быть положительным: {dt}")
    batch, as_list = _as_batch(bodies)
    act = _as_actuation(forces, batch.num_bodies)
    n, b_count = batch.num_instances, batch.num_bodies
    if act.force.shape != (n, b_count, 2):
        raise ShapeError(f"Силы формы {act.force.shape}, ожидалось {(n, b_count, 2)}")
    for name, value in (("сила", act.force), ("момент", act.torque), ("подъём", act.lift)):
        if not np.all(np.isfinite(value)):
            raise NumericError(f"Нечисловое воздействие: {name}")

    moving = np.broadcast_to(batch.kind != BodyKind.STATIC, (n, b_count))
    if frozen is not None:
        moving = moving & ~np.asarray(frozen, dtype=bool)
    mass = batch.mass[None, :]
    inertia = 0.5 * batch.mass * batch.radius ** 2

    vel = batch.velocity + (act.force / mass[..., None] - drag * batch.velocity) * dt
    pos = batch.position + vel * dt
    ang_vel = batch.angular_velocity + (act.torque / inertia[None, :] - drag * batch.angular_velocity) * dt
    heading = wrap_angle(batch.heading + ang_vel * dt)

    flying = moving & batch.flying[None, :]
    vz = batch.vertical_velocity + (act.lift / mass - gravity - drag * batch.vertical_velocity) * dt
    alt = batch.altitude + vz * dt

    out = batch.copy()
    out.velocity = np.where(moving[..., None], vel, batch.velocity)
    out.position = np.where(moving[..., None], pos, batch.position)
    out.angular_velocity = np.where(moving, ang_vel, batch.angular_velocity)
    out.heading = np.where(moving, heading, batch.heading)
    out.vertical_velocity = np.where(flying, vz, batch.vertical_velocity)
    out.altitude = np.where(flying, alt, batch.altitude)
    return out.to_bodies(0) if as_list else out


def resolve_collisions(
    bodies: Union[BodyBatch, Sequence[DiscBody]],
    restitution: float = 0.0,
    frozen: Optional[np.ndarray] = None,
):
    """
    Один проход по парам в порядке индексов: проекция позиций по обратной
    массе и нормальный импульс с заданной упругостью. Расходящиеся пары
    импульса не получают; замороженные тела в контактах не участвуют.
    """
    if not 0.0 <= restitution <= 1.0:
        raise ContractError(f"Коэффициент восстановления вне [0, 1]: {restitution}")
    batch, as_list = _as_batch(bodies)
    out = batch.copy()
    pos, vel = out.position, out.velocity
    inv = batch.inv_mass
    radius = batch.radius
    n, b_count = batch.num_instances, batch.num_bodies
    fallback = np.array([1.0, 0.0])

    for i in range(b_count):
        for j in range(i + 1, b_count):
            w_sum = inv[i] + inv[j]
            if w_sum == 0.0:
                continue
            delta = pos[:, j] - pos[:, i]
            dist = np.sqrt(np.sum(delta * delta, axis=-1))
            overlap = radius[i] + radius[j] - dist
            hit = overlap > 0.0
            if frozen is not None:
                hit &= ~frozen[:, i] & ~frozen[:, j]
            if not np.any(hit):
                continue

            safe = dist > 1e-12
            normal = np.where(safe[:, None], delta / np.where(safe, dist, 1.0)[:, None], fallback)
            shift = np.where(hit, overlap, 0.0)[:, None] * normal
            pos[:, i] -= shift * (inv[i] / w_sum)
            pos[:, j] += shift * (inv[j] / w_sum)

            vn = np.sum((vel[:, j] - vel[:, i]) * normal, axis=-1)
            approaching = hit & (vn < 0.0)
            impulse = np.where(approaching, -(1.0 + restitution) * vn / w_sum, 0.0)[:, None] * normal
            vel[:, i] -= impulse * inv[i]
            vel[:, j] += impulse * inv[j]

    return out.to_bodies(0) if as_list else out
