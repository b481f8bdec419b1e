"""
Тесты двумерной физики дисков
"""

import sys
import os
import numpy as np
import pytest

# Добавляем путь к модулям проекта
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from physics2d import (
    Actuation,
    ActuationLimits,
    ArenaSpec,
    BodyBatch,
    BodyKind,
    DiscBody,
    Excursion,
    Ray,
    apply_action,
    contain_in_rect,
    integrate,
    point_ray_distance,
    resolve_collisions,
    ring_excursion,
    wrap_angle,
)
from utils.errors import ContractError, NumericError, ShapeError


def _disc(x, y, vx=0.0, vy=0.0, **kwargs):
    return DiscBody(position=[x, y], velocity=[vx, vy], **kwargs)


def _random_pairs(rng, n):
    """N экземпляров по два перекрывающихся диска с произвольными массами"""
    radius = np.array([0.3, 0.25])
    angle = rng.uniform(-np.pi, np.pi, n)
    dist = rng.uniform(0.05, 0.54, n)
    p0 = rng.uniform(-1, 1, (n, 2))
    p1 = p0 + dist[:, None] * np.stack([np.cos(angle), np.sin(angle)], axis=-1)
    zeros = np.zeros((n, 2))
    return BodyBatch(
        position=np.stack([p0, p1], axis=1),
        velocity=rng.normal(0.0, 2.0, (n, 2, 2)),
        heading=zeros.copy(),
        angular_velocity=zeros.copy(),
        altitude=zeros.copy(),
        vertical_velocity=zeros.copy(),
        radius=radius,
        mass=rng.uniform(0.5, 5.0, 2),
        kind=np.array([BodyKind.HOLONOMIC, BodyKind.HOLONOMIC]),
    )


def test_holonomic_zero_action_zero_force():
    out = apply_action(_disc(0, 0), [0.0, 0.0], ActuationLimits())
    assert np.array_equal(out.force, np.zeros(2))
    assert out.torque == 0.0


def test_differential_drive_equal_thrust_is_forward():
    """Равная тяга колёс: сила вдоль курса, момент нулевой"""
    limits = ActuationLimits(max_force=10.0, axle_width=0.4)
    body = _disc(0, 0, heading=np.pi / 3, kind=BodyKind.DIFFERENTIAL_DRIVE)
    out = apply_action(body, [0.5, 0.5], limits)
    np.testing.assert_allclose(out.force, 10.0 * np.array([np.cos(np.pi / 3), np.sin(np.pi / 3)]), atol=1e-12)
    assert out.torque == 0.0


def test_differential_drive_opposite_thrust_is_pure_torque():
    limits = ActuationLimits(max_force=10.0, max_torque=4.0, axle_width=0.4)
    body = _disc(0, 0, heading=0.7, kind=BodyKind.DIFFERENTIAL_DRIVE)
    out = apply_action(body, [0.5, -0.5], limits)
    np.testing.assert_allclose(out.force, np.zeros(2), atol=1e-12)
    # (right - left) * axle / 2 = (-5 - 5) * 0.2
    assert out.torque == pytest.approx(-2.0)


def test_flying_body_has_throttle_channel():
    limits = ActuationLimits(max_lift=8.0)
    out = apply_action(_disc(0, 0, flying=True), [0.0, 0.0, 0.5], limits)
    assert out.lift == pytest.approx(4.0)


def test_action_arity_mismatch():
    with pytest.raises(ShapeError):
        apply_action(_disc(0, 0), [1.0, 0.0, 0.0], ActuationLimits())


def test_action_channels_are_clipped():
    out = apply_action(_disc(0, 0), [5.0, -3.0], ActuationLimits(max_force=10.0))
    np.testing.assert_allclose(out.force, [10.0, -10.0])


def _zero_act(n_bodies):
    return Actuation(np.zeros((n_bodies, 2)), np.zeros(n_bodies), np.zeros(n_bodies))


def test_integrate_zero_force_zero_drag_moves_by_velocity():
    bodies = [_disc(1.0, -2.0, 0.5, 0.25)]
    dt = 0.1
    out = integrate(bodies, _zero_act(1), dt, drag=0.0)
    np.testing.assert_array_equal(out[0].position, np.array([1.0, -2.0]) + np.array([0.5, 0.25]) * dt)
    np.testing.assert_array_equal(out[0].velocity, [0.5, 0.25])


def test_integrate_constant_force_matches_scalar_recurrence():
    """Постоянная сила из покоя против пошагового скалярного оракула"""
    force, mass, dt, drag, n = 3.0, 2.0, 1.0 / 60.0, 0.5, 120
    bodies = [_disc(0, 0, mass=mass)]
    act = Actuation(np.array([[force, 0.0]]), np.zeros(1), np.zeros(1))
    v = x = 0.0
    for _ in range(n):
        bodies = integrate(bodies, act, dt, drag=drag)
        v = v + (force / mass - drag * v) * dt
        x = x + v * dt
    assert bodies[0].velocity[0] == pytest.approx(v, rel=1e-13)
    assert bodies[0].position[0] == pytest.approx(x, rel=1e-13)

    # Без сопротивления скорость равна F n dt / m
    bodies = [_disc(0, 0, mass=mass)]
    for _ in range(n):
        bodies = integrate(bodies, act, dt, drag=0.0)
    assert bodies[0].velocity[0] == pytest.approx(force * n * dt / mass, rel=1e-12)


def test_integrate_static_body_unchanged():
    body = _disc(1.0, 1.0, kind=BodyKind.STATIC)
    act = Actuation(np.array([[100.0, -50.0]]), np.array([3.0]), np.zeros(1))
    out = integrate([body], act, 0.1)
    np.testing.assert_array_equal(out[0].position, body.position)
    np.testing.assert_array_equal(out[0].velocity, np.zeros(2))


def test_integrate_non_finite_force():
    act = Actuation(np.array([[np.nan, 0.0]]), np.zeros(1), np.zeros(1))
    with pytest.raises(NumericError):
        integrate([_disc(0, 0)], act, 0.1)


def test_integrate_wraps_heading():
    body = _disc(0, 0, heading=np.pi - 0.01, angular_velocity=3.0)
    out = integrate([body], _zero_act(1), 0.1, drag=0.0)
    assert -np.pi < out[0].heading <= np.pi
    assert out[0].heading < 0.0


def test_wrap_angle_range():
    assert wrap_angle(np.pi) == pytest.approx(np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)


def test_head_on_elastic_exchange():
    """Равные массы, лобовой удар, упругость 1: скорости меняются местами"""
    a = _disc(0.0, 0.0, 1.0, 0.0, mass=1.0)
    b = _disc(0.5, 0.0, -1.0, 0.0, mass=1.0)
    out = resolve_collisions([a, b], restitution=1.0)
    np.testing.assert_allclose(out[0].velocity, [-1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(out[1].velocity, [1.0, 0.0], atol=1e-12)


def test_off_center_impulse_matches_textbook_formula():
    m1, m2, e = 2.0, 3.0, 0.4
    p1, p2 = np.array([0.1, -0.2]), np.array([0.45, 0.1])
    v1, v2 = np.array([1.5, 0.3]), np.array([-0.7, -0.9])
    a = _disc(*p1, *v1, mass=m1, radius=0.3)
    b = _disc(*p2, *v2, mass=m2, radius=0.3)
    out = resolve_collisions([a, b], restitution=e)

    n = (p2 - p1) / np.linalg.norm(p2 - p1)
    j = -(1.0 + e) * np.dot(v2 - v1, n) / (1.0 / m1 + 1.0 / m2)
    np.testing.assert_allclose(out[0].velocity, v1 - j * n / m1, atol=1e-12)
    np.testing.assert_allclose(out[1].velocity, v2 + j * n / m2, atol=1e-12)


def test_separating_pair_gets_no_impulse():
    a = _disc(0.0, 0.0, -1.0, 0.0)
    b = _disc(0.5, 0.0, 1.0, 0.0)
    out = resolve_collisions([a, b], restitution=0.0)
    np.testing.assert_array_equal(out[0].velocity, [-1.0, 0.0])
    np.testing.assert_array_equal(out[1].velocity, [1.0, 0.0])
    assert np.linalg.norm(out[1].position - out[0].position) >= 0.6 - 1e-12


def test_static_body_acts_as_infinite_mass():
    wall = _disc(0.5, 0.0, kind=BodyKind.STATIC)
    ball = _disc(0.0, 0.0, 2.0, 0.0)
    out = resolve_collisions([ball, wall], restitution=1.0)
    np.testing.assert_array_equal(out[1].velocity, np.zeros(2))
    np.testing.assert_array_equal(out[1].position, wall.position)
    np.testing.assert_allclose(out[0].velocity, [-2.0, 0.0], atol=1e-12)


def test_restitution_out_of_range():
    with pytest.raises(ContractError):
        resolve_collisions([_disc(0, 0)], restitution=1.5)


def test_integrate_rejects_non_positive_step():
    """Нулевой или отрицательный шаг - ошибка аргумента, а не формы"""
    for dt in (0.0, -1.0 / 60.0):
        with pytest.raises(ContractError, match="Шаг интегрирования"):
            integrate([_disc(0, 0)], _zero_act(1), dt)


@pytest.mark.parametrize("restitution", [0.0, 0.5, 1.0])
def test_random_collisions_conserve_momentum(restitution):
    """1e5 случайных пар: импульс сохраняется, энергия не растёт, перекрытий нет"""
    batch = _random_pairs(np.random.default_rng(12), 100_000)
    out = resolve_collisions(batch, restitution=restitution)

    mass = batch.mass[None, :, None]
    momentum_before = np.sum(mass * batch.velocity, axis=1)
    momentum_after = np.sum(mass * out.velocity, axis=1)
    assert np.max(np.abs(momentum_after - momentum_before)) < 1e-9

    energy_before = 0.5 * np.sum(batch.mass * np.sum(batch.velocity ** 2, axis=-1), axis=1)
    energy_after = 0.5 * np.sum(batch.mass * np.sum(out.velocity ** 2, axis=-1), axis=1)
    assert np.all(energy_after <= energy_before + 1e-9)

    gap = np.linalg.norm(out.position[:, 1] - out.position[:, 0], axis=-1)
    assert np.all(gap >= batch.radius.sum() - 1e-6)


def test_batch_matches_per_instance_application():
    """Пакетное применение совпадает с поэкземплярным"""
    rng = np.random.default_rng(13)
    batch = _random_pairs(rng, 16)
    force = rng.normal(0.0, 5.0, (16, 2, 2))
    act = Actuation(force, np.zeros((16, 2)), np.zeros((16, 2)))

    together = resolve_collisions(integrate(batch, act, 0.05), restitution=0.3)
    for i in range(16):
        single_act = Actuation(force[i:i + 1], np.zeros((1, 2)), np.zeros((1, 2)))
        alone = resolve_collisions(integrate(batch.select([i]), single_act, 0.05), restitution=0.3)
        np.testing.assert_array_equal(alone.position[0], together.position[i])
        np.testing.assert_array_equal(alone.velocity[0], together.velocity[i])


def test_physics_is_deterministic():
    batch = _random_pairs(np.random.default_rng(14), 8)
    act = Actuation(np.ones((8, 2, 2)), np.zeros((8, 2)), np.zeros((8, 2)))
    runs = []
    for _ in range(2):
        state = batch.copy()
        for _ in range(50):
            state = resolve_collisions(integrate(state, act, 1.0 / 60.0))
        runs.append(state.position)
    assert np.array_equal(runs[0], runs[1])


def test_ring_excursion_boundary():
    ring = ArenaSpec.ring(4.0)
    assert ring_excursion(_disc(0, 0), ring) == Excursion.INSIDE
    assert ring_excursion(_disc(4.01, 0), ring) == Excursion.OUT
    assert ring_excursion(_disc(4.0, 0), ring) == Excursion.INSIDE


def test_ring_excursion_rejects_rect_arena():
    with pytest.raises(ContractError):
        ring_excursion(_disc(0, 0), ArenaSpec.rect(10.0, 5.0))


def test_point_ray_distance_cases():
    ray = Ray(origin=[1.0, 1.0], direction=[0.0, 1.0])
    assert point_ray_distance(ray, [1.0, 4.0]) == pytest.approx(0.0)
    assert point_ray_distance(ray, [1.7, 3.0]) == pytest.approx(0.7)


def test_point_behind_origin_matches_dense_sweep():
    direction = np.array([3.0, 4.0]) / 5.0
    ray = Ray(origin=[0.5, -0.5], direction=direction)
    point = np.array([-1.0, -2.5])
    t = np.linspace(0.0, 100.0, 1_000_001)
    sweep = np.min(np.linalg.norm(ray.origin + t[:, None] * direction - point, axis=-1))
    assert point_ray_distance(ray, point) == pytest.approx(np.linalg.norm(point - ray.origin), abs=1e-12)
    assert point_ray_distance(ray, point) == pytest.approx(sweep, abs=1e-9)


def test_inactive_ray_rejected():
    ray = Ray(origin=[0.0, 0.0], direction=[1.0, 0.0], active=False)
    with pytest.raises(ContractError):
        point_ray_distance(ray, [1.0, 0.0])


def test_ray_direction_must_be_unit():
    with pytest.raises(ContractError):
        Ray(origin=[0.0, 0.0], direction=[2.0, 0.0])


def test_contain_in_rect_clips_and_stops_outward_motion():
    arena = ArenaSpec.rect(4.0, 2.0)
    batch = BodyBatch.from_bodies([_disc(2.5, 0.0, 1.0, -0.5)])
    out = contain_in_rect(batch, arena)
    assert out.position[0, 0, 0] == pytest.approx(2.0 - 0.3)
    assert out.velocity[0, 0, 0] == 0.0
    assert out.velocity[0, 0, 1] == -0.5


if __name__ == "__main__":
    pytest.main([__file__])
