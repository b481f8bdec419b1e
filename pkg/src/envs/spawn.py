"""
Случайная расстановка тел в начале эпизода
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from utils.errors import ConfigError
from .specs import TaskKind

MAX_ATTEMPTS = 1000


@dataclass
class Spawn:
    """Начальная расстановка одного экземпляра"""

    positions: np.ndarray   # (B, 2)
    headings: np.ndarray    # (B,)
    altitudes: np.ndarray   # (B,)
    goals: np.ndarray       # (A, 2)


def _uniform_in_disk(rng: np.random.Generator, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2.0 * np.pi)
    return np.array([r * np.cos(theta), r * np.sin(theta)])


def _place(rng, sampler, radius: float, placed: List[np.ndarray], radii: List[float], what: str) -> np.ndarray:
    """Выборка с отказами: зазор между центрами не меньше 2 * (r_i + r_j)"""
    for _ in range(MAX_ATTEMPTS):
        p = sampler()
        if all(np.hypot(*(p - q)) >= 2.0 * (radius + rq) for q, rq in zip(placed, radii)):
            return p
    raise ConfigError(f"Не удалось разместить {what} за {MAX_ATTEMPTS} попыток; арена слишком тесная")


def spawn_instance(setup, rng: np.random.Generator) -> Spawn:
    """
    Расстановка для задачи setup.task с собственным генератором экземпляра

    Сумо: команда 0 в левом полукруге, команда 1 в правом.
    Лазертаг: танки в левой трети арены, дроны в правой.
    """
    env = setup.env
    agents = setup.agents
    n_agents, n_bodies = len(agents), setup.n_bodies
    positions = np.zeros((n_bodies, 2))
    altitudes = np.zeros(n_bodies)
    goals = np.zeros((n_agents, 2))
    placed, radii = [], []
    spawn_radius = env.spawn_radius_fraction * env.ring_radius

    if setup.task == TaskKind.BLOCK_PUSH:
        for k in range(setup.n_blocks):
            p = _place(rng, lambda: _uniform_in_disk(rng, env.block_spawn_radius),
                       env.block_radius, placed, radii, f"блок {k}")
            positions[n_agents + k] = p
            placed.append(p)
            radii.append(env.block_radius)

    for i, agent in enumerate(agents):
        team = int(setup.agent_team[i])
        if setup.task == TaskKind.SUMO:
            sign = -1.0 if team == 0 else 1.0

            def sampler():
                p = _uniform_in_disk(rng, spawn_radius)
                p[0] = sign * abs(p[0])
                return p
        elif setup.task == TaskKind.LASER_TAG:
            half_w, half_h = env.arena_width / 2.0, env.arena_height / 2.0
            x_lo, x_hi = (-half_w + 1.0, -half_w / 3.0) if team == 0 else (half_w / 3.0, half_w - 1.0)

            def sampler():
                return np.array([rng.uniform(x_lo, x_hi), rng.uniform(-half_h + 1.0, half_h - 1.0)])
        else:
            def sampler():
                return _uniform_in_disk(rng, spawn_radius)

        p = _place(rng, sampler, agent.radius, placed, radii, f"агента {i}")
        positions[i] = p
        placed.append(p)
        radii.append(agent.radius)
        if agent.flying:
            altitudes[i] = env.drone_start_altitude

    if setup.task == TaskKind.WALK_TO_POINT:
        for i, agent in enumerate(agents):
            for _ in range(MAX_ATTEMPTS):
                dist = rng.uniform(env.goal_distance_min, env.goal_distance_max)
                theta = rng.uniform(0.0, 2.0 * np.pi)
                goal = positions[i] + dist * np.array([np.cos(theta), np.sin(theta)])
                if np.hypot(*goal) < env.ring_radius - agent.radius:
                    goals[i] = goal
                    break
            else:
                raise ConfigError(f"Не удалось выбрать цель для агента {i}")

    headings = rng.uniform(-np.pi, np.pi, size=n_bodies)
    headings[n_agents:] = 0.0
    return Spawn(positions, headings, altitudes, goals)
