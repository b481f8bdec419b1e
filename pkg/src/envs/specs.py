"""
Описания команд, агентов, наград и статуса выбывания
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from physics2d import ActuationLimits, BodyKind, action_dim
from utils.errors import ConfigError

SHAPING_TERMS = ("velocity_toward_goal", "action_magnitude")


class TaskKind(str, Enum):
    WALK_TO_POINT = "walk_to_point"
    BLOCK_PUSH = "block_push"
    SUMO = "sumo"
    LASER_TAG = "laser_tag"


@dataclass(frozen=True)
class AgentSpec:
    """Шаблон тела агента и его сеть"""

    agent_id: int
    kind: BodyKind = BodyKind.HOLONOMIC
    radius: float = 0.3
    mass: float = 2.0
    limits: ActuationLimits = field(default_factory=ActuationLimits)
    flying: bool = False
    role: str = "walker"
    hidden_sizes: Tuple[int, ...] = (64, 64)

    def __post_init__(self):
        object.__setattr__(self, "kind", BodyKind(self.kind))
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.kind == BodyKind.STATIC:
            raise ConfigError(f"Агент {self.agent_id}: статическое тело не может быть агентом")
        if self.flying and self.kind != BodyKind.HOLONOMIC:
            raise ConfigError(f"Агент {self.agent_id}: летать может только голономное тело")
        if self.radius <= 0 or self.mass <= 0:
            raise ConfigError(f"Агент {self.agent_id}: радиус и масса должны быть положительными")

    @property
    def action_dim(self) -> int:
        return action_dim(self.kind, self.flying)


@dataclass(frozen=True)
class TeamSpec:
    team_id: int
    agents: Tuple[AgentSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise ConfigError(f"Команда {self.team_id}: нужен хотя бы один агент")


def validate_teams(teams: Sequence[TeamSpec]) -> None:
    """Номера команд идут подряд с нуля, номера агентов уникальны"""
    if not teams:
        raise ConfigError("Нужна хотя бы одна команда")
    for expected, team in enumerate(teams):
        if team.team_id != expected:
            raise ConfigError(f"Номера команд должны идти подряд с 0: ожидался {expected}, получен {team.team_id}")
    ids = [a.agent_id for t in teams for a in t.agents]
    if len(ids) != len(set(ids)):
        raise ConfigError(f"Номера агентов повторяются: {ids}")


@dataclass(frozen=True)
class RewardConfig:
    """
    Скаляры наград. Поле dt (Δt стадии толкания) по умолчанию берётся
    из длительности управляющего шага.
    """

    shaping: Tuple[Tuple[float, str], ...] = ((0.1, "velocity_toward_goal"), (-0.01, "action_magnitude"))
    delta: float = 10.0
    gamma_dist: float = 1.0
    alpha: float = 1.0
    step_penalty: float = -0.005
    kappa: float = 1.0
    dt: Optional[float] = None
    knockout_reward: float = 1.0
    tank_step_penalty: float = -0.01

    def __post_init__(self):
        object.__setattr__(self, "shaping", tuple((float(w), str(tag)) for w, tag in self.shaping))
        if self.kappa <= 0:
            raise ConfigError(f"kappa должен быть положительным: {self.kappa}")
        if self.step_penalty > 0:
            raise ConfigError(f"Штраф за шаг T должен быть <= 0: {self.step_penalty}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha должен быть положительным: {self.alpha}")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError(f"Δt должен быть положительным: {self.dt}")
        for _, tag in self.shaping:
            if tag not in SHAPING_TERMS:
                raise ConfigError(f"Неизвестный член формирования награды: {tag}")

    def with_dt(self, dt: float) -> "RewardConfig":
        return self if self.dt is not None else replace(self, dt=dt)


@dataclass(frozen=True)
class EnvConfig:
    """Геометрия задач, окно эпизода и параметры лазертага"""

    max_episode_len: int = 600
    ring_radius: float = 4.0
    reach_radius: float = 0.25
    goal_distance_min: float = 0.5
    goal_distance_max: float = 2.5
    block_radius: float = 0.4
    block_mass: float = 2.0
    block_spawn_radius: float = 1.0
    spawn_radius_fraction: float = 0.75
    arena_width: float = 20.0
    arena_height: float = 10.0
    min_height: float = 0.2
    ray_height: float = 1.5
    knockout_radius: float = 0.3
    goal_offset: float = 2.0
    drone_start_altitude: float = 1.0
    max_altitude: float = 3.0

    def __post_init__(self):
        if self.max_episode_len < 1:
            raise ConfigError(f"max_episode_len должен быть >= 1: {self.max_episode_len}")
        if not 0 <= self.goal_distance_min <= self.goal_distance_max:
            raise ConfigError("Нужно 0 <= goal_distance_min <= goal_distance_max")
        if self.goal_distance_max >= self.ring_radius:
            raise ConfigError("goal_distance_max должен быть меньше радиуса ринга")
        if not 0 < self.spawn_radius_fraction < 1:
            raise ConfigError("spawn_radius_fraction должен лежать в (0, 1)")


@dataclass
class EliminationStatus:
    """
    Флаги выбывания для N экземпляров

    L[:, i] - команда i выбыла на этом шаге; tie - выбыли все команды
    одновременно; timeout - эпизод закончился по лимиту длины.
    """

    L: np.ndarray
    tie: np.ndarray
    timeout: np.ndarray
    eliminated: np.ndarray

    @classmethod
    def empty(cls, n_instances: int, n_teams: int, n_agents: int) -> "EliminationStatus":
        return cls(
            L=np.zeros((n_instances, n_teams), dtype=bool),
            tie=np.zeros(n_instances, dtype=bool),
            timeout=np.zeros(n_instances, dtype=bool),
            eliminated=np.zeros((n_instances, n_agents), dtype=bool),
        )

    @property
    def tau(self) -> np.ndarray:
        return np.where(self.tie, 0.0, 1.0)

    def copy(self) -> "EliminationStatus":
        return EliminationStatus(self.L.copy(), self.tie.copy(), self.timeout.copy(), self.eliminated.copy())

    def select(self, instances) -> "EliminationStatus":
        return EliminationStatus(
            self.L[instances].copy(), self.tie[instances].copy(),
            self.timeout[instances].copy(), self.eliminated[instances].copy(),
        )
