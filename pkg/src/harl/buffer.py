"""
Буфер on-policy переходов и обобщённая оценка преимущества (GAE)
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import NumericError, ShapeError


def compute_gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    bootstrap: np.ndarray,
    discount: float,
    lam: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Обратный проход GAE по оси времени

    Args:
        rewards: Награды (T, ...)
        values: Оценки ценности V(s_t) той же формы
        dones: Флаги конца эпизода после шага t
        bootstrap: V(s_T) для продолжения за горизонтом, форма (...)
        discount: Коэффициент дисконтирования
        lam: Параметр lambda

    Returns:
        (преимущества, возвраты = преимущества + ценности)
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    if rewards.shape != values.shape or dones.shape != rewards.shape:
        raise ShapeError(f"Формы наград {rewards.shape}, ценностей {values.shape} и флагов {dones.shape} различаются")
    bootstrap = np.broadcast_to(np.asarray(bootstrap, dtype=np.float64), rewards.shape[1:])

    advantages = np.zeros_like(rewards)
    running = np.zeros(rewards.shape[1:])
    next_value = bootstrap
    for t in reversed(range(rewards.shape[0])):
        mask = 1.0 - dones[t]
        delta = rewards[t] + discount * next_value * mask - values[t]
        running = delta + discount * lam * mask * running
        advantages[t] = running
        next_value = values[t]
    return advantages, advantages + values


@dataclass
class RolloutBuffer:
    """
    Переходы горизонта T в N экземплярах

    Поля агентов хранятся списками по глобальному индексу агента,
    командные - последней осью n_teams.
    """

    observations: List[np.ndarray]   # (T, N, obs_dim)
    actions: List[np.ndarray]        # (T, N, k)
    log_probs: List[np.ndarray]      # (T, N)
    alive: np.ndarray                # (T, N, A)
    rewards: np.ndarray              # (T, N, n_teams)
    values: np.ndarray               # (T, N, n_teams)
    dones: np.ndarray                # (T, N)
    agent_team: np.ndarray           # (A,)
    bootstrap: Optional[np.ndarray] = None     # (N, n_teams)
    advantages: Optional[np.ndarray] = None
    returns: Optional[np.ndarray] = None

    @classmethod
    def allocate(cls, horizon: int, num_instances: int, obs_dims: Sequence[int], action_dims: Sequence[int],
                 agent_team: np.ndarray, n_teams: int) -> "RolloutBuffer":
        if horizon < 1:
            raise ShapeError(f"Горизонт должен быть >= 1: {horizon}")
        t, n = int(horizon), int(num_instances)
        return cls(
            observations=[np.zeros((t, n, d)) for d in obs_dims],
            actions=[np.zeros((t, n, k)) for k in action_dims],
            log_probs=[np.zeros((t, n)) for _ in obs_dims],
            alive=np.ones((t, n, len(obs_dims)), dtype=bool),
            rewards=np.zeros((t, n, n_teams)),
            values=np.zeros((t, n, n_teams)),
            dones=np.zeros((t, n), dtype=bool),
            agent_team=np.asarray(agent_team, dtype=np.int64),
        )

    @property
    def horizon(self) -> int:
        return int(self.dones.shape[0])

    @property
    def num_instances(self) -> int:
        return int(self.dones.shape[1])

    @property
    def n_teams(self) -> int:
        return int(self.rewards.shape[-1])

    def team_members(self, team: int) -> List[int]:
        return [i for i, t in enumerate(self.agent_team) if t == team]

    def critic_input(self, members: Sequence[int]) -> np.ndarray:
        """Склейка наблюдений агентов members, форма (T, N, sum obs_dim)"""
        return np.concatenate([self.observations[i] for i in members], axis=-1)

    def finalize(self, discount: float, lam: float, critic_rewards: Optional[np.ndarray] = None) -> None:
        """
        Считает преимущества и возвраты для каждой команды

        critic_rewards подменяет награды, на которых учатся критики
        (используется для общего критика по средней награде).
        """
        if self.bootstrap is None:
            raise ShapeError("Буфер не содержит bootstrap-оценок последнего состояния")
        rewards = self.rewards if critic_rewards is None else critic_rewards
        self.advantages, self.returns = compute_gae(
            rewards, self.values, np.broadcast_to(self.dones[..., None], rewards.shape),
            self.bootstrap, discount, lam,
        )
        if not (np.all(np.isfinite(self.advantages)) and np.all(np.isfinite(self.returns))):
            raise NumericError("Нечисловые преимущества после GAE")

    def flat(self, array: np.ndarray) -> np.ndarray:
        """(T, N, ...) -> (T * N, ...)"""
        return array.reshape((self.horizon * self.num_instances,) + array.shape[2:])
