"""
Обучаемая сторона: политики агентов команды и её критик
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from numcore import AdamState
from .networks import CriticNet, PolicyNet, init_critic, init_policy


class TeamLearner:
    """Политики участников команды, командный критик и состояния Adam"""

    def __init__(
        self,
        team_id: int,
        policies: Sequence[PolicyNet],
        critic: Optional[CriticNet],
        rng: np.random.Generator,
        frozen: bool = False,
        actor_opts: Optional[Sequence[AdamState]] = None,
        critic_opt: Optional[AdamState] = None,
    ):
        """
        Инициализация обучаемой стороны

        Args:
            team_id: Номер команды
            policies: Политика каждого агента в порядке команды
            critic: Критик команды; None, если команда пользуется общим критиком
            rng: Поток случайных чисел для сэмплирования действий
            frozen: Замороженная сторона не получает обновлений
        """
        self.team_id = int(team_id)
        self.policies = list(policies)
        self.critic = critic
        self.rng = rng
        self.frozen = bool(frozen)
        self.actor_opts = list(actor_opts) if actor_opts is not None else [AdamState.zeros_like(p) for p in self.policies]
        if critic_opt is None and critic is not None:
            critic_opt = AdamState.zeros_like(critic)
        self.critic_opt = critic_opt

    @classmethod
    def create(
        cls,
        team_id: int,
        obs_dims: Sequence[int],
        action_dims: Sequence[int],
        hidden_sizes: Sequence[Sequence[int]],
        critic_in_dim: Optional[int],
        seed: int,
        critic_hidden: Sequence[int] = (64, 64),
    ) -> "TeamLearner":
        """
        Новая сторона со случайной инициализацией

        Генераторы параметров и действий выводятся из (seed, team_id), поэтому
        стороны воспроизводимы независимо друг от друга.
        """
        init_rng = np.random.default_rng([int(seed), int(team_id), 0])
        policies = [init_policy(o, a, h, init_rng) for o, a, h in zip(obs_dims, action_dims, hidden_sizes)]
        critic = init_critic(critic_in_dim, critic_hidden, init_rng) if critic_in_dim else None
        act_rng = np.random.default_rng([int(seed), int(team_id), 1])
        logger.debug(
            f"Команда {team_id}: {len(policies)} политик, критик "
            f"{'общий' if critic is None else f'вход {critic_in_dim}'}"
        )
        return cls(team_id, policies, critic, act_rng)

    @property
    def n_agents(self) -> int:
        return len(self.policies)

    def act(self, observations: Sequence[np.ndarray], deterministic: bool = False) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        """Действия и логарифмы вероятностей для наблюдений участников (N, obs_dim)"""
        actions, log_probs = [], []
        for policy, obs in zip(self.policies, observations):
            a, lp = policy.act(obs, self.rng, deterministic=deterministic)
            actions.append(a)
            log_probs.append(lp)
        return actions, log_probs

    def value(self, critic_input: np.ndarray) -> np.ndarray:
        return self.critic.value(critic_input)

    def copy(self) -> "TeamLearner":
        """Глубокая копия параметров и моментов; генератор копируется вместе с состоянием"""
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng.bit_generator.state
        return TeamLearner(
            self.team_id,
            [p.copy() for p in self.policies],
            None if self.critic is None else self.critic.copy(),
            rng,
            frozen=self.frozen,
            actor_opts=[o.copy() for o in self.actor_opts],
            critic_opt=None if self.critic_opt is None else self.critic_opt.copy(),
        )

    def reset_optimizers(self) -> None:
        self.actor_opts = [AdamState.zeros_like(p) for p in self.policies]
        if self.critic is not None:
            self.critic_opt = AdamState.zeros_like(self.critic)

    def parameter_tensors(self) -> List[np.ndarray]:
        """Все параметры стороны одним списком (для сравнения и контрольных точек)"""
        tensors = [t for p in self.policies for t in p.tensors()]
        if self.critic is not None:
            tensors += self.critic.tensors()
        return tensors
