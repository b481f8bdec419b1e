"""
Сети политики и критика поверх numcore
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from numcore import (
    GaussianHead,
    MlpParams,
    gaussian_log_prob,
    gaussian_sample,
    init_mlp,
    mlp_forward,
)
from utils.errors import ShapeError


@dataclass
class PolicyNet:
    """MLP среднего действия и обучаемый log_std, не зависящий от состояния"""

    mlp: MlpParams
    log_std: np.ndarray

    def __post_init__(self):
        self.log_std = np.asarray(self.log_std, dtype=np.float64)
        if self.log_std.shape != (self.mlp.out_dim,):
            raise ShapeError(f"log_std {self.log_std.shape} не совпадает с выходом сети {self.mlp.out_dim}")

    @property
    def obs_dim(self) -> int:
        return self.mlp.in_dim

    @property
    def action_dim(self) -> int:
        return self.mlp.out_dim

    def tensors(self) -> List[np.ndarray]:
        return self.mlp.tensors() + [self.log_std]

    def with_tensors(self, tensors: Sequence[np.ndarray]) -> "PolicyNet":
        return PolicyNet(self.mlp.with_tensors(tensors[:-1]), np.array(tensors[-1], dtype=np.float64))

    def copy(self) -> "PolicyNet":
        return self.with_tensors(self.tensors())

    def head(self, obs: np.ndarray) -> GaussianHead:
        return GaussianHead(mlp_forward(self.mlp, obs), self.log_std)

    def act(self, obs: np.ndarray, rng: np.random.Generator, deterministic: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """Действия и их логарифмы вероятности; в детерминированном режиме - среднее"""
        head = self.head(obs)
        actions = head.mean.copy() if deterministic else gaussian_sample(head, rng)
        return actions, gaussian_log_prob(head, actions)

    def log_prob(self, obs: np.ndarray, actions: np.ndarray) -> np.ndarray:
        return gaussian_log_prob(self.head(obs), actions)


@dataclass
class CriticNet:
    """Скалярная оценка ценности по наблюдениям своей команды"""

    mlp: MlpParams

    def __post_init__(self):
        if self.mlp.out_dim != 1:
            raise ShapeError(f"Критик должен выдавать скаляр, выход {self.mlp.out_dim}")

    @property
    def in_dim(self) -> int:
        return self.mlp.in_dim

    def tensors(self) -> List[np.ndarray]:
        return self.mlp.tensors()

    def with_tensors(self, tensors: Sequence[np.ndarray]) -> "CriticNet":
        return CriticNet(self.mlp.with_tensors(tensors))

    def copy(self) -> "CriticNet":
        return CriticNet(self.mlp.copy())

    def value(self, x: np.ndarray) -> np.ndarray:
        return mlp_forward(self.mlp, x)[..., 0]


def init_policy(
    obs_dim: int,
    action_dim: int,
    hidden_sizes: Sequence[int],
    rng: np.random.Generator,
    log_std_init: float = -0.5,
) -> PolicyNet:
    # Малый выходной слой: начальные средние близки к нулю
    mlp = init_mlp([obs_dim, *hidden_sizes, action_dim], rng, hidden_gain=1.0, output_gain=0.01)
    return PolicyNet(mlp, np.full(action_dim, log_std_init))


def init_critic(in_dim: int, hidden_sizes: Sequence[int], rng: np.random.Generator) -> CriticNet:
    return CriticNet(init_mlp([in_dim, *hidden_sizes, 1], rng, hidden_gain=1.0, output_gain=1.0))
