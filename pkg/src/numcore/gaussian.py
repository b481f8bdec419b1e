"""
Диагональная гауссовская голова политики
"""

from dataclasses import dataclass

import numpy as np

from utils.errors import ShapeError

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GaussianHead:
    """Среднее (..., d) от сети и независимый от состояния log_std (d,)"""

    mean: np.ndarray
    log_std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        log_std = np.asarray(self.log_std, dtype=np.float64)
        if mean.ndim == 0 or mean.shape[-1] < 1:
            raise ShapeError("Размерность действия должна быть >= 1")
        if log_std.shape != (mean.shape[-1],):
            raise ShapeError(f"log_std {log_std.shape} не совпадает с действием {mean.shape[-1]}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "log_std", np.clip(log_std, LOG_STD_MIN, LOG_STD_MAX))

    @property
    def action_dim(self) -> int:
        return int(self.mean.shape[-1])

    @property
    def std(self) -> np.ndarray:
        return np.exp(self.log_std)


def _check_action(head: GaussianHead, action: np.ndarray) -> np.ndarray:
    action = np.asarray(action, dtype=np.float64)
    if action.shape[-1:] != (head.action_dim,):
        raise ShapeError(f"Действие {action.shape} не совпадает с размерностью {head.action_dim}")
    return action


def gaussian_log_prob(head: GaussianHead, action: np.ndarray):
    """Логарифм плотности, суммированный по компонентам действия"""
    action = _check_action(head, action)
    z = (action - head.mean) / head.std
    return np.sum(-0.5 * z ** 2 - head.log_std - _HALF_LOG_2PI, axis=-1)


def gaussian_log_prob_grads(head: GaussianHead, action: np.ndarray):
    """
    Производные log_prob по среднему и по log_std

    Returns:
        (d/d mean той же формы, что mean; d/d log_std той же формы, что mean)
    """
    action = _check_action(head, action)
    std = head.std
    z = (action - head.mean) / std
    return z / std, z ** 2 - 1.0


def gaussian_entropy(head: GaussianHead) -> float:
    """Энтропия; производная по каждому log_std равна 1"""
    return float(np.sum(head.log_std + 0.5 + _HALF_LOG_2PI))


def gaussian_sample(head: GaussianHead, rng: np.random.Generator) -> np.ndarray:
    """Сэмпл mean + exp(log_std) * N(0, 1)"""
    noise = rng.standard_normal(head.mean.shape)
    return head.mean + head.std * noise
