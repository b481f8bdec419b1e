"""
Оптимизатор Adam и ограничение нормы градиента
"""

from dataclasses import dataclass, field
from typing import List, Protocol, Sequence, Tuple, TypeVar

import numpy as np

from utils.errors import ContractError, NumericError, ShapeError


class ParameterSet(Protocol):
    """Всё, что отдаёт плоский список тензоров и собирается обратно"""

    def tensors(self) -> List[np.ndarray]: ...

    def with_tensors(self, tensors: Sequence[np.ndarray]) -> "ParameterSet": ...


P = TypeVar("P", bound=ParameterSet)


@dataclass
class AdamState:
    """Первый и второй моменты в форме параметров и счётчик шагов"""

    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ParameterSet) -> "AdamState":
        tensors = params.tensors()
        return cls(
            m=[np.zeros_like(t) for t in tensors],
            v=[np.zeros_like(t) for t in tensors],
            step=0,
        )

    def copy(self) -> "AdamState":
        return AdamState([m.copy() for m in self.m], [v.copy() for v in self.v], self.step)


def _tensors(obj) -> List[np.ndarray]:
    return obj.tensors() if hasattr(obj, "tensors") else list(obj)


def adam_step(
    params: P,
    grads,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[P, AdamState]:
    """
    Один шаг Adam с поправкой смещения

    Args:
        params: Параметры (MlpParams или иной ParameterSet)
        grads: Градиенты той же структуры (объект или список тензоров)
        state: Состояние оптимизатора
        lr: Скорость обучения (> 0)

    Returns:
        (новые параметры, новое состояние); входы не изменяются
    """
    if lr <= 0:
        raise ContractError(f"Скорость обучения должна быть положительной: {lr}")

    p_list = params.tensors()
    g_list = _tensors(grads)
    if len(g_list) != len(p_list) or len(state.m) != len(p_list) or len(state.v) != len(p_list):
        raise ShapeError("Структура градиентов или состояния Adam не совпадает с параметрами")

    for i, (p, g, m) in enumerate(zip(p_list, g_list, state.m)):
        if np.shape(g) != p.shape or m.shape != p.shape:
            raise ShapeError(f"Тензор {i}: форма {np.shape(g)} вместо {p.shape}")
        bad = ~np.isfinite(g)
        if np.any(bad):
            index = tuple(int(j) for j in np.argwhere(bad)[0])
            raise NumericError(f"Нечисловой градиент: тензор {i}, индекс {index}")

    t = state.step + 1
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t

    new_p, new_m, new_v = [], [], []
    for p, g, m, v in zip(p_list, g_list, state.m, state.v):
        g = np.asarray(g, dtype=np.float64)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        new_p.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)

    return params.with_tensors(new_p), AdamState(new_m, new_v, t)


def global_norm(tensors: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(np.square(t))) for t in tensors)))


def clip_by_global_norm(tensors: Sequence[np.ndarray], max_norm: float) -> Tuple[List[np.ndarray], float]:
    """Масштабирует градиенты так, чтобы их общая норма не превышала max_norm"""
    norm = global_norm(tensors)
    if norm > max_norm > 0:
        scale = max_norm / norm
        return [t * scale for t in tensors], norm
    return [np.asarray(t) for t in tensors], norm
