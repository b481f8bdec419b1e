"""
Полносвязная сеть (MLP) с аналитическим обратным проходом
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from utils.errors import NumericError, ShapeError

ACTIVATIONS = ("tanh", "linear")


@dataclass
class MlpParams:
    """Параметры сети: веса (out x in), смещения и активация каждого слоя"""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activations: List[str]

    def __post_init__(self):
        if not self.weights:
            raise ShapeError("Сеть должна содержать хотя бы один слой")
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ShapeError("Число весов, смещений и активаций не совпадает")

        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        self.activations = list(self.activations)

        for k, (w, b, act) in enumerate(zip(self.weights, self.biases, self.activations)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeError(f"Слой {k}: вес {w.shape} и смещение {b.shape} несовместимы")
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ShapeError(
                    f"Слой {k}: вход {w.shape[1]} не совпадает с выходом слоя {k - 1} "
                    f"({self.weights[k - 1].shape[0]})"
                )
            if act not in ACTIVATIONS:
                raise ShapeError(f"Слой {k}: неизвестная активация '{act}'")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"Слой {k}: нечисловые параметры")

    @property
    def in_dim(self) -> int:
        return int(self.weights[0].shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.weights[-1].shape[0])

    @property
    def layer_dims(self) -> List[Tuple[int, int]]:
        """Пары (in, out) по слоям"""
        return [(int(w.shape[1]), int(w.shape[0])) for w in self.weights]

    def tensors(self) -> List[np.ndarray]:
        """Плоский список тензоров: w0, b0, w1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def with_tensors(self, tensors: Sequence[np.ndarray]) -> "MlpParams":
        """Новая сеть той же структуры с другими тензорами"""
        if len(tensors) != 2 * len(self.weights):
            raise ShapeError(f"Ожидалось {2 * len(self.weights)} тензоров, получено {len(tensors)}")
        return MlpParams(
            weights=[np.array(t, dtype=np.float64) for t in tensors[0::2]],
            biases=[np.array(t, dtype=np.float64) for t in tensors[1::2]],
            activations=list(self.activations),
        )

    def copy(self) -> "MlpParams":
        return self.with_tensors(self.tensors())

    def zeros_like(self) -> "MlpParams":
        return self.with_tensors([np.zeros_like(t) for t in self.tensors()])


def init_mlp(
    sizes: Sequence[int],
    rng: np.random.Generator,
    hidden_gain: float = 1.0,
    output_gain: float = 1.0,
    activation: str = "tanh",
) -> MlpParams:
    """
    Инициализация сети масштабированным равномерным распределением

    Args:
        sizes: Размерности [in, hidden..., out]
        rng: Генератор случайных чисел
        hidden_gain: Множитель для скрытых слоёв
        output_gain: Множитель для выходного слоя (0.01 для политики)
        activation: Активация скрытых слоёв

    Returns:
        Параметры сети; выходной слой линейный
    """
    if len(sizes) < 2 or any(int(s) < 1 for s in sizes):
        raise ShapeError(f"Некорректные размеры сети: {list(sizes)}")

    weights, biases, activations = [], [], []
    n_layers = len(sizes) - 1
    for k in range(n_layers):
        fan_in, fan_out = int(sizes[k]), int(sizes[k + 1])
        gain = output_gain if k == n_layers - 1 else hidden_gain
        # Дисперсия gain^2 / fan_in
        limit = gain * np.sqrt(3.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
        activations.append("linear" if k == n_layers - 1 else activation)

    return MlpParams(weights, biases, activations)


def _forward_cached(params: MlpParams, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != params.in_dim:
        raise ShapeError(f"Слой 0: ожидался вход размерности {params.in_dim}, получено {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericError("Нечисловые значения во входе сети")

    inputs, outputs = [], []
    h = x
    for w, b, act in zip(params.weights, params.biases, params.activations):
        inputs.append(h)
        z = h @ w.T + b
        h = np.tanh(z) if act == "tanh" else z
        outputs.append(h)
    return h, inputs, outputs


def mlp_forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """
    Прямой проход: композиция аффинных слоёв и tanh

    Args:
        params: Параметры сети
        x: Вход формы (in,) или батч (B, in)

    Returns:
        Выход формы (out,) или (B, out)
    """
    out, _, _ = _forward_cached(params, x)
    return out


def mlp_backward(params: MlpParams, x: np.ndarray, upstream: np.ndarray) -> Tuple[MlpParams, np.ndarray]:
    """
    Обратный проход для upstream^T * output

    Прямой проход пересчитывается внутри. Для батча градиенты параметров
    суммируются по примерам.

    Returns:
        (градиенты в форме MlpParams, градиент по входу)
    """
    out, inputs, outputs = _forward_cached(params, x)
    g = np.asarray(upstream, dtype=np.float64)
    if g.shape != out.shape:
        raise ShapeError(f"Слой {len(params.weights) - 1}: upstream {g.shape} не совпадает с выходом {out.shape}")

    batched = g.ndim == 2
    n_layers = len(params.weights)
    grad_w: List[np.ndarray] = [None] * n_layers
    grad_b: List[np.ndarray] = [None] * n_layers

    for k in reversed(range(n_layers)):
        if params.activations[k] == "tanh":
            g = g * (1.0 - outputs[k] ** 2)
        if batched:
            grad_w[k] = g.T @ inputs[k]
            grad_b[k] = g.sum(axis=0)
        else:
            grad_w[k] = np.outer(g, inputs[k])
            grad_b[k] = g.copy()
        g = g @ params.weights[k]

    grads = MlpParams(grad_w, grad_b, list(params.activations))
    return grads, g
