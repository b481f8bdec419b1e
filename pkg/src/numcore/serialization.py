"""
Двоичное представление параметров: little-endian float64 с заголовком размерностей
"""

from typing import List, Sequence, Tuple

import numpy as np

from utils.errors import CheckpointError
from .mlp import ACTIVATIONS, MlpParams

_INT = np.dtype("<i8")
_FLOAT = np.dtype("<f8")


def _read(buf: bytes, offset: int, dtype: np.dtype, count: int) -> Tuple[np.ndarray, int]:
    end = offset + dtype.itemsize * count
    if count < 0 or end > len(buf):
        raise CheckpointError(f"Блок параметров усечён: нужно {end} байт, доступно {len(buf)}")
    return np.frombuffer(buf, dtype=dtype, count=count, offset=offset).copy(), end


def params_to_bytes(params: MlpParams) -> bytes:
    """
    Заголовок: число слоёв, затем (in, out, код активации) на слой;
    далее веса и смещения слоёв подряд.
    """
    header = [len(params.weights)]
    for (d_in, d_out), act in zip(params.layer_dims, params.activations):
        header.extend([d_in, d_out, ACTIVATIONS.index(act)])
    chunks = [np.asarray(header, dtype=_INT).tobytes()]
    for w, b in zip(params.weights, params.biases):
        chunks.append(np.ascontiguousarray(w, dtype=_FLOAT).tobytes())
        chunks.append(np.ascontiguousarray(b, dtype=_FLOAT).tobytes())
    return b"".join(chunks)


def params_from_bytes(buf: bytes, offset: int = 0) -> Tuple[MlpParams, int]:
    """Обратное к params_to_bytes; возвращает параметры и смещение за блоком"""
    (n_layers,), offset = _read(buf, offset, _INT, 1)
    if n_layers < 1:
        raise CheckpointError(f"Некорректное число слоёв: {n_layers}")
    dims, offset = _read(buf, offset, _INT, 3 * int(n_layers))
    weights, biases, activations = [], [], []
    for k in range(int(n_layers)):
        d_in, d_out, code = (int(v) for v in dims[3 * k:3 * k + 3])
        if not 0 <= code < len(ACTIVATIONS):
            raise CheckpointError(f"Слой {k}: неизвестный код активации {code}")
        w, offset = _read(buf, offset, _FLOAT, d_in * d_out)
        b, offset = _read(buf, offset, _FLOAT, d_out)
        weights.append(w.reshape(d_out, d_in))
        biases.append(b)
        activations.append(ACTIVATIONS[code])
    return MlpParams(weights, biases, activations), offset


def arrays_to_bytes(arrays: Sequence[np.ndarray]) -> bytes:
    """Список массивов: количество, затем (ndim, shape..., данные) на массив"""
    chunks = [np.asarray([len(arrays)], dtype=_INT).tobytes()]
    for a in arrays:
        a = np.asarray(a, dtype=_FLOAT)
        chunks.append(np.asarray([a.ndim, *a.shape], dtype=_INT).tobytes())
        chunks.append(np.ascontiguousarray(a).tobytes())
    return b"".join(chunks)


def arrays_from_bytes(buf: bytes, offset: int = 0) -> Tuple[List[np.ndarray], int]:
    (count,), offset = _read(buf, offset, _INT, 1)
    arrays = []
    for _ in range(int(count)):
        (ndim,), offset = _read(buf, offset, _INT, 1)
        shape, offset = _read(buf, offset, _INT, int(ndim))
        size = int(np.prod(shape)) if ndim else 1
        data, offset = _read(buf, offset, _FLOAT, size)
        arrays.append(data.reshape(tuple(int(s) for s in shape)))
    return arrays, offset
