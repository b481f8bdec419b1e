"""
Численное ядро: MLP, гауссовская голова политики, Adam и двоичное представление параметров
"""

from .adam import AdamState, adam_step, clip_by_global_norm, global_norm
from .gaussian import (
    LOG_STD_MAX,
    LOG_STD_MIN,
    GaussianHead,
    gaussian_entropy,
    gaussian_log_prob,
    gaussian_log_prob_grads,
    gaussian_sample,
)
from .mlp import MlpParams, init_mlp, mlp_backward, mlp_forward
from .serialization import arrays_from_bytes, arrays_to_bytes, params_from_bytes, params_to_bytes

__all__ = [
    'LOG_STD_MAX',
    'LOG_STD_MIN',
    'AdamState',
    'GaussianHead',
    'MlpParams',
    'adam_step',
    'arrays_from_bytes',
    'arrays_to_bytes',
    'clip_by_global_norm',
    'gaussian_entropy',
    'gaussian_log_prob',
    'gaussian_log_prob_grads',
    'gaussian_sample',
    'global_norm',
    'init_mlp',
    'mlp_backward',
    'mlp_forward',
    'params_from_bytes',
    'params_to_bytes',
]
