"""
Учебный план: раскладки с нулевым буфером, критерии перехода и перенос между стадиями
"""

from .layout import BUFFER_SLOT, ObservationLayout, ObservationSlot, build_layout, pad_observation
from .plan import (
    DEFAULT_GATES,
    KNOWN_METRICS,
    Advance,
    CurriculumPlan,
    StageSpec,
    advance,
    default_gate,
    default_stage,
    make_layout,
    make_layouts,
)
from .transfer import check_compatible, transfer_checkpoint

__all__ = [
    'Advance',
    'BUFFER_SLOT',
    'CurriculumPlan',
    'DEFAULT_GATES',
    'KNOWN_METRICS',
    'ObservationLayout',
    'ObservationSlot',
    'StageSpec',
    'advance',
    'build_layout',
    'check_compatible',
    'default_gate',
    'default_stage',
    'make_layout',
    'make_layouts',
    'pad_observation',
    'transfer_checkpoint',
]
