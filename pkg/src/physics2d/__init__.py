"""
Детерминированная двумерная физика дисков
"""

from .bodies import ActuationLimits, ArenaShape, ArenaSpec, BodyBatch, BodyKind, DiscBody, Ray, action_dim, wrap_angle
from .dynamics import Actuation, PhysicsConfig, apply_action, apply_actions, integrate, resolve_collisions
from .queries import (
    Excursion,
    contain_in_rect,
    point_ray_distance,
    point_ray_distances,
    ring_excursion,
    ring_excursion_mask,
)

__all__ = [
    'Actuation',
    'ActuationLimits',
    'ArenaShape',
    'ArenaSpec',
    'BodyBatch',
    'BodyKind',
    'DiscBody',
    'Excursion',
    'PhysicsConfig',
    'Ray',
    'action_dim',
    'apply_action',
    'apply_actions',
    'contain_in_rect',
    'integrate',
    'point_ray_distance',
    'point_ray_distances',
    'resolve_collisions',
    'ring_excursion',
    'ring_excursion_mask',
    'wrap_angle',
]
