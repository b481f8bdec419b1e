"""
Многокомандные среды: ходьба к точке, толкание блока, сумо и лазертаг
"""

from .arena import EnvSetup, EnvState, StepEvents, StepResult, mirror_instances, reset, reset_instances, step
from .observation import build_observation, compute_features, observe, task_feature_slots
from .presets import PRESETS, ROLES, team_preset, teams_from_roles
from .recording import Trajectory, TrajectoryWriter, read_trajectory
from .rewards import reward_block_push, reward_laser_tag, reward_sumo, reward_walk_to_point, team_rewards
from .spawn import spawn_instance
from .specs import AgentSpec, EliminationStatus, EnvConfig, RewardConfig, TaskKind, TeamSpec, validate_teams
from .vector_env import TIE, EpisodeStats, VecArena, VecStep, episode_outcome

__all__ = [
    'AgentSpec',
    'EliminationStatus',
    'EnvConfig',
    'EnvSetup',
    'EnvState',
    'EpisodeStats',
    'PRESETS',
    'ROLES',
    'RewardConfig',
    'StepEvents',
    'StepResult',
    'TIE',
    'TaskKind',
    'TeamSpec',
    'Trajectory',
    'TrajectoryWriter',
    'VecArena',
    'VecStep',
    'build_observation',
    'compute_features',
    'episode_outcome',
    'mirror_instances',
    'observe',
    'read_trajectory',
    'reset',
    'reset_instances',
    'reward_block_push',
    'reward_laser_tag',
    'reward_sumo',
    'reward_walk_to_point',
    'spawn_instance',
    'step',
    'task_feature_slots',
    'team_preset',
    'teams_from_roles',
    'validate_teams',
]
