"""
Многокомандный HAPPO: сбор переходов, GAE, командные критики и режимы обучения
"""

from .buffer import RolloutBuffer, compute_gae
from .happo import (
    HappoConfig,
    TeamStats,
    UpdateStats,
    happo_update,
    minibatch_indices,
    ppo_clip_grad,
    ppo_clip_loss,
    zero_sum_critic_toy,
)
from .learner import TeamLearner
from .networks import CriticNet, PolicyNet, init_critic, init_policy
from .regime import LEAPFROG, SIMULTANEOUS, Regime, TrainingHistory, run_regime, snapshot_count, training_update
from .rollout import collect_rollouts, critic_inputs, team_values

__all__ = [
    'CriticNet',
    'HappoConfig',
    'LEAPFROG',
    'PolicyNet',
    'Regime',
    'RolloutBuffer',
    'SIMULTANEOUS',
    'TeamLearner',
    'TeamStats',
    'TrainingHistory',
    'UpdateStats',
    'collect_rollouts',
    'compute_gae',
    'critic_inputs',
    'happo_update',
    'init_critic',
    'init_policy',
    'minibatch_indices',
    'ppo_clip_grad',
    'ppo_clip_loss',
    'run_regime',
    'snapshot_count',
    'team_values',
    'training_update',
    'zero_sum_critic_toy',
]
