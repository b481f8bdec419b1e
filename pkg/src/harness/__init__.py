"""
Оболочка обучения: файл запуска, контрольные точки, турниры, оценка и выгрузка метрик
"""

from .checkpoint import FORMAT_VERSION, Checkpoint, checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint
from .evaluation import evaluate_stage, evaluate_win_rates, stage_metrics
from .metrics import EVAL_FILE, METRICS_FILE, export_metrics, load_metrics, plot_metrics
from .pipeline import CurriculumTrainer, buffer_study, resume_training, train_curriculum
from .replay import replay_trajectory
from .run_config import RunConfig, TrainingConfig, default_run_config, load_run_config, save_run_config
from .tournament import WinRateReport, map_chunks, play_episodes, record_episode, run_tournament

__all__ = [
    'Checkpoint',
    'CurriculumTrainer',
    'EVAL_FILE',
    'FORMAT_VERSION',
    'METRICS_FILE',
    'RunConfig',
    'TrainingConfig',
    'WinRateReport',
    'buffer_study',
    'checkpoint_from_bytes',
    'checkpoint_to_bytes',
    'default_run_config',
    'evaluate_stage',
    'evaluate_win_rates',
    'export_metrics',
    'load_checkpoint',
    'load_metrics',
    'load_run_config',
    'map_chunks',
    'play_episodes',
    'plot_metrics',
    'record_episode',
    'replay_trajectory',
    'resume_training',
    'run_tournament',
    'save_checkpoint',
    'save_run_config',
    'stage_metrics',
    'train_curriculum',
]
