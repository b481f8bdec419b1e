"""
Оценка на контрольных точках обучения: метрики стадии и win rate в обе стороны
"""

from typing import Any, Dict, Optional, Sequence

import numpy as np
from loguru import logger

from envs import EnvSetup, TaskKind
from envs.arena import ADVERSARIAL_TASKS
from harl import TeamLearner
from .tournament import WinRateReport, map_chunks, play_episodes, run_tournament


def evaluate_stage(
    learners: Sequence[TeamLearner],
    setup: EnvSetup,
    n_instances: int,
    seed: int,
    workers: Optional[int] = None,
) -> Dict[str, float]:
    """
    Детерминированные эпизоды с текущими сторонами

    Returns:
        mean_return (средний возврат по командам и эпизодам), reach_rate,
        block_out_rate и средние возвраты команд return_t{k}
    """
    def play(chunk: np.ndarray):
        _, returns, state = play_episodes(learners, learners, setup, seed, chunk, np.zeros(len(chunk), dtype=bool))
        return returns, state.reached, state.block_out

    parts = map_chunks(play, n_instances, workers)
    returns = np.concatenate([p[0] for p in parts])
    reached = np.concatenate([p[1] for p in parts])
    block_out = np.concatenate([p[2] for p in parts])

    metrics = {
        "mean_return": float(returns.mean()),
        "reach_rate": float(reached.mean()),
        "block_out_rate": float(block_out.mean()) if setup.task == TaskKind.BLOCK_PUSH else 0.0,
    }
    for t in range(setup.n_teams):
        metrics[f"eval_return_t{t}"] = float(returns[:, t].mean())
    return metrics


def evaluate_win_rates(
    learners: Sequence[TeamLearner],
    initial: Sequence[TeamLearner],
    setup: EnvSetup,
    n_instances: int,
    seed: int,
    workers: Optional[int] = None,
) -> Dict[str, WinRateReport]:
    """
    Win rate обученных сторон против снимка начала стадии в обе стороны

    t0: обученная команда 0 против исходной команды 1;
    t1: исходная команда 0 против обученной команды 1 (побеждает B).
    """
    forward = run_tournament(learners, initial, setup, n_instances, seed, opponent="initial-snapshot", workers=workers)
    backward = run_tournament(initial, learners, setup, n_instances, seed, opponent="initial-snapshot", workers=workers)
    return {"t0": forward, "t1": backward}


def stage_metrics(
    learners: Sequence[TeamLearner],
    initial: Sequence[TeamLearner],
    setup: EnvSetup,
    n_instances: int,
    seed: int,
    workers: Optional[int] = None,
) -> Dict[str, Any]:
    """Строка оценки: метрики стадии и, в состязательной задаче, win_rate_t0 и win_rate_t1"""
    metrics: Dict[str, Any] = evaluate_stage(learners, setup, n_instances, seed, workers)
    if setup.task in ADVERSARIAL_TASKS:
        reports = evaluate_win_rates(learners, initial, setup, n_instances, seed, workers)
        metrics["win_rate_t0"] = reports["t0"].win_rate
        metrics["win_rate_t1"] = reports["t1"].loss_rate
        metrics["tie_rate"] = reports["t0"].ties / reports["t0"].n_instances
    summary = ", ".join(f"{k}={v:.3f}" for k, v in metrics.items())
    logger.info(f"Оценка стадии {setup.stage} ({setup.task.value}, {n_instances} эпизодов): {summary}")
    return metrics
