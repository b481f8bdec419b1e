"""
Режимы состязательного обучения: одновременный и поочерёдный (leapfrog)
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from envs import VecArena
from utils.errors import ConfigError
from .happo import HappoConfig, happo_update
from .learner import TeamLearner
from .rollout import collect_rollouts

SIMULTANEOUS = "simultaneous"
LEAPFROG = "leapfrog"


@dataclass(frozen=True)
class Regime:
    """Одновременное обновление всех команд или поочерёдное с заданным интервалом"""

    kind: str = SIMULTANEOUS
    interval: int = 10

    def __post_init__(self):
        if self.kind not in (SIMULTANEOUS, LEAPFROG):
            raise ConfigError(f"Неизвестный режим обучения: {self.kind}")
        if self.interval < 1:
            raise ConfigError(f"Интервал leapfrog должен быть >= 1: {self.interval}")

    def unfrozen_team(self, update: int, n_teams: int) -> Optional[int]:
        if self.kind == SIMULTANEOUS:
            return None
        return (update // self.interval) % n_teams

    def frozen_flags(self, update: int, n_teams: int) -> List[bool]:
        """Флаги заморозки команд на обновлении update (актор и критик вместе)"""
        active = self.unfrozen_team(update, n_teams)
        if active is None:
            return [False] * n_teams
        return [t != active for t in range(n_teams)]


@dataclass
class TrainingHistory:
    """Строки обновлений, оценок и событий учебного плана"""

    updates: List[Dict[str, Any]] = field(default_factory=list)
    evals: List[Dict[str, Any]] = field(default_factory=list)
    events: List[Dict[str, Any]] = field(default_factory=list)

    def metric_series(self, name: str) -> List[float]:
        return [row[name] for row in self.evals if name in row]

    def to_dict(self) -> Dict[str, Any]:
        return {"updates": self.updates, "evals": self.evals, "events": self.events}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainingHistory":
        return cls(list(data.get("updates", [])), list(data.get("evals", [])), list(data.get("events", [])))


def snapshot_count(total_updates: int, every: int) -> int:
    """Число снимков при каденции every: обновления 0, every, 2 * every, ..."""
    return math.ceil(total_updates / every) if every > 0 else 0


def _episode_row(venv: VecArena, n_teams: int) -> Dict[str, float]:
    episodes = venv.drain_episodes()
    row: Dict[str, float] = {"episodes": len(episodes)}
    for t in range(n_teams):
        row[f"return_t{t}"] = float(np.mean([e.returns[t] for e in episodes])) if episodes else float("nan")
    row["reach_rate"] = float(np.mean([e.reach_rate for e in episodes])) if episodes else float("nan")
    row["block_out_rate"] = float(np.mean([e.block_out_rate for e in episodes])) if episodes else float("nan")
    return row


def training_update(
    learners: Sequence[TeamLearner],
    venv: VecArena,
    cfg: HappoConfig,
    horizon: int,
    rng: np.random.Generator,
    frozen: Sequence[bool],
) -> Tuple[List[TeamLearner], Dict[str, Any]]:
    """Один цикл: сбор горизонта, GAE, обновление незамороженных сторон"""
    for learner, flag in zip(learners, frozen):
        learner.frozen = bool(flag)
    buffer = collect_rollouts(learners, venv, horizon, shared_critic=cfg.shared_critic_ablation)
    critic_rewards = None
    if cfg.shared_critic_ablation:
        mean = buffer.rewards.mean(axis=-1, keepdims=True)
        critic_rewards = np.broadcast_to(mean, buffer.rewards.shape)
    buffer.finalize(cfg.discount, cfg.gae_lambda, critic_rewards=critic_rewards)
    updated, stats = happo_update(learners, buffer, cfg, rng)

    row: Dict[str, Any] = {}
    for t, flag in enumerate(frozen):
        row[f"frozen_t{t}"] = bool(flag)
    row.update(_episode_row(venv, len(learners)))
    row.update(stats.as_row())
    return updated, row


def run_regime(
    regime: Regime,
    learners: Sequence[TeamLearner],
    venv: VecArena,
    total_updates: int,
    cfg: HappoConfig,
    horizon: int,
    rng: np.random.Generator,
    history: Optional[TrainingHistory] = None,
    start_update: int = 0,
    eval_every: int = 0,
    eval_fn: Optional[Callable[[int, List[TeamLearner]], Dict[str, Any]]] = None,
    snapshot_every: int = 0,
    snapshot_fn: Optional[Callable[[int, List[TeamLearner]], None]] = None,
    stop_fn: Optional[Callable[[TrainingHistory], bool]] = None,
    stage: int = 0,
    schedule_start: int = 0,
) -> Tuple[List[TeamLearner], TrainingHistory, int]:
    """
    Цикл обновлений в заданном режиме

    Args:
        regime: Одновременный или leapfrog
        learners: Стороны по номерам команд
        venv: Пакет сред текущей стадии
        total_updates: Номер обновления, на котором цикл останавливается
        start_update: С какого обновления продолжить (возобновление)
        eval_fn: Оценка на обновлениях, кратных eval_every; строка попадает в history.evals
        snapshot_fn: Снимок на обновлениях, кратных snapshot_every
        stop_fn: Досрочная остановка после оценки (например, переход стадии)
        schedule_start: Обновление, от которого отсчитываются интервалы leapfrog (начало стадии)

    Returns:
        (стороны, история, номер следующего обновления)
    """
    n_teams = len(learners)
    if regime.kind == LEAPFROG and n_teams < 2:
        raise ConfigError("Режим leapfrog требует минимум две команды")
    history = history if history is not None else TrainingHistory()
    learners = list(learners)

    update = start_update
    while update < total_updates:
        frozen = regime.frozen_flags(update - schedule_start, n_teams)
        if snapshot_fn is not None and snapshot_every > 0 and update % snapshot_every == 0:
            snapshot_fn(update, learners)

        learners, row = training_update(learners, venv, cfg, horizon, rng, frozen)
        row = {"update": update, "stage": stage, **row}
        history.updates.append(row)
        returns = ", ".join(f"{row[f'return_t{t}']:.3f}" for t in range(n_teams))
        logger.info(f"Обновление {update}: возвраты команд [{returns}], замороженные {frozen}")
        update += 1

        if eval_fn is not None and eval_every > 0 and update % eval_every == 0:
            metrics = eval_fn(update, learners)
            history.evals.append({"update": update, "stage": stage, **metrics})
            if stop_fn is not None and stop_fn(history):
                break

    for learner in learners:
        learner.frozen = False
    return learners, history, update
