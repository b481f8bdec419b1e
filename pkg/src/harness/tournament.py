"""
Турнир двух наборов сторон: детерминированные эпизоды и подсчёт побед
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
from loguru import logger

from envs import TIE, EnvSetup, EnvState, TrajectoryWriter, episode_outcome, mirror_instances, reset, step
from envs.arena import ADVERSARIAL_TASKS
from harl import TeamLearner
from utils.config import default_worker_count
from utils.errors import ConfigError

T = TypeVar("T")


@dataclass
class WinRateReport:
    """Итог турнира с точки зрения стороны A"""

    wins: int
    losses: int
    ties: int
    n_instances: int
    opponent: str = ""

    def __post_init__(self):
        if self.wins + self.losses + self.ties != self.n_instances:
            raise ConfigError(
                f"Сумма исходов {self.wins + self.losses + self.ties} != числу экземпляров {self.n_instances}"
            )

    @property
    def win_rate(self) -> float:
        return self.wins / self.n_instances

    @property
    def loss_rate(self) -> float:
        return self.losses / self.n_instances

    @property
    def decisive_win_rate(self) -> float:
        """Доля побед среди результативных эпизодов; 0.5 без результативных"""
        decisive = self.wins + self.losses
        return self.wins / decisive if decisive else 0.5

    @property
    def standard_error(self) -> float:
        p = self.win_rate
        return math.sqrt(p * (1.0 - p) / self.n_instances)

    def to_row(self) -> Dict[str, Union[int, float, str]]:
        row = asdict(self)
        row["win_rate"] = self.win_rate
        return row

    def summary(self) -> str:
        return (
            f"побед {self.wins}, поражений {self.losses}, ничьих {self.ties} из {self.n_instances}; "
            f"win rate {self.win_rate:.3f} ± {self.standard_error:.3f} против '{self.opponent}'"
        )


def check_compatible(learners: Sequence[TeamLearner], setup: EnvSetup) -> None:
    """Число сторон, политик и размерности должны совпадать с описанием запуска"""
    if len(learners) != setup.n_teams:
        raise ConfigError(f"Ожидалось {setup.n_teams} сторон, получено {len(learners)}")
    obs_dims, action_dims = setup.obs_dims, setup.action_dims
    for learner in learners:
        members = setup.team_members(learner.team_id)
        if len(members) != learner.n_agents:
            raise ConfigError(f"Команда {learner.team_id}: {learner.n_agents} политик на {len(members)} агентов")
        for i, policy in zip(members, learner.policies):
            if (policy.obs_dim, policy.action_dim) != (obs_dims[i], action_dims[i]):
                raise ConfigError(
                    f"Агент {i}: политика {policy.obs_dim}->{policy.action_dim}, "
                    f"среда {obs_dims[i]}->{action_dims[i]}"
                )


def map_chunks(fn: Callable[[np.ndarray], T], n_instances: int, workers: Optional[int] = None) -> List[T]:
    """
    Делит индексы экземпляров на непрерывные куски по потокам

    Результаты возвращаются в порядке кусков, поэтому склейка не зависит от
    того, какой поток закончил первым.
    """
    workers = max(1, min(workers or default_worker_count(), n_instances))
    chunks = [c for c in np.array_split(np.arange(n_instances), workers) if len(c)]
    if len(chunks) == 1:
        return [fn(chunks[0])]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return list(pool.map(fn, chunks))


def _team_actions(learner: TeamLearner, observations: Sequence[np.ndarray], members: Sequence[int]) -> List[np.ndarray]:
    actions, _ = learner.act([observations[i] for i in members], deterministic=True)
    return actions


def _controlled_actions(
    learners_a: Sequence[TeamLearner],
    learners_b: Sequence[TeamLearner],
    setup: EnvSetup,
    observations: Sequence[np.ndarray],
    swapped: np.ndarray,
) -> List[np.ndarray]:
    """Действия всех агентов; каждая сторона считает политику только на своих экземплярах"""
    n = len(swapped)
    actions = [np.zeros((n, k)) for k in setup.action_dims]
    for team in range(setup.n_teams):
        members = setup.team_members(team)
        a_rows = ~swapped if team == 0 else swapped
        for side, rows in ((learners_a[team], a_rows), (learners_b[team], ~a_rows)):
            if not rows.any():
                continue
            sliced = {i: observations[i][rows] for i in members}
            for i, act in zip(members, _team_actions(side, sliced, members)):
                actions[i][rows] = act
    return actions


def play_episodes(
    learners_a: Sequence[TeamLearner],
    learners_b: Sequence[TeamLearner],
    setup: EnvSetup,
    seed: int,
    instance_ids: Sequence[int],
    swapped: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, EnvState]:
    """
    Пакет детерминированных эпизодов до завершения всех экземпляров

    Без перестановки команду 0 ведёт A, команду 1 ведёт B. В переставленных
    экземплярах наоборот, а расстановка повёрнута на пол-оборота вокруг центра
    арены: каждая сторона стартует из положения соперника в парном экземпляре.

    Returns:
        Исходы (индекс победившей команды или TIE), суммарные награды
        команд (n, n_teams) и конечное состояние
    """
    swapped = np.asarray(swapped, dtype=bool)
    state, observations = reset(setup, seed, instance_ids=instance_ids)
    if swapped.any():
        state, observations = mirror_instances(state, swapped)
    returns = np.zeros((state.num_instances, setup.n_teams))

    while not np.all(state.done):
        actions = _controlled_actions(learners_a, learners_b, setup, observations, swapped)
        result = step(state, actions)
        returns += result.rewards
        state, observations = result.state, result.observations

    outcomes = np.array([episode_outcome(state.elimination.L[i]) for i in range(state.num_instances)])
    return outcomes, returns, state


def _side_results(outcomes: np.ndarray, swapped: np.ndarray) -> Tuple[int, int, int]:
    a_team = np.where(swapped, 1, 0)
    ties = int(np.sum(outcomes == TIE))
    wins = int(np.sum((outcomes != TIE) & (outcomes == a_team)))
    losses = len(outcomes) - ties - wins
    return wins, losses, ties


def run_tournament(
    learners_a: Sequence[TeamLearner],
    learners_b: Sequence[TeamLearner],
    setup: EnvSetup,
    n_instances: int,
    seed: int,
    mirror: bool = False,
    opponent: str = "",
    workers: Optional[int] = None,
) -> WinRateReport:
    """
    Турнир A против B на n_instances независимых эпизодах

    Args:
        learners_a: Стороны A (по номерам команд)
        learners_b: Стороны B
        setup: Состязательная задача
        n_instances: Число эпизодов
        seed: Базовое зерно; экземпляр получает своё производное зерно
        mirror: Парные экземпляры: общее зерно расстановки, стороны переставлены, сцена повёрнута
        opponent: Метка соперника для отчёта
        workers: Потоки; по умолчанию HARL_ARENA_THREADS

    Returns:
        WinRateReport с точки зрения A
    """
    if setup.task not in ADVERSARIAL_TASKS:
        raise ConfigError(f"Турнир возможен только в состязательной задаче, получена {setup.task.value}")
    if n_instances < 1:
        raise ConfigError(f"Число экземпляров турнира должно быть >= 1: {n_instances}")
    check_compatible(learners_a, setup)
    check_compatible(learners_b, setup)

    index = np.arange(n_instances)
    instance_ids = index // 2 if mirror else index
    swapped = (index % 2 == 1) if mirror else np.zeros(n_instances, dtype=bool)

    def play(chunk: np.ndarray) -> np.ndarray:
        outcomes, _, _ = play_episodes(learners_a, learners_b, setup, seed, instance_ids[chunk], swapped[chunk])
        return outcomes

    outcomes = np.concatenate(map_chunks(play, n_instances, workers))

    wins, losses, ties = _side_results(outcomes, swapped)
    report = WinRateReport(wins, losses, ties, n_instances, opponent)
    logger.info(f"Турнир {setup.task.value}: {report.summary()}")
    return report


def record_episode(
    learners_a: Sequence[TeamLearner],
    learners_b: Sequence[TeamLearner],
    setup: EnvSetup,
    seed: int,
    path: Union[str, Path],
) -> Path:
    """Записывает экземпляр 0 турнира (A за команду 0) в двоичный журнал траектории"""
    check_compatible(learners_a, setup)
    check_compatible(learners_b, setup)
    state, observations = reset(setup, seed, instance_ids=[0])
    members = [setup.team_members(t) for t in range(setup.n_teams)]
    path = Path(path)
    with TrajectoryWriter(path, setup, seed) as writer:
        while not state.done[0]:
            actions: List[Optional[np.ndarray]] = [None] * setup.n_agents
            for team in range(setup.n_teams):
                side = (learners_a if team == 0 else learners_b)[team]
                for i, a in zip(members[team], _team_actions(side, observations, members[team])):
                    actions[i] = a
            result = step(state, actions)
            writer.write_step([a[0] for a in actions], result.rewards[0], bool(result.dones[0]))
            state, observations = result.state, result.observations
    return path
