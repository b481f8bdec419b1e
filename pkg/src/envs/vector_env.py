"""
Пакет экземпляров среды с автосбросом и учётом эпизодов
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from utils.errors import NumericError
from .arena import EnvSetup, EnvState, reset, reset_instances, step
from .observation import observe
from .specs import TaskKind

TIE = -1


def episode_outcome(L: np.ndarray) -> int:
    """
    Победитель по флагам выбывания команд

    Побеждает единственная невыбывшая команда, если кто-то выбыл;
    одновременное выбывание и тайм-аут без выбываний - ничья.
    """
    L = np.asarray(L, dtype=bool)
    survivors = np.flatnonzero(~L)
    if L.any() and len(survivors) == 1:
        return int(survivors[0])
    return TIE


@dataclass
class EpisodeStats:
    """Итог одного завершённого эпизода"""

    instance: int
    length: int
    returns: np.ndarray       # по командам
    reach_rate: float
    block_out_rate: float
    outcome: int
    timeout: bool


@dataclass
class VecStep:
    observations: List[np.ndarray]
    rewards: np.ndarray
    dones: np.ndarray
    info: Dict[str, np.ndarray]


class VecArena:
    """Набор N экземпляров одной задачи; завершённые экземпляры сразу перезапускаются"""

    def __init__(self, setup: EnvSetup, num_instances: int, seed: int):
        """
        Инициализация пакета

        Args:
            setup: Описание запуска
            num_instances: Число экземпляров N
            seed: Базовое зерно; экземпляр i использует (seed, i)
        """
        self.setup = setup
        self.seed = int(seed)
        self.state, self.observations = reset(setup, self.seed, num_instances)
        self.episode_returns = np.zeros((num_instances, setup.n_teams))
        self.completed: List[EpisodeStats] = []
        logger.debug(f"Пакет сред {setup.task.value}: N={num_instances}, зерно {self.seed}")

    @property
    def num_instances(self) -> int:
        return self.state.num_instances

    def step(self, actions: Sequence[np.ndarray]) -> VecStep:
        """Шаг всех экземпляров; наблюдения после автосброса уже относятся к новому эпизоду"""
        result = step(self.state, actions)
        self.episode_returns += result.rewards
        dones = result.dones
        state = result.state
        observations = result.observations

        if np.any(dones):
            self._record_episodes(state, dones)
            state, observations = reset_instances(state, dones)
            self.episode_returns[dones] = 0.0

        for i, obs in enumerate(observations):
            if not np.all(np.isfinite(obs)):
                bad = int(np.flatnonzero(~np.all(np.isfinite(obs), axis=1))[0])
                raise NumericError(f"Нечисловое наблюдение агента {i} в экземпляре {bad}")

        self.state = state
        self.observations = observations
        return VecStep(observations, result.rewards, dones, result.info)

    def _record_episodes(self, state: EnvState, dones: np.ndarray) -> None:
        blocks = self.setup.task == TaskKind.BLOCK_PUSH
        for i in np.flatnonzero(dones):
            self.completed.append(EpisodeStats(
                instance=int(i),
                length=int(state.step[i]),
                returns=self.episode_returns[i].copy(),
                reach_rate=float(np.mean(state.reached[i])),
                block_out_rate=float(np.mean(state.block_out[i])) if blocks else 0.0,
                outcome=episode_outcome(state.elimination.L[i]),
                timeout=bool(state.elimination.timeout[i]),
            ))

    def drain_episodes(self) -> List[EpisodeStats]:
        """Забрать завершённые с прошлого вызова эпизоды"""
        episodes, self.completed = self.completed, []
        return episodes

    def get_state(self) -> Dict[str, Any]:
        """Снимок пакета для контрольной точки"""
        arrays = self.state.to_arrays()
        arrays["episode_returns"] = self.episode_returns.copy()
        return {"arrays": arrays, "rng_states": self.state.rng_states(), "seed": self.seed}

    def set_state(self, snapshot: Dict[str, Any], setup: Optional[EnvSetup] = None) -> None:
        """Восстановить пакет из снимка get_state"""
        if setup is not None:
            self.setup = setup
        arrays = dict(snapshot["arrays"])
        self.episode_returns = np.array(arrays.pop("episode_returns"), dtype=np.float64)
        self.seed = int(snapshot["seed"])
        self.state = EnvState.from_arrays(self.setup, arrays, snapshot["rng_states"])
        self.observations = observe(self.state)
        self.completed = []
