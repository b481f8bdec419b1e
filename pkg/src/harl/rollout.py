"""
Сбор on-policy переходов всеми командами одновременно
"""

from typing import List, Sequence

import numpy as np

from envs import VecArena
from utils.errors import NumericError
from .buffer import RolloutBuffer
from .learner import TeamLearner


def critic_inputs(learners: Sequence[TeamLearner], observations: Sequence[np.ndarray],
                  agent_team: np.ndarray, shared_critic: bool) -> List[np.ndarray]:
    """Вход критика каждой команды: наблюдения своей команды или всех агентов при общем критике"""
    inputs = []
    for learner in learners:
        members = range(len(observations)) if shared_critic else np.flatnonzero(agent_team == learner.team_id)
        inputs.append(np.concatenate([observations[i] for i in members], axis=-1))
    return inputs


def team_values(learners: Sequence[TeamLearner], observations: Sequence[np.ndarray],
                agent_team: np.ndarray, shared_critic: bool) -> np.ndarray:
    """Оценки ценности (N, n_teams); при общем критике все команды читают критик команды 0"""
    inputs = critic_inputs(learners, observations, agent_team, shared_critic)
    if shared_critic:
        v = learners[0].value(inputs[0])
        return np.stack([v] * len(learners), axis=-1)
    return np.stack([l.value(x) for l, x in zip(learners, inputs)], axis=-1)


def collect_rollouts(learners: Sequence[TeamLearner], venv: VecArena, horizon: int,
                     shared_critic: bool = False) -> RolloutBuffer:
    """
    Горизонт T шагов во всех экземплярах пакета

    Каждый агент сэмплирует из своей политики генератором своей команды;
    завершённые экземпляры перезапускаются пакетом. Параметры сторон не меняются.
    """
    setup = venv.setup
    agent_team = setup.agent_team
    buffer = RolloutBuffer.allocate(horizon, venv.num_instances, setup.obs_dims, setup.action_dims,
                                    agent_team, setup.n_teams)
    members = [setup.team_members(t) for t in range(setup.n_teams)]

    for t in range(horizon):
        observations = venv.observations
        for i, obs in enumerate(observations):
            if not np.all(np.isfinite(obs)):
                bad = int(np.flatnonzero(~np.all(np.isfinite(obs), axis=1))[0])
                raise NumericError(f"Нечисловое наблюдение агента {i} в экземпляре {bad}")

        actions: List[np.ndarray] = [None] * setup.n_agents
        for learner in learners:
            team_obs = [observations[i] for i in members[learner.team_id]]
            acts, log_probs = learner.act(team_obs)
            for i, a, lp in zip(members[learner.team_id], acts, log_probs):
                actions[i] = a
                buffer.actions[i][t] = a
                buffer.log_probs[i][t] = lp
        for i, obs in enumerate(observations):
            buffer.observations[i][t] = obs
        buffer.alive[t] = ~venv.state.elimination.eliminated
        buffer.values[t] = team_values(learners, observations, agent_team, shared_critic)

        result = venv.step(actions)
        buffer.rewards[t] = result.rewards
        buffer.dones[t] = result.dones

    buffer.bootstrap = team_values(learners, venv.observations, agent_team, shared_critic)
    return buffer
