"""
Признаки наблюдения агентов и сборка вектора с нулевым буфером
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np

from curriculum.layout import ObservationLayout, pad_observation
from utils.errors import ConfigError
from .specs import AgentSpec, TaskKind, TeamSpec

# Относительная позиция (2), относительная скорость (2), высота (1)
OTHER_WIDTH = 5


def _split_others(agent: AgentSpec, teams: Sequence[TeamSpec]) -> Tuple[List[AgentSpec], List[AgentSpec]]:
    own_team = None
    for team in teams:
        if any(a.agent_id == agent.agent_id for a in team.agents):
            own_team = team
    if own_team is None:
        raise ConfigError(f"Агент {agent.agent_id} не входит ни в одну команду")
    mates = [a for a in own_team.agents if a.agent_id != agent.agent_id]
    opponents = [a for t in teams if t is not own_team for a in t.agents]
    return mates, opponents


def task_feature_slots(task: TaskKind, agent: AgentSpec, teams: Sequence[TeamSpec]) -> List[Tuple[str, int]]:
    """Признаки, которые задача сообщает агенту, в порядке объявления"""
    task = TaskKind(task)
    mates, opponents = _split_others(agent, teams)
    others = [(f"teammate_{k}", OTHER_WIDTH) for k in range(len(mates))]
    others += [(f"opponent_{k}", OTHER_WIDTH) for k in range(len(opponents))]

    slots = [("own_velocity", 2), ("heading", 2)]
    if task == TaskKind.WALK_TO_POINT:
        slots += [("goal_rel", 2)]
    elif task == TaskKind.BLOCK_PUSH:
        slots += [("block_rel", 2), ("ring_radius", 1), ("center_dist", 1)]
    elif task == TaskKind.SUMO:
        slots += [("ring_radius", 1), ("center_dist", 1)] + others
    else:
        slots += [("own_altitude", 1), ("goal_rel", 2)] + others
    return slots


def _relative(state, i: int, j: int) -> np.ndarray:
    bodies = state.bodies
    return np.concatenate([
        bodies.position[:, j] - bodies.position[:, i],
        bodies.velocity[:, j] - bodies.velocity[:, i],
        bodies.altitude[:, j:j + 1],
    ], axis=-1)


def compute_features(state, agent: int) -> Dict[str, np.ndarray]:
    """Значения признаков задачи для агента с глобальным индексом agent, формы (N, width)"""
    setup = state.setup
    bodies = state.bodies
    spec = setup.agents[agent]
    pos = bodies.position[:, agent]
    n = bodies.num_instances

    values = {
        "own_velocity": bodies.velocity[:, agent],
        "heading": np.stack([np.sin(bodies.heading[:, agent]), np.cos(bodies.heading[:, agent])], axis=-1),
        "goal_rel": state.goals[:, agent] - pos,
        "own_altitude": bodies.altitude[:, agent:agent + 1],
        "ring_radius": np.full((n, 1), setup.env.ring_radius),
        "center_dist": np.hypot(pos[:, 0], pos[:, 1])[:, None],
    }
    if setup.n_blocks:
        values["block_rel"] = bodies.position[:, setup.n_agents + agent] - pos

    index = {a.agent_id: k for k, a in enumerate(setup.agents)}
    mates, opponents = _split_others(spec, setup.teams)
    for k, other in enumerate(mates):
        values[f"teammate_{k}"] = _relative(state, agent, index[other.agent_id])
    for k, other in enumerate(opponents):
        values[f"opponent_{k}"] = _relative(state, agent, index[other.agent_id])

    wanted = dict(task_feature_slots(setup.task, spec, setup.teams))
    return {name: values[name] for name in wanted}


def build_observation(state, agent: int, layout: ObservationLayout) -> np.ndarray:
    """
    Наблюдение агента (N, total_width)

    Активные на стадии слоты, объект которых в текущей задаче отсутствует
    (например, цель в сумо), заполняются явными нулями.
    """
    stage = state.setup.stage
    features = compute_features(state, agent)
    active = layout.active_slots(stage)
    active_names = {s.name for s in active}
    for name in features:
        if name not in active_names:
            raise ConfigError(
                f"Раскладка агента {agent} не содержит активного на стадии {stage} слота '{name}'"
            )
    n = state.bodies.num_instances
    full = {s.name: features.get(s.name, np.zeros((n, s.width))) for s in active}
    return pad_observation(full, layout, stage, batch_shape=(n,))


def observe(state) -> List[np.ndarray]:
    """Наблюдения всех агентов по их раскладкам"""
    return [build_observation(state, i, layout) for i, layout in enumerate(state.setup.layouts)]
