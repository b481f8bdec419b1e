"""
Готовые составы команд
"""

from typing import Callable, Dict, Tuple

from physics2d import ActuationLimits, BodyKind
from utils.errors import ConfigError
from .specs import AgentSpec, TaskKind, TeamSpec


def walker(agent_id: int) -> AgentSpec:
    """Голономный диск"""
    return AgentSpec(agent_id, BodyKind.HOLONOMIC, radius=0.3, mass=2.0, role="walker")


def rover(agent_id: int) -> AgentSpec:
    """Тяжелее и шире шагохода, управляется тягой колёс"""
    return AgentSpec(
        agent_id, BodyKind.DIFFERENTIAL_DRIVE, radius=0.35, mass=3.0,
        limits=ActuationLimits(max_force=8.0, max_torque=4.0, axle_width=0.5), role="rover",
    )


def tank(agent_id: int) -> AgentSpec:
    return AgentSpec(
        agent_id, BodyKind.DIFFERENTIAL_DRIVE, radius=0.4, mass=4.0,
        limits=ActuationLimits(max_force=8.0, max_torque=6.0, axle_width=0.6), role="tank",
    )


def drone(agent_id: int) -> AgentSpec:
    return AgentSpec(
        agent_id, BodyKind.HOLONOMIC, radius=0.25, mass=1.0, flying=True,
        limits=ActuationLimits(max_force=6.0, max_lift=6.0), role="drone",
    )


ROLES: Dict[str, Callable[[int], AgentSpec]] = {
    "walker": walker,
    "rover": rover,
    "tank": tank,
    "drone": drone,
}


def _teams(*rosters) -> Tuple[TeamSpec, ...]:
    teams, next_id = [], 0
    for team_id, roles in enumerate(rosters):
        agents = []
        for role in roles:
            agents.append(ROLES[role](next_id))
            next_id += 1
        teams.append(TeamSpec(team_id, tuple(agents)))
    return tuple(teams)


PRESETS: Dict[str, Tuple[TaskKind, Tuple[Tuple[str, ...], ...]]] = {
    "walk_single": (TaskKind.WALK_TO_POINT, (("walker",),)),
    "sumo_1v1": (TaskKind.SUMO, (("walker",), ("walker",))),
    "sumo_2v2_hetero": (TaskKind.SUMO, (("walker", "rover"), ("walker", "rover"))),
    "laser_tag_2v2": (TaskKind.LASER_TAG, (("tank", "tank"), ("drone", "drone"))),
}


def team_preset(name: str) -> Tuple[TaskKind, Tuple[TeamSpec, ...]]:
    """Задача по умолчанию и команды именованного состава"""
    if name not in PRESETS:
        raise ConfigError(f"Неизвестный состав команд '{name}'; доступны: {sorted(PRESETS)}")
    task, rosters = PRESETS[name]
    return task, _teams(*rosters)


def teams_from_roles(rosters) -> Tuple[TeamSpec, ...]:
    """Команды по спискам ролей, например [["walker"], ["rover"]]"""
    for roles in rosters:
        for role in roles:
            if role not in ROLES:
                raise ConfigError(f"Неизвестная роль агента '{role}'; доступны: {sorted(ROLES)}")
    return _teams(*rosters)
