"""
Функции наград стадий учебного плана и лазертага
"""

import numpy as np

from utils.errors import ContractError
from .specs import EliminationStatus, RewardConfig, TaskKind


def _require_task(state, task: TaskKind) -> None:
    if state.setup.task != task:
        raise ContractError(f"Награда для {task.value} вызвана в задаче {state.setup.task.value}")


def reward_walk_to_point(state, agent: int, cfg: RewardConfig) -> np.ndarray:
    """
    Стадия 1: R = sum(W_i) + delta * 1_reached + gamma * (1 - tanh(alpha * d))

    Члены формирования: скорость в сторону цели и штраф за величину действия.
    """
    _require_task(state, TaskKind.WALK_TO_POINT)
    bodies = state.bodies
    to_goal = state.goals[:, agent] - bodies.position[:, agent]
    d = np.hypot(to_goal[:, 0], to_goal[:, 1])

    shaping = np.zeros_like(d)
    for weight, tag in cfg.shaping:
        if tag == "velocity_toward_goal":
            direction = to_goal / np.maximum(d, 1e-9)[:, None]
            term = np.sum(bodies.velocity[:, agent] * direction, axis=-1)
        else:
            term = np.sum(state.last_actions[agent] ** 2, axis=-1)
        shaping = shaping + weight * term

    reached = state.events.reached_now[:, agent].astype(np.float64)
    return shaping + cfg.delta * reached + cfg.gamma_dist * (1.0 - np.tanh(cfg.alpha * d))


def reward_block_push(state, agent: int, cfg: RewardConfig) -> np.ndarray:
    """
    Стадия 2: R = (r_hat + d_hat) * dt + T + delta * (1_push_out - 1_left_ring)

    r_hat = tanh(r / r_max), r - удаление блока агента от центра;
    d_hat = 1 - tanh(d / r_max), d - зазор между агентом и его блоком.
    Агент, закончивший эпизод раньше, получает 0.
    """
    _require_task(state, TaskKind.BLOCK_PUSH)
    setup = state.setup
    arena = setup.arena
    bodies = state.bodies
    block = setup.n_agents + agent
    r_max = arena.r_max
    dt = cfg.dt if cfg.dt is not None else setup.control_dt

    block_pos = bodies.position[:, block]
    r_t = np.hypot(block_pos[:, 0], block_pos[:, 1])
    gap = block_pos - bodies.position[:, agent]
    d_t = np.maximum(np.hypot(gap[:, 0], gap[:, 1]) - bodies.radius[agent] - bodies.radius[block], 0.0)

    events = state.events
    event = events.block_out_now[:, agent].astype(np.float64) - events.left_now[:, agent].astype(np.float64)
    value = (np.tanh(r_t / r_max) + 1.0 - np.tanh(d_t / r_max)) * dt + cfg.step_penalty + cfg.delta * event
    return np.where(events.active_before[:, agent], value, 0.0)


def reward_sumo(elim: EliminationStatus, team_i: int, cfg: RewardConfig) -> np.ndarray:
    """Стадия 3: R_i = tau * (L_j - L_i - phi) * kappa"""
    if team_i not in (0, 1) or elim.L.shape[-1] != 2:
        raise ContractError(f"Награда сумо определена для двух команд, запрошена команда {team_i}")
    L = elim.L.astype(np.float64)
    phi = elim.timeout.astype(np.float64)
    return elim.tau * (L[..., 1 - team_i] - L[..., team_i] - phi) * cfg.kappa


def reward_laser_tag(state, team_i: int, cfg: RewardConfig) -> np.ndarray:
    """
    Танки (команда 0): +knockout_reward за каждого сбитого дрона и штраф за шаг.
    Дроны (команда 1): среднее по дронам exp(-расстояние до цели) у живых
    и -1 за собственное выбывание на этом шаге.
    """
    _require_task(state, TaskKind.LASER_TAG)
    if team_i not in (0, 1):
        raise ContractError(f"В лазертаге две команды, запрошена команда {team_i}")
    setup = state.setup
    drones = setup.team_members(1)
    knocked = state.events.knocked_now[:, drones]

    if team_i == 0:
        return cfg.knockout_reward * knocked.sum(axis=1) + cfg.tank_step_penalty

    bodies = state.bodies
    alive = ~state.elimination.eliminated[:, drones]
    to_goal = state.goals[:, drones] - bodies.position[:, drones]
    dist = np.hypot(to_goal[..., 0], to_goal[..., 1])
    per_drone = np.where(alive, np.exp(-dist), 0.0) - knocked.astype(np.float64)
    return per_drone.mean(axis=1)


def team_rewards(state) -> np.ndarray:
    """Награды команд (N, n_teams); в неадверсариальных задачах - среднее по участникам"""
    setup = state.setup
    cfg = setup.reward
    n = state.bodies.num_instances
    out = np.zeros((n, setup.n_teams))

    if setup.task == TaskKind.SUMO:
        for team in range(setup.n_teams):
            out[:, team] = reward_sumo(state.elimination, team, cfg)
        return out
    if setup.task == TaskKind.LASER_TAG:
        for team in range(setup.n_teams):
            out[:, team] = reward_laser_tag(state, team, cfg)
        return out

    fn = reward_walk_to_point if setup.task == TaskKind.WALK_TO_POINT else reward_block_push
    for team in range(setup.n_teams):
        members = setup.team_members(team)
        out[:, team] = np.mean([fn(state, i, cfg) for i in members], axis=0)
    return out
