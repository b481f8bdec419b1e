"""
Тесты сред: сброс, шаг, награды стадий, наблюдения и пакет экземпляров
"""

import sys
import os
import numpy as np
import pytest

# Добавляем путь к модулям проекта
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from envs import (
    TIE,
    EliminationStatus,
    EnvConfig,
    EnvSetup,
    RewardConfig,
    TaskKind,
    TrajectoryWriter,
    VecArena,
    compute_features,
    episode_outcome,
    observe,
    read_trajectory,
    reset,
    reward_block_push,
    reward_laser_tag,
    reward_sumo,
    reward_walk_to_point,
    step,
    team_preset,
    teams_from_roles,
)
from curriculum import BUFFER_SLOT, CurriculumPlan, make_layouts
from utils.errors import CheckpointError, ConfigError, ContractError, ShapeError

NO_SHAPING = RewardConfig(shaping=())


def _setup(preset, task=None, **kwargs):
    default_task, teams = team_preset(preset)
    return EnvSetup(teams=teams, task=task or default_task, **kwargs)


def _zeros(setup, n=1):
    return [np.zeros((n, k)) for k in setup.action_dims]


# --- сброс ---

def test_reset_is_deterministic():
    setup = _setup("sumo_2v2_hetero")
    first, _ = reset(setup, seed=5, num_instances=3)
    second, _ = reset(setup, seed=5, num_instances=3)
    for key, value in first.to_arrays().items():
        assert np.array_equal(value, second.to_arrays()[key]), key


def test_reset_instance_ids_do_not_depend_on_batch():
    setup = _setup("sumo_1v1")
    batch, _ = reset(setup, seed=9, num_instances=4)
    alone, _ = reset(setup, seed=9, instance_ids=[2])
    assert np.array_equal(alone.bodies.position[0], batch.bodies.position[2])


def test_sumo_spawn_inside_ring_and_in_own_half():
    """10^4 экземпляров: все агенты строго внутри ринга, команды в своих полукругах"""
    setup = _setup("sumo_1v1")
    state, _ = reset(setup, seed=0, num_instances=10_000)
    pos = state.bodies.position
    assert np.all(np.hypot(pos[..., 0], pos[..., 1]) < setup.env.ring_radius)
    assert np.all(pos[:, 0, 0] <= 0.0)
    assert np.all(pos[:, 1, 0] >= 0.0)


def test_walk_goal_distance_band():
    setup = _setup("walk_single")
    state, _ = reset(setup, seed=1, num_instances=10_000)
    d = np.linalg.norm(state.goals[:, 0] - state.bodies.position[:, 0], axis=-1)
    assert np.all(d >= setup.env.goal_distance_min - 1e-12)
    assert np.all(d <= setup.env.goal_distance_max + 1e-12)


def test_spec_task_mismatch():
    _, teams = team_preset("walk_single")
    with pytest.raises(ConfigError):
        EnvSetup(teams=teams, task=TaskKind.SUMO)
    with pytest.raises(ConfigError):
        EnvSetup(teams=teams_from_roles([["walker"], ["drone"]]), task=TaskKind.LASER_TAG)


def test_unknown_preset_and_role():
    with pytest.raises(ConfigError):
        team_preset("soccer")
    with pytest.raises(ConfigError):
        teams_from_roles([["walker", "ballerina"]])


def test_preset_action_dims():
    assert _setup("sumo_2v2_hetero").action_dims == [2, 2, 2, 2]
    assert _setup("laser_tag_2v2").action_dims == [2, 2, 3, 3]


# --- шаг ---

def test_zero_actions_walk_drifts_with_drag():
    setup = _setup("walk_single")
    state, _ = reset(setup, seed=2)
    state.bodies.velocity[0, 0] = [0.3, -0.2]
    p0, v0 = state.bodies.position[0, 0].copy(), state.bodies.velocity[0, 0].copy()
    dt, drag = setup.physics.dt, setup.physics.drag

    result = step(state, _zeros(setup))
    v1 = v0 + (0.0 - drag * v0) * dt
    np.testing.assert_allclose(result.state.bodies.velocity[0, 0], v1, rtol=0, atol=1e-15)
    np.testing.assert_allclose(result.state.bodies.position[0, 0], p0 + v1 * dt, rtol=0, atol=1e-15)
    # Исходное состояние не меняется
    assert np.array_equal(state.bodies.position[0, 0], p0)


def test_timeout_step_in_sumo():
    """Последний шаг окна без выбываний: done, phi=1, обе команды получают -kappa"""
    setup = _setup("sumo_1v1", env=EnvConfig(max_episode_len=5))
    state, _ = reset(setup, seed=3)
    state.step[:] = 4
    result = step(state, _zeros(setup))
    assert result.dones[0]
    assert result.info["timeout"][0]
    assert not result.info["L"][0].any()
    np.testing.assert_array_equal(result.rewards[0], [-1.0, -1.0])


def test_sumo_ring_exit_decides_episode():
    setup = _setup("sumo_1v1")
    state, _ = reset(setup, seed=4)
    state.bodies.position[0] = [[3.99, 0.0], [-1.0, 0.0]]
    state.bodies.velocity[0] = [[3.0, 0.0], [0.0, 0.0]]
    result = step(state, _zeros(setup))
    assert result.dones[0]
    np.testing.assert_array_equal(result.info["L"][0], [True, False])
    np.testing.assert_array_equal(result.rewards[0], [-1.0, 1.0])
    assert episode_outcome(result.info["L"][0]) == 1


def test_sumo_non_terminal_step_has_zero_reward():
    setup = _setup("sumo_1v1")
    state, _ = reset(setup, seed=4)
    result = step(state, _zeros(setup))
    assert not result.dones[0]
    np.testing.assert_array_equal(result.rewards[0], [0.0, 0.0])


def test_action_arity_mismatch():
    setup = _setup("sumo_1v1")
    state, _ = reset(setup, seed=0)
    with pytest.raises(ShapeError):
        step(state, [np.zeros((1, 3)), np.zeros((1, 2))])
    with pytest.raises(ShapeError):
        step(state, [np.zeros((1, 2))])


def test_block_push_episode_matches_reward_oracle():
    """Сценарий прямого толкания: сумма наград против независимого пересчёта формулы"""
    setup = _setup("walk_single", task=TaskKind.BLOCK_PUSH, reward=NO_SHAPING)
    r_max = setup.env.ring_radius
    r_agent, r_block = setup.agents[0].radius, setup.env.block_radius
    dt, penalty, delta = setup.control_dt, setup.reward.step_penalty, setup.reward.delta

    state, _ = reset(setup, seed=6)
    total = oracle = 0.0
    finished = block_was_out = False
    for _ in range(setup.env.max_episode_len):
        gap = state.bodies.position[0, 1] - state.bodies.position[0, 0]
        result = step(state, [(gap / np.linalg.norm(gap))[None]])
        total += result.rewards[0, 0]

        agent, block = result.state.bodies.position[0]
        block_out_now = np.hypot(*block) > r_max and not block_was_out
        left_now = np.hypot(*agent) > r_max
        if not finished:
            d = max(np.hypot(*(block - agent)) - r_agent - r_block, 0.0)
            dense = (np.tanh(np.hypot(*block) / r_max) + 1.0 - np.tanh(d / r_max)) * dt
            oracle += dense + penalty + delta * (float(block_out_now) - float(left_now))
        block_was_out = block_was_out or block_out_now
        finished = finished or block_out_now or left_now
        state = result.state
        if result.dones[0]:
            break

    assert result.state.block_out[0, 0]
    assert abs(total - oracle) < 1e-9


def test_eliminated_agent_stays_put():
    setup = EnvSetup(teams=teams_from_roles([["walker", "walker"]]), task=TaskKind.BLOCK_PUSH)
    state, _ = reset(setup, seed=7)
    state.bodies.position[0, 0] = [4.5, 0.0]
    state.bodies.velocity[0, 0] = [1.0, 0.0]
    push = [np.ones((1, 2)), np.zeros((1, 2))]

    result = step(state, push)
    assert result.info["eliminated"][0, 0]
    parked = result.state.bodies.position[0, 0].copy()
    state = result.state
    for _ in range(10):
        result = step(state, push)
        state = result.state
        if result.dones[0]:
            break
        assert np.array_equal(state.bodies.position[0, 0], parked)


def test_laser_tag_drone_below_min_height_is_knocked_out():
    setup = EnvSetup(teams=teams_from_roles([["tank"], ["drone"]]), task=TaskKind.LASER_TAG)
    state, _ = reset(setup, seed=8)
    state.bodies.altitude[0, 1] = 0.5 * setup.env.min_height
    result = step(state, _zeros(setup))
    assert result.info["eliminated"][0, 1]
    assert result.dones[0]
    assert result.rewards[0, 0] == pytest.approx(setup.reward.knockout_reward + setup.reward.tank_step_penalty)
    assert result.rewards[0, 1] == pytest.approx(-1.0)


def test_laser_tag_ray_knockout():
    setup = EnvSetup(teams=teams_from_roles([["tank"], ["drone"]]), task=TaskKind.LASER_TAG)
    state, _ = reset(setup, seed=8)
    state.bodies.position[0] = [[-3.0, 0.0], [2.0, 0.1]]
    state.bodies.heading[0, 0] = 0.0
    state.bodies.altitude[0, 1] = 1.0
    assert step(state, _zeros(setup)).info["eliminated"][0, 1]

    # Над полосой лучей дрон неуязвим
    state.bodies.altitude[0, 1] = setup.env.ray_height + 0.5
    assert not step(state, _zeros(setup)).info["eliminated"][0, 1]


# --- формулы наград ---

def _walk_state(cfg):
    setup = _setup("walk_single", reward=cfg)
    state, _ = reset(setup, seed=0)
    return state


def test_walk_reward_at_goal():
    cfg = RewardConfig(shaping=(), delta=10.0, gamma_dist=1.0)
    state = _walk_state(cfg)
    state.goals[0, 0] = state.bodies.position[0, 0]
    state.events.reached_now[0, 0] = True
    assert reward_walk_to_point(state, 0, state.setup.reward)[0] == pytest.approx(11.0, abs=1e-12)


def test_walk_reward_far_away_saturates():
    state = _walk_state(NO_SHAPING)
    state.goals[0, 0] = state.bodies.position[0, 0] + [1e6, 0.0]
    assert reward_walk_to_point(state, 0, state.setup.reward)[0] == pytest.approx(0.0, abs=1e-12)


def test_walk_reward_at_unit_distance():
    cfg = RewardConfig(shaping=(), delta=0.0, gamma_dist=1.0, alpha=1.0)
    state = _walk_state(cfg)
    state.goals[0, 0] = state.bodies.position[0, 0] + [0.6, 0.8]
    assert reward_walk_to_point(state, 0, state.setup.reward)[0] == pytest.approx(0.23841, abs=1e-5)


def test_walk_velocity_shaping_term():
    cfg = RewardConfig(shaping=((0.1, "velocity_toward_goal"),), delta=0.0, gamma_dist=0.0)
    state = _walk_state(cfg)
    state.goals[0, 0] = state.bodies.position[0, 0] + [2.0, 0.0]
    state.bodies.velocity[0, 0] = [1.5, 7.0]
    assert reward_walk_to_point(state, 0, state.setup.reward)[0] == pytest.approx(0.15)


def _block_state():
    setup = _setup("walk_single", task=TaskKind.BLOCK_PUSH)
    state, _ = reset(setup, seed=0)
    return state


def test_block_push_reward_block_at_center_agent_touching():
    state = _block_state()
    cfg = state.setup.reward
    state.bodies.position[0] = [[0.7, 0.0], [0.0, 0.0]]
    assert reward_block_push(state, 0, cfg)[0] == pytest.approx(cfg.dt + cfg.step_penalty, abs=1e-12)


def test_block_push_reward_terms_cancel_at_ring_radius():
    state = _block_state()
    cfg = state.setup.reward
    r_max = state.setup.env.ring_radius
    state.bodies.position[0] = [[-(0.3 + 0.4), 0.0], [r_max, 0.0]]
    assert reward_block_push(state, 0, cfg)[0] == pytest.approx(cfg.dt + cfg.step_penalty, abs=1e-12)


def test_block_push_event_terms():
    state = _block_state()
    cfg = state.setup.reward
    state.bodies.position[0] = [[0.7, 0.0], [0.0, 0.0]]
    base = reward_block_push(state, 0, cfg)[0]

    state.events.block_out_now[0, 0] = True
    assert reward_block_push(state, 0, cfg)[0] == pytest.approx(base + cfg.delta)
    state.events.left_now[0, 0] = True
    assert reward_block_push(state, 0, cfg)[0] == pytest.approx(base)
    state.events.block_out_now[0, 0] = False
    assert reward_block_push(state, 0, cfg)[0] == pytest.approx(base - cfg.delta)


def test_block_push_reward_is_zero_for_finished_agent():
    state = _block_state()
    state.events.active_before[0, 0] = False
    assert reward_block_push(state, 0, state.setup.reward)[0] == 0.0


def _elim(L, tie=False, timeout=False):
    L = np.atleast_2d(np.asarray(L, dtype=bool))
    n = L.shape[0]
    return EliminationStatus(L, np.full(n, tie), np.full(n, timeout), np.zeros((n, 2), dtype=bool))


def test_sumo_reward_win():
    cfg = RewardConfig()
    assert reward_sumo(_elim([False, True]), 0, cfg)[0] == 1.0
    assert reward_sumo(_elim([False, True]), 1, cfg)[0] == -1.0


def test_sumo_reward_simultaneous_elimination_is_tie():
    cfg = RewardConfig()
    elim = _elim([True, True], tie=True)
    assert reward_sumo(elim, 0, cfg)[0] == 0.0
    assert reward_sumo(elim, 1, cfg)[0] == 0.0


def test_sumo_reward_timeout():
    cfg = RewardConfig(kappa=1.0)
    elim = _elim([False, False], timeout=True)
    assert reward_sumo(elim, 0, cfg)[0] == -1.0
    assert reward_sumo(elim, 1, cfg)[0] == -1.0


def test_sumo_reward_antisymmetry():
    """10^4 случайных состояний без ничьих и тайм-аутов: R0 = -R1 точно"""
    rng = np.random.default_rng(15)
    cfg = RewardConfig(kappa=2.5)
    elim = _elim(rng.random((10_000, 2)) < 0.5)
    assert np.array_equal(reward_sumo(elim, 0, cfg), -reward_sumo(elim, 1, cfg))


def test_sumo_reward_rejects_third_team():
    with pytest.raises(ContractError):
        reward_sumo(_elim([False, True]), 2, RewardConfig())


def test_laser_tag_rewards():
    setup = EnvSetup(teams=teams_from_roles([["tank"], ["drone"]]), task=TaskKind.LASER_TAG)
    state, _ = reset(setup, seed=0)
    cfg = setup.reward
    state.bodies.position[0, 1] = state.goals[0, 1]
    assert reward_laser_tag(state, 1, cfg)[0] == pytest.approx(1.0)
    assert reward_laser_tag(state, 0, cfg)[0] == pytest.approx(cfg.tank_step_penalty)

    state.events.knocked_now[0, 1] = True
    state.elimination.eliminated[0, 1] = True
    assert reward_laser_tag(state, 0, cfg)[0] == pytest.approx(1.0 + cfg.tank_step_penalty)
    assert reward_laser_tag(state, 1, cfg)[0] == pytest.approx(-1.0)


def test_reward_called_in_wrong_task():
    state = _block_state()
    with pytest.raises(ContractError):
        reward_walk_to_point(state, 0, state.setup.reward)


# --- наблюдения ---

def _curriculum_setup(stage, task, width=50):
    _, teams = team_preset("sumo_1v1")
    layouts = make_layouts(CurriculumPlan.sumo(width), teams)
    return EnvSetup(teams=teams, task=task, layouts=layouts, stage=stage)


def test_stage_one_observation_zeroes_opponents_and_buffer():
    setup = _curriculum_setup(0, TaskKind.WALK_TO_POINT)
    state, observations = reset(setup, seed=0, num_instances=5)
    layout = setup.layouts[0]
    for name in ("opponent_0", BUFFER_SLOT, "block_rel", "center_dist"):
        slot = layout.slot(name)
        assert np.all(observations[0][:, slot.offset:slot.offset + slot.width] == 0.0)
    goal = layout.slot("goal_rel")
    np.testing.assert_array_equal(observations[0][:, goal.offset:goal.offset + 2],
                                  state.goals[:, 0] - state.bodies.position[:, 0])


def test_observation_width_is_constant_across_stages():
    widths = [_curriculum_setup(s, t).obs_dims
              for s, t in enumerate((TaskKind.WALK_TO_POINT, TaskKind.BLOCK_PUSH, TaskKind.SUMO))]
    assert widths[0] == widths[1] == widths[2]


def test_sumo_stage_observation_zeroes_absent_goal():
    setup = _curriculum_setup(2, TaskKind.SUMO)
    _, observations = reset(setup, seed=0, num_instances=3)
    layout = setup.layouts[0]
    for name in ("goal_rel", "block_rel", BUFFER_SLOT):
        slot = layout.slot(name)
        assert np.all(observations[0][:, slot.offset:slot.offset + slot.width] == 0.0)
    assert np.any(observations[0][:, layout.slot("opponent_0").offset] != 0.0)


def test_center_distance_is_zero_at_center():
    setup = _setup("sumo_1v1")
    state, _ = reset(setup, seed=0)
    state.bodies.position[0, 0] = [0.0, 0.0]
    assert compute_features(state, 0)["center_dist"][0, 0] == 0.0


def test_observation_is_translation_invariant():
    """Сдвиг всех тел и целей на постоянный вектор не меняет наблюдения"""
    setup = _setup("laser_tag_2v2")
    state, _ = reset(setup, seed=0)
    # Двоичные дроби: вычитание после сдвига точное
    state.bodies.position[0] = [[-4.0, 0.5], [-3.5, -1.25], [2.0, 0.75], [3.25, -0.5]]
    state.goals[0] = [[0.0, 0.0], [0.0, 0.0], [-4.0, 2.5], [-3.5, 0.75]]
    before = observe(state)

    shift = np.array([1.5, -0.25])
    state.bodies.position[0] += shift
    state.goals[0] += shift
    after = observe(state)
    for a, b in zip(before, after):
        assert np.array_equal(a, b)


# --- пакет экземпляров и журнал ---

def test_vec_arena_autoreset_and_episode_stats():
    setup = _setup("walk_single", env=EnvConfig(max_episode_len=3))
    venv = VecArena(setup, num_instances=4, seed=0)
    for _ in range(3):
        out = venv.step(_zeros(setup, 4))
    assert np.all(out.dones)
    episodes = venv.drain_episodes()
    assert len(episodes) == 4
    assert all(e.length == 3 and e.timeout and e.outcome == TIE for e in episodes)
    assert venv.drain_episodes() == []
    assert np.all(venv.state.step == 0)


def test_vec_arena_state_round_trip():
    setup = _setup("sumo_1v1", env=EnvConfig(max_episode_len=4))
    rng = np.random.default_rng(16)
    actions = [[rng.uniform(-1, 1, (3, 2)) for _ in range(2)] for _ in range(8)]

    venv = VecArena(setup, num_instances=3, seed=1)
    venv.step(actions[0])
    snapshot = venv.get_state()
    first = [venv.step(a).rewards for a in actions[1:]]

    venv.set_state(snapshot)
    second = [venv.step(a).rewards for a in actions[1:]]
    for a, b in zip(first, second):
        assert np.array_equal(a, b)


def test_episode_outcome():
    assert episode_outcome([True, False]) == 1
    assert episode_outcome([False, True]) == 0
    assert episode_outcome([True, True]) == TIE
    assert episode_outcome([False, False]) == TIE


def test_trajectory_log(tmp_path):
    setup = _setup("sumo_1v1")
    path = tmp_path / "episode.traj"
    with TrajectoryWriter(path, setup, seed=3) as writer:
        writer.write_step([np.array([0.5, -0.5]), np.array([0.0, 1.0])], np.array([0.0, 0.0]), False)
        writer.write_step([np.array([1.0, 1.0]), np.array([-1.0, 0.0])], np.array([1.0, -1.0]), True)

    traj = read_trajectory(path)
    assert len(traj) == 2 and traj.seed == 3
    assert traj.header["spec_hash"] == setup.spec_hash()
    np.testing.assert_array_equal(traj.actions[1][0], [1.0, 1.0])
    np.testing.assert_array_equal(traj.rewards[1], [1.0, -1.0])
    assert list(traj.dones) == [False, True]
    assert traj.setup.spec_hash() == setup.spec_hash()

    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(CheckpointError):
        read_trajectory(path)


def test_trajectory_writer_checks_action_length(tmp_path):
    setup = _setup("sumo_1v1")
    with TrajectoryWriter(tmp_path / "bad.traj", setup, seed=0) as writer:
        with pytest.raises(ShapeError):
            writer.write_step([np.zeros(3), np.zeros(2)], np.zeros(2), False)


if __name__ == "__main__":
    pytest.main([__file__])
