"""
Тесты оболочки обучения: файл запуска, контрольные точки, турниры, метрики, воспроизведение и CLI
"""

import sys
import os
import hashlib
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from envs import EnvConfig, EnvSetup, TaskKind, mirror_instances, reset, team_preset
from harl import TeamLearner, TrainingHistory
from numcore import MlpParams
from harness import (
    WinRateReport,
    checkpoint_from_bytes,
    checkpoint_to_bytes,
    default_run_config,
    export_metrics,
    load_checkpoint,
    load_metrics,
    load_run_config,
    map_chunks,
    record_episode,
    replay_trajectory,
    resume_training,
    run_tournament,
    save_checkpoint,
    save_run_config,
    train_curriculum,
)
from harness.pipeline import CurriculumTrainer
from harness.tournament import _controlled_actions
from harness.run_config import RunConfig
from utils.errors import CheckpointError, ConfigError, ContractError, ShapeError


def _setup(preset="sumo_1v1", max_len=100):
    task, teams = team_preset(preset)
    return EnvSetup(teams=teams, task=task, env=EnvConfig(max_episode_len=max_len))


def _learners(setup, seed=0):
    obs_dims, action_dims = setup.obs_dims, setup.action_dims
    learners = []
    for team in setup.teams:
        members = setup.team_members(team.team_id)
        learners.append(TeamLearner.create(
            team.team_id,
            [obs_dims[i] for i in members],
            [action_dims[i] for i in members],
            [(8,)] * len(members),
            None,
            seed,
        ))
    return learners


def _constant(learner, action):
    """Политики стороны выдают одно и то же действие при любом наблюдении"""
    for policy in learner.policies:
        policy.mlp = policy.mlp.zeros_like()
        policy.mlp.biases[-1][:] = action
    return learner


def _odd(setup, learners, seed):
    """
    Политики без смещений, видящие только свою скорость и положение и скорость
    соперника: поворот сцены на пол-оборота меняет знак их действий
    """
    rng = np.random.default_rng(seed)
    for learner in learners:
        for i, policy in zip(setup.team_members(learner.team_id), learner.policies):
            layout = setup.layouts[i]
            keep = np.zeros(layout.total_width, dtype=bool)
            velocity, opponent = layout.slot("own_velocity"), layout.slot("opponent_0")
            keep[velocity.offset:velocity.offset + 2] = True
            keep[opponent.offset:opponent.offset + 4] = True
            weights = [rng.normal(scale=2.0, size=w.shape) for w in policy.mlp.weights]
            weights[0][:, ~keep] = 0.0
            policy.mlp = MlpParams(weights, [np.zeros_like(b) for b in policy.mlp.biases], policy.mlp.activations)
    return learners


def _tiny_config(updates=2):
    config = default_run_config("sumo_1v1")
    return replace(
        config,
        env=replace(config.env, max_episode_len=20),
        training=replace(
            config.training, num_envs=2, horizon=8, total_updates=updates,
            eval_every=0, snapshot_every=0, eval_instances=4,
        ),
    )


def _same_learners(a, b):
    assert len(a) == len(b)
    for x, y in zip(a, b):
        for s, t in zip(x.parameter_tensors(), y.parameter_tensors()):
            assert np.array_equal(s, t)


# --- файл запуска ---

def test_unknown_key_names_its_path():
    base = {"task": "sumo", "teams": {"preset": "sumo_1v1"}}
    with pytest.raises(ConfigError, match="happo.clip_epsilon"):
        RunConfig.from_dict({**base, "happo": {"clip_epsilon": 0.1}})
    with pytest.raises(ConfigError, match="config.optimizer"):
        RunConfig.from_dict({**base, "optimizer": {}})
    with pytest.raises(ConfigError, match=r"curriculum.stages\[1\].gate"):
        RunConfig.from_dict({**base, "curriculum": {"stages": [{"task": "walk_to_point"}, {"task": "sumo", "gate": 1}]}})


def test_teams_section_needs_exactly_one_source():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"task": "sumo", "teams": {"preset": "sumo_1v1", "roles": [["walker"], ["walker"]]}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"task": "sumo", "teams": {"squad": "sumo_1v1"}})


def test_final_stage_must_match_task():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({
            "task": "sumo",
            "teams": {"preset": "sumo_1v1"},
            "curriculum": {"stages": [{"task": "walk_to_point"}]},
        })


def test_walk_stage_gate_defaults_from_its_rewards():
    config = RunConfig.from_dict({
        "task": "sumo",
        "teams": {"preset": "sumo_1v1"},
        "curriculum": {"stages": [{"task": "walk_to_point", "reward": {"delta": 4.0, "gamma_dist": 1.0}},
                                  {"task": "sumo"}]},
    })
    walk = config.plan.stages[0]
    assert walk.gate_metric == "mean_return"
    assert walk.gate_threshold == pytest.approx(4.0)
    assert config.plan.stages[1].gate_metric == "win_rate_t0"


def test_missing_and_invalid_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"task": "soccer", "teams": {"roles": [["walker"]]}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"teams": {"preset": "sumo_1v1"}, "training": {"num_envs": 0}})
    with pytest.raises(ConfigError):
        load_run_config("/nonexistent/run.yaml")


def test_run_config_yaml_round_trip(tmp_path):
    config = default_run_config("sumo_1v1", curriculum=True)
    save_run_config(config, tmp_path / "run.yaml")
    loaded = load_run_config(tmp_path / "run.yaml")
    assert loaded.hash() == config.hash()
    assert loaded.plan == config.plan
    assert loaded.teams == config.teams


def test_hash_tracks_overrides():
    config = default_run_config("sumo_1v1")
    assert config.hash() == default_run_config("sumo_1v1").hash()
    assert config.with_overrides(seed=5).hash() != config.hash()
    assert config.with_overrides() is config
    assert config.with_overrides(updates=7).training.total_updates == 7


def test_roles_section():
    config = RunConfig.from_dict({"task": "sumo", "teams": {"roles": [["walker", "rover"], ["walker", "rover"]]}})
    assert [len(t.agents) for t in config.teams] == [2, 2]
    assert config.plan.n_stages == 1
    assert config.plan.zero_buffer_width == 0


# --- контрольные точки ---

def test_checkpoint_save_load_save_is_byte_identical(tmp_path):
    trainer = CurriculumTrainer(_tiny_config(), tmp_path)
    first = checkpoint_to_bytes(trainer.checkpoint())
    path = tmp_path / "a.ckpt"
    path.write_bytes(first)
    loaded = load_checkpoint(path)
    assert checkpoint_to_bytes(loaded) == first
    _same_learners(loaded.learners, trainer.learners)
    assert loaded.layouts == trainer.layouts
    assert loaded.env_setup().spec_hash() == trainer.setup.spec_hash()


def test_checkpoint_rejects_corruption(tmp_path):
    data = checkpoint_to_bytes(CurriculumTrainer(_tiny_config(), tmp_path).checkpoint())

    flipped = bytearray(data)
    flipped[len(data) // 2] ^= 0xFF
    with pytest.raises(CheckpointError, match="SHA-256"):
        checkpoint_from_bytes(bytes(flipped))

    with pytest.raises(CheckpointError):
        checkpoint_from_bytes(data[:len(data) - 100])
    with pytest.raises(CheckpointError):
        checkpoint_from_bytes(data[:20])

    with pytest.raises(CheckpointError, match="сигнатура"):
        checkpoint_from_bytes(b"NOTACKPT" + data[8:])


def test_checkpoint_rejects_unknown_version(tmp_path):
    data = bytearray(checkpoint_to_bytes(CurriculumTrainer(_tiny_config(), tmp_path).checkpoint()))
    data[8:16] = np.asarray([99], dtype="<i8").tobytes()
    body = bytes(data[:-32])
    patched = body + hashlib.sha256(body).digest()
    with pytest.raises(CheckpointError, match="Версия"):
        checkpoint_from_bytes(patched)


def test_load_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "absent.ckpt")


# --- турниры ---

def test_stationary_beats_step_out():
    """Сторона B уводит своего агента за край ринга, сторона A стоит на месте"""
    setup = _setup(max_len=300)
    stay = [_constant(l, [0.0, 0.0]) for l in _learners(setup)]
    step_out = _learners(setup)
    # Команда 1 стартует в правом полукруге и уходит вправо, не встречая соперника
    _constant(step_out[1], [1.0, 0.0])

    report = run_tournament(stay, step_out, setup, n_instances=40, seed=11)
    assert report.wins == 40
    assert report.win_rate == 1.0
    assert report.losses == report.ties == 0


def test_mirror_rotates_swapped_instances():
    setup = _setup()
    state, observations = reset(setup, seed=4, num_instances=6)
    mask = np.arange(6) % 2 == 1
    before = state.bodies.position.copy()
    mirrored, mirrored_obs = mirror_instances(state, mask)

    assert np.array_equal(state.bodies.position, before)
    assert np.array_equal(mirrored.bodies.position[mask], -before[mask])
    assert np.array_equal(mirrored.bodies.position[~mask], before[~mask])
    assert np.array_equal(mirrored.goals[mask], -state.goals[mask])
    np.testing.assert_allclose(np.cos(mirrored.bodies.heading[mask]), -np.cos(state.bodies.heading[mask]), atol=1e-12)
    np.testing.assert_allclose(np.sin(mirrored.bodies.heading[mask]), -np.sin(state.bodies.heading[mask]), atol=1e-12)
    # Команда 0 стартует в левом полукруге, после поворота - в правом
    assert np.all(mirrored.bodies.position[mask, 0, 0] >= 0.0)
    assert np.all(mirrored.bodies.position[mask, 1, 0] <= 0.0)
    for obs, obs_m in zip(observations, mirrored_obs):
        assert np.array_equal(obs[~mask], obs_m[~mask])
    with pytest.raises(ShapeError):
        mirror_instances(state, mask[:3])


def test_mirror_tournament_keeps_step_out_side_losing():
    """Уходящая вправо сторона B и в переставленном экземпляре стартует справа"""
    setup = _setup(max_len=300)
    stay = [_constant(l, [0.0, 0.0]) for l in _learners(setup)]
    step_out = [_constant(l, [1.0, 0.0]) for l in _learners(setup)]

    report = run_tournament(stay, step_out, setup, n_instances=40, seed=11, mirror=True)
    assert report.wins == 40
    assert report.losses == report.ties == 0


def test_mirror_tournament_of_identical_sides_is_symmetric():
    setup = _setup(max_len=300)
    side = _odd(setup, _learners(setup), seed=3)
    report = run_tournament(side, [l.copy() for l in side], setup, n_instances=60, seed=5, mirror=True, workers=1)
    assert report.wins == report.losses
    assert report.decisive_win_rate == 0.5
    assert report.wins + report.losses + report.ties == report.n_instances


def test_mirror_tournament_of_different_sides_is_antisymmetric():
    """Победы A над B на парных экземплярах равны поражениям B от A"""
    setup = _setup(max_len=300)
    a = _odd(setup, _learners(setup, seed=1), seed=1)
    b = _odd(setup, _learners(setup, seed=2), seed=2)

    forward = run_tournament(a, b, setup, n_instances=40, seed=5, mirror=True, workers=1)
    backward = run_tournament(b, a, setup, n_instances=40, seed=5, mirror=True, workers=1)
    assert forward.wins + forward.losses > 0
    assert forward.wins == backward.losses
    assert forward.losses == backward.wins
    assert forward.ties == backward.ties


def test_tournament_does_not_depend_on_worker_count():
    setup = _setup(max_len=60)
    a, b = _learners(setup, seed=1), _learners(setup, seed=2)
    one = run_tournament(a, b, setup, n_instances=30, seed=9, workers=1)
    three = run_tournament(a, b, setup, n_instances=30, seed=9, workers=3)
    assert one.to_row() == three.to_row()


def test_each_side_acts_only_on_its_instances(monkeypatch):
    setup = _setup()
    a = [_constant(l, [1.0, 0.0]) for l in _learners(setup)]
    b = [_constant(l, [-1.0, 0.0]) for l in _learners(setup)]
    seen = []
    for tag, side in (("a", a), ("b", b)):
        for learner in side:
            def act(observations, deterministic=False, original=learner.act, key=(tag, learner.team_id)):
                seen.append((key, len(observations[0])))
                return original(observations, deterministic=deterministic)
            monkeypatch.setattr(learner, "act", act)

    _, observations = reset(setup, seed=0, num_instances=5)
    swapped = np.array([False, True, False, True, True])
    actions = _controlled_actions(a, b, setup, observations, swapped)
    assert actions[0][:, 0].tolist() == [1.0, -1.0, 1.0, -1.0, -1.0]
    assert actions[1][:, 0].tolist() == [-1.0, 1.0, -1.0, 1.0, 1.0]
    assert sorted(seen) == [(("a", 0), 2), (("a", 1), 3), (("b", 0), 3), (("b", 1), 2)]


def test_tournament_requires_adversarial_task():
    setup = _setup("walk_single")
    with pytest.raises(ConfigError):
        run_tournament(_learners(setup), _learners(setup), setup, n_instances=4, seed=0)
    sumo = _setup()
    with pytest.raises(ConfigError):
        run_tournament(_learners(sumo), _learners(sumo), sumo, n_instances=0, seed=0)
    with pytest.raises(ConfigError):
        run_tournament(_learners(sumo)[:1], _learners(sumo), sumo, n_instances=4, seed=0)


def test_win_rate_report_accounting():
    with pytest.raises(ConfigError):
        WinRateReport(wins=3, losses=2, ties=1, n_instances=7)
    report = WinRateReport(wins=0, losses=0, ties=5, n_instances=5)
    assert report.decisive_win_rate == 0.5
    assert report.standard_error == 0.0


def test_map_chunks_keeps_order():
    parts = map_chunks(lambda chunk: chunk.copy(), 10, workers=4)
    assert np.array_equal(np.concatenate(parts), np.arange(10))
    assert len(map_chunks(lambda chunk: chunk, 2, workers=8)) == 2


# --- метрики ---

def _history(n_updates=4, n_evals=0):
    history = TrainingHistory()
    for u in range(n_updates):
        history.updates.append({"update": u, "stage": 0, "return_t0": 0.1 * u, "return_t1": -0.1 * u})
    for k in range(n_evals):
        history.evals.append({"update": 2 * (k + 1), "stage": 0, "mean_return": 0.0, "reach_rate": 0.0,
                              "block_out_rate": 0.0, "win_rate_t0": 0.5, "win_rate_t1": 0.5})
    return history


def test_export_without_evals_writes_header_only(tmp_path):
    paths = export_metrics(_history(), tmp_path, plots=False)
    metrics, evals = load_metrics(tmp_path)
    assert len(metrics) == 4
    assert list(metrics.columns[:3]) == ["update", "stage", "event"]
    assert len(evals) == 0
    assert "win_rate_t0" in evals.columns
    assert set(paths) == {"metrics", "eval"}


def test_export_with_evals_and_plots(tmp_path):
    history = _history(n_evals=3)
    history.events.append({"update": 1, "stage": 0, "event": "стадия 0->1"})
    paths = export_metrics(history, tmp_path)
    metrics, evals = load_metrics(tmp_path)
    assert len(evals) == 3
    assert metrics.loc[metrics["update"] == 1, "event"].item() == "стадия 0->1"
    assert paths["returns_plot"].exists()
    assert paths["win_rate_plot"].exists()


def test_export_empty_history():
    with pytest.raises(ContractError):
        export_metrics(TrainingHistory(), "unused")


# --- журнал траектории ---

def test_recorded_episode_replays(tmp_path):
    setup = _setup(max_len=30)
    a, b = _learners(setup, seed=4), _learners(setup, seed=5)
    path = record_episode(a, b, setup, seed=2, path=tmp_path / "episode.traj")
    table = replay_trajectory(path, tmp_path / "episode.csv")

    saved = pd.read_csv(tmp_path / "episode.csv")
    assert len(saved) == len(table)
    steps = table["step"].max()
    assert 1 <= steps <= 30
    assert len(table) == (steps + 1) * setup.n_bodies
    assert list(table.columns) == ["step", "body", "x", "y", "vx", "vy", "heading", "altitude"]


# --- обучение ---

def test_short_training_is_deterministic(tmp_path):
    config = _tiny_config(updates=2)
    train_curriculum(config.with_overrides(out=str(tmp_path / "a")))
    train_curriculum(config.with_overrides(out=str(tmp_path / "b")))

    a = load_checkpoint(tmp_path / "a" / "latest.ckpt")
    b = load_checkpoint(tmp_path / "b" / "latest.ckpt")
    assert a.update == b.update == 2
    _same_learners(a.learners, b.learners)
    assert load_metrics(tmp_path / "a")[0].equals(load_metrics(tmp_path / "b")[0])
    assert (tmp_path / "a" / "metrics.csv").read_bytes() == (tmp_path / "b" / "metrics.csv").read_bytes()
    assert (tmp_path / "a" / "run.yaml").exists()


def test_training_moves_parameters(tmp_path):
    trainer = CurriculumTrainer(_tiny_config(updates=1), tmp_path)
    before = [l.copy() for l in trainer.learners]
    trainer.run()
    changed = any(
        not np.array_equal(s, t)
        for x, y in zip(before, trainer.learners)
        for s, t in zip(x.parameter_tensors(), y.parameter_tensors())
    )
    assert changed


def test_training_writes_run_log(tmp_path):
    """Журнал запуска лежит в каталоге запуска и дописывается при повторном запуске"""
    trainer = CurriculumTrainer(_tiny_config(updates=1), tmp_path)
    trainer.run()
    first = (tmp_path / "train.log").read_text(encoding="utf-8")
    assert "Запуск обучения" in first
    assert "ИТОГИ ОБУЧЕНИЯ" in first

    CurriculumTrainer(_tiny_config(updates=1), tmp_path).run()
    second = (tmp_path / "train.log").read_text(encoding="utf-8")
    assert second.startswith(first)
    assert second.count("Запуск обучения") == 2


def test_resume_matches_uninterrupted_run(tmp_path):
    config = _tiny_config(updates=4)
    train_curriculum(config.with_overrides(out=str(tmp_path / "full")))
    train_curriculum(config.with_overrides(out=str(tmp_path / "part"), updates=2))
    resume_training(tmp_path / "part" / "latest.ckpt", out_dir=str(tmp_path / "resumed"), updates=4)

    full = load_checkpoint(tmp_path / "full" / "latest.ckpt")
    resumed = load_checkpoint(tmp_path / "resumed" / "latest.ckpt")
    assert full.update == resumed.update == 4
    _same_learners(full.learners, resumed.learners)
    assert full.rng_state == resumed.rng_state
    assert load_metrics(tmp_path / "full")[0].equals(load_metrics(tmp_path / "resumed")[0])


def test_snapshots_follow_cadence(tmp_path):
    config = _tiny_config(updates=3)
    config = replace(config, training=replace(config.training, snapshot_every=2))
    train_curriculum(config.with_overrides(out=str(tmp_path)))
    names = sorted(p.name for p in (tmp_path / "snapshots").iterdir())
    assert names == ["update_000000.ckpt", "update_000002.ckpt"]
    snapshot = load_checkpoint(tmp_path / "snapshots" / "update_000002.ckpt")
    assert snapshot.update == 2


# --- командная строка ---

def test_cli_exits_with_code_one_on_arena_error(tmp_path, monkeypatch):
    import main

    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LOG_FILE", str(tmp_path / "cli.log"))
    with pytest.raises(SystemExit) as exc:
        main.main(["train", "--config", str(tmp_path / "missing.yaml")])
    assert exc.value.code == 1


def test_cli_eval_writes_tournament_table(tmp_path, monkeypatch):
    import main

    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LOG_FILE", str(tmp_path / "cli.log"))
    config = replace(_tiny_config(), env=EnvConfig(max_episode_len=30))
    trainer = CurriculumTrainer(config, tmp_path)
    save_checkpoint(tmp_path / "a.ckpt", trainer.checkpoint())
    save_checkpoint(tmp_path / "b.ckpt", trainer.checkpoint())

    main.main(["eval", "--a", str(tmp_path / "a.ckpt"), "--b", str(tmp_path / "b.ckpt"),
               "--n", "8", "--mirror", "--out", str(tmp_path)])
    table = pd.read_csv(tmp_path / "tournament.csv")
    assert table.loc[0, "n_instances"] == 8
    ckpt = load_checkpoint(tmp_path / "a.ckpt")
    expected = run_tournament(ckpt.learners, load_checkpoint(tmp_path / "b.ckpt").learners,
                              ckpt.env_setup(), n_instances=8, seed=0, mirror=True)
    assert (table.loc[0, "wins"], table.loc[0, "losses"], table.loc[0, "ties"]) == (
        expected.wins, expected.losses, expected.ties)


def _cli_with_config(tmp_path, monkeypatch):
    """Модуль main, рабочий каталог tmp_path и файл запуска tiny.yaml в нём"""
    import main

    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LOG_FILE", str(tmp_path / "cli.log"))
    save_run_config(_tiny_config(), tmp_path / "tiny.yaml")
    return main


def test_cli_train_writes_run_directory(tmp_path, monkeypatch):
    main = _cli_with_config(tmp_path, monkeypatch)
    main.main(["train", "--config", str(tmp_path / "tiny.yaml"), "--seed", "3",
               "--out", str(tmp_path / "run"), "--updates", "1"])

    run = tmp_path / "run"
    assert load_checkpoint(run / "latest.ckpt").update == 1
    for name in ("metrics.csv", "eval.csv", "run.yaml", "train.log"):
        assert (run / name).exists()
    saved = load_run_config(run / "run.yaml")
    assert saved.training.seed == 3
    assert saved.training.total_updates == 1
    assert len(load_metrics(run)[0]) >= 1


def test_cli_resume_continues_to_new_limit(tmp_path, monkeypatch):
    main = _cli_with_config(tmp_path, monkeypatch)
    main.main(["train", "--config", str(tmp_path / "tiny.yaml"), "--out", str(tmp_path / "part"), "--updates", "1"])
    main.main(["resume", "--checkpoint", str(tmp_path / "part" / "latest.ckpt"),
               "--out", str(tmp_path / "resumed"), "--updates", "2"])

    resumed = load_checkpoint(tmp_path / "resumed" / "latest.ckpt")
    assert resumed.update == 2
    assert (tmp_path / "resumed" / "metrics.csv").exists()


def test_cli_replay_exports_recorded_episode(tmp_path, monkeypatch):
    main = _cli_with_config(tmp_path, monkeypatch)
    trainer = CurriculumTrainer(_tiny_config(), tmp_path)
    save_checkpoint(tmp_path / "a.ckpt", trainer.checkpoint())
    main.main(["eval", "--a", str(tmp_path / "a.ckpt"), "--b", str(tmp_path / "a.ckpt"), "--n", "2",
               "--out", str(tmp_path), "--record", str(tmp_path / "episode.traj")])
    main.main(["replay", str(tmp_path / "episode.traj"), "--out", str(tmp_path / "episode.csv")])

    table = pd.read_csv(tmp_path / "episode.csv")
    assert list(table.columns) == ["step", "body", "x", "y", "vx", "vy", "heading", "altitude"]
    assert len(table) == (table["step"].max() + 1) * trainer.setup.n_bodies


def test_cli_export_plot_draws_returns(tmp_path, monkeypatch, capsys):
    main = _cli_with_config(tmp_path, monkeypatch)
    main.main(["train", "--config", str(tmp_path / "tiny.yaml"), "--out", str(tmp_path / "run")])
    main.main(["export-plot", "--out", str(tmp_path / "run")])

    plot = tmp_path / "run" / "returns.svg"
    assert plot.exists()
    assert plot.read_text(encoding="utf-8").lstrip().startswith("<?xml")
    assert str(plot) in capsys.readouterr().out


def test_cli_buffer_study_writes_summary(tmp_path, monkeypatch):
    main = _cli_with_config(tmp_path, monkeypatch)
    main.main(["buffer-study", "--config", str(tmp_path / "tiny.yaml"), "--widths", "0", "4",
               "--seeds", "0", "--updates", "1", "--out", str(tmp_path / "study")])

    table = pd.read_csv(tmp_path / "study" / "buffer_study.csv")
    assert list(table.columns) == ["width", "seed", "warm_start", "updates_to_gate", "updates"]
    assert table["width"].tolist() == [0, 4]
    assert table["updates"].tolist() == [1, 1]
    assert (tmp_path / "study" / "scratch_width4_seed0" / "latest.ckpt").exists()


if __name__ == "__main__":
    pytest.main([__file__])
