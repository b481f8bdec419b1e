"""
Обучение по учебному плану: стадии, снимки, возобновление и сравнение буферов
"""

from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from curriculum import Advance, advance, make_layouts, transfer_checkpoint
from envs import EnvSetup, VecArena
from envs.arena import ADVERSARIAL_TASKS
from harl import Regime, TeamLearner, TrainingHistory, run_regime
from utils.config import default_worker_count
from utils.errors import ContractError, IncompatibilityError
from utils.logger import run_log
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .evaluation import stage_metrics
from .metrics import export_metrics
from .run_config import RunConfig, save_run_config

# Смещения зёрен, чтобы потоки случайных чисел тренера, сред и оценки не пересекались
_TRAINER_STREAM = 7919
_STAGE_STREAM = 104729
_EVAL_STREAM = 1000003


class CurriculumTrainer:
    """Проходит стадии плана, обучая все команды одновременно или поочерёдно"""

    def __init__(
        self,
        config: RunConfig,
        out_dir: Optional[Union[str, Path]] = None,
        checkpoint: Optional[Checkpoint] = None,
        start_stage: int = 0,
        workers: Optional[int] = None,
    ):
        """
        Инициализация тренера

        Args:
            config: Описание запуска
            out_dir: Каталог для снимков, метрик и графиков
            checkpoint: Точка, с которой продолжить; None - обучение с нуля
            start_stage: Стадия, с которой начать обучение с нуля
            workers: Потоки оценки; по умолчанию HARL_ARENA_THREADS
        """
        self.config = config
        self.plan = config.plan
        self.training = config.training
        self.out_dir = Path(out_dir) if out_dir is not None else config.output_dir()
        self.workers = workers or default_worker_count()
        self.layouts = make_layouts(self.plan, config.teams)
        self.eval_seed = self.training.seed + _EVAL_STREAM
        self.is_running = False

        if checkpoint is None:
            self._fresh(start_stage)
        else:
            self._restore(checkpoint)

        logger.info(
            f"Тренер: {self.plan.n_stages} стадий, стадия {self.stage} ({self.setup.task.value}), "
            f"обновление {self.update}, N={self.training.num_envs}, T={self.training.horizon}"
        )

    def build_setup(self, stage: int) -> EnvSetup:
        spec = self.plan.stages[stage]
        return EnvSetup(
            teams=self.config.teams,
            task=spec.task,
            layouts=self.layouts,
            reward=spec.reward,
            env=self.config.env,
            physics=self.config.physics,
            stage=stage,
        )

    def _create_learners(self, setup: EnvSetup) -> List[TeamLearner]:
        """Стороны со случайной инициализацией; при общем критике он живёт у команды 0"""
        shared = self.config.happo.shared_critic_ablation
        obs_dims, action_dims = setup.obs_dims, setup.action_dims
        learners = []
        for team in setup.teams:
            members = setup.team_members(team.team_id)
            if shared:
                critic_in = sum(obs_dims) if team.team_id == 0 else None
            else:
                critic_in = sum(obs_dims[i] for i in members)
            learners.append(TeamLearner.create(
                team.team_id,
                [obs_dims[i] for i in members],
                [action_dims[i] for i in members],
                [a.hidden_sizes for a in team.agents],
                critic_in,
                self.training.seed,
            ))
        return learners

    def _stage_venv(self, stage: int) -> VecArena:
        return VecArena(self.setup, self.training.num_envs, self.training.seed + _STAGE_STREAM * stage)

    def _fresh(self, stage: int) -> None:
        if not 0 <= stage < self.plan.n_stages:
            raise ContractError(f"Стадия {stage} вне плана из {self.plan.n_stages} стадий")
        self.stage = stage
        self.update = 0
        self.stage_start = 0
        self.setup = self.build_setup(stage)
        self.learners = self._create_learners(self.setup)
        self.initial = [l.copy() for l in self.learners]
        self.rng = np.random.default_rng([self.training.seed, _TRAINER_STREAM])
        self.venv = self._stage_venv(stage)
        self.history = TrainingHistory()

    def _restore(self, ckpt: Checkpoint) -> None:
        if ckpt.config_hash != self.config.hash():
            logger.warning("Хэш конфигурации не совпадает с сохранённым в контрольной точке")
        for i, (saved, planned) in enumerate(zip(ckpt.layouts, self.layouts)):
            if saved != planned:
                raise IncompatibilityError(f"Раскладка агента {i} в контрольной точке отличается от плана")
        self.stage = ckpt.stage
        self.update = ckpt.update
        self.stage_start = ckpt.stage_start
        self.setup = self.build_setup(self.stage)
        self.learners = ckpt.learners
        self.initial = ckpt.initial_learners
        self.rng = ckpt.trainer_rng()
        self.venv = self._stage_venv(self.stage)
        if ckpt.env_state is not None:
            self.venv.set_state(ckpt.env_state)
        self.history = ckpt.training_history()

    @classmethod
    def warm_start(cls, config: RunConfig, ckpt: Checkpoint, out_dir: Optional[Union[str, Path]] = None,
                   workers: Optional[int] = None) -> "CurriculumTrainer":
        """
        Продолжение обучения с параметрами из точки, перенесённой на стадию ckpt.stage

        Среды, генератор тренера и история создаются заново из зерна config.
        """
        trainer = cls(config, out_dir, start_stage=ckpt.stage, workers=workers)
        trainer.learners = [l.copy() for l in ckpt.learners]
        trainer.initial = [l.copy() for l in ckpt.learners]
        for learner in trainer.learners + trainer.initial:
            learner.reset_optimizers()
        return trainer

    def checkpoint(self, update: Optional[int] = None, learners: Optional[Sequence[TeamLearner]] = None) -> Checkpoint:
        """Снимок текущего состояния тренера"""
        return Checkpoint(
            config_hash=self.config.hash(),
            stage=self.stage,
            update=self.update if update is None else update,
            stage_start=self.stage_start,
            learners=[l.copy() for l in (self.learners if learners is None else learners)],
            initial_learners=[l.copy() for l in self.initial],
            layouts=self.layouts,
            setup=self.setup.describe(),
            rng_state=self.rng.bit_generator.state,
            env_state=self.venv.get_state(),
            history=self.history.to_dict(),
            config=self.config.to_dict(),
        )

    def _snapshot(self, update: int, learners: List[TeamLearner]) -> None:
        save_checkpoint(self.out_dir / "snapshots" / f"update_{update:06d}.ckpt", self.checkpoint(update, learners))

    def _evaluate(self, update: int, learners: List[TeamLearner]) -> Dict[str, Any]:
        return stage_metrics(learners, self.initial, self.setup, self.training.eval_instances,
                             self.eval_seed, self.workers)

    def _regime(self) -> Regime:
        # Поочерёдное обучение имеет смысл только в состязательных задачах
        return self.config.regime if self.setup.task in ADVERSARIAL_TASKS else Regime()

    def run_stage(self) -> Advance:
        """Обучение текущей стадии до критерия, предела стадии или общего предела обновлений"""
        spec = self.plan.stages[self.stage]
        stage_end = min(self.training.total_updates, self.stage_start + spec.max_updates)
        stage = self.stage
        self.learners, self.history, self.update = run_regime(
            self._regime(),
            self.learners,
            self.venv,
            stage_end,
            self.config.happo,
            self.training.horizon,
            self.rng,
            history=self.history,
            start_update=self.update,
            eval_every=self.training.eval_every,
            eval_fn=self._evaluate,
            snapshot_every=self.training.snapshot_every,
            snapshot_fn=self._snapshot,
            stop_fn=lambda h: advance(h, self.plan, stage) != Advance.STAY,
            stage=stage,
            schedule_start=self.stage_start,
        )
        return advance(self.history, self.plan, stage)

    def _advance_stage(self, passed: bool) -> None:
        old = self.stage
        self.history.events.append({
            "update": self.update - 1,
            "stage": old,
            "event": f"стадия {old}->{old + 1}" + ("" if passed else " (предел обновлений)"),
            "gate_passed": passed,
            "stage_updates": self.update - self.stage_start,
        })
        moved = transfer_checkpoint(self.checkpoint(), old, old + 1, self.plan)
        self.stage = moved.stage
        self.stage_start = moved.stage_start
        self.learners = moved.learners
        self.initial = moved.initial_learners
        self.setup = self.build_setup(self.stage)
        self.venv = self._stage_venv(self.stage)
        logger.info(f"Начата стадия {self.stage} ({self.setup.task.value}) на обновлении {self.update}")

    def _finish_stage(self, passed: bool) -> None:
        self.history.events.append({
            "update": self.update - 1,
            "stage": self.stage,
            "event": f"план завершён на стадии {self.stage}" if passed else f"предел обновлений стадии {self.stage}",
            "gate_passed": passed,
            "stage_updates": self.update - self.stage_start,
        })

    def run(self, single_stage: bool = False) -> TrainingHistory:
        """
        Основной цикл обучения

        Args:
            single_stage: Остановиться после текущей стадии (сравнение буферов)
        """
        with run_log(self.out_dir):
            logger.info("Запуск обучения...")
            self.is_running = True
            try:
                while self.is_running and self.update < self.training.total_updates:
                    decision = self.run_stage()
                    spec = self.plan.stages[self.stage]
                    exhausted = self.update >= self.stage_start + spec.max_updates
                    if decision == Advance.DONE:
                        self._finish_stage(True)
                        break
                    if decision == Advance.STAY and not exhausted:
                        continue
                    if single_stage or self.stage == self.plan.n_stages - 1:
                        self._finish_stage(decision != Advance.STAY)
                        break
                    if decision == Advance.STAY:
                        logger.warning(f"Стадия {self.stage} не прошла критерий за {spec.max_updates} обновлений, переход")
                    self._advance_stage(decision == Advance.ADVANCE)
            except KeyboardInterrupt:
                logger.info("Получен сигнал остановки")
            self.stop()
            self.save(self.out_dir / "latest.ckpt")
            if self.history.updates:
                export_metrics(self.history, self.out_dir)
            self._print_final_stats()
        return self.history

    def save(self, path: Union[str, Path]) -> Path:
        return save_checkpoint(path, self.checkpoint())

    def stop(self) -> None:
        self.is_running = False

    def gate_updates(self, stage: int) -> Optional[int]:
        """Число обновлений, за которое стадия прошла критерий; None, если не прошла"""
        for event in self.history.events:
            if event["stage"] == stage and event.get("gate_passed"):
                return int(event["stage_updates"])
        return None

    def _print_final_stats(self) -> None:
        logger.info("=== ИТОГИ ОБУЧЕНИЯ ===")
        logger.info(f"Обновлений: {self.update}, стадия: {self.stage} ({self.setup.task.value})")
        for event in self.history.events:
            logger.info(f"  обновление {event['update']}: {event['event']}")
        if self.history.evals:
            last = self.history.evals[-1]
            summary = ", ".join(f"{k}={v:.3f}" for k, v in last.items() if isinstance(v, float))
            logger.info(f"Последняя оценка: {summary}")


def train_curriculum(config: RunConfig, out_dir: Optional[Union[str, Path]] = None,
                     workers: Optional[int] = None) -> TrainingHistory:
    """Обучение по плану с нуля; копия конфигурации сохраняется в run.yaml"""
    trainer = CurriculumTrainer(config, out_dir, workers=workers)
    save_run_config(config, trainer.out_dir / "run.yaml")
    return trainer.run()


def resume_training(
    checkpoint_path: Union[str, Path],
    out_dir: Optional[Union[str, Path]] = None,
    updates: Optional[int] = None,
    workers: Optional[int] = None,
) -> TrainingHistory:
    """Продолжение обучения; конфигурация берётся из самой контрольной точки"""
    ckpt = load_checkpoint(checkpoint_path)
    if ckpt.config is None:
        raise ContractError(f"Контрольная точка {checkpoint_path} не содержит конфигурации запуска")
    config = RunConfig.from_dict(ckpt.config).with_overrides(out=out_dir, updates=updates)
    # Предел обновлений не влияет на траекторию обучения
    ckpt = replace(ckpt, config_hash=config.hash())
    trainer = CurriculumTrainer(config, config.output_dir(), checkpoint=ckpt, workers=workers)
    return trainer.run()


def buffer_study(
    config: RunConfig,
    widths: Sequence[int] = (0, 50),
    seeds: Sequence[int] = (0, 1, 2),
    stage: int = 0,
    warm_start: Optional[Union[str, Path]] = None,
    out_dir: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Число обновлений до критерия стадии при разных ширинах нулевого буфера

    Args:
        config: Базовое описание запуска
        widths: Ширины буфера
        seeds: Зёрна
        stage: Обучаемая стадия плана
        warm_start: Контрольная точка предыдущей стадии; её параметры
            переносятся на stage вместо случайной инициализации
        out_dir: Каталог; каждый прогон пишет свой подкаталог, сводка в buffer_study.csv

    Returns:
        Таблица width, seed, warm_start, updates_to_gate, updates
    """
    out_dir = Path(out_dir) if out_dir is not None else config.output_dir()
    source = load_checkpoint(warm_start) if warm_start is not None else None
    rows = []
    for width in widths:
        plan = config.plan.with_buffer(width)
        for seed in seeds:
            run_config = replace(config, plan=plan).with_overrides(seed=seed)
            run_dir = out_dir / f"{'warm' if source else 'scratch'}_width{width}_seed{seed}"
            if source is not None:
                moved = transfer_checkpoint(source, source.stage, stage, plan)
                trainer = CurriculumTrainer.warm_start(run_config, moved, run_dir, workers)
            else:
                trainer = CurriculumTrainer(run_config, run_dir, start_stage=stage, workers=workers)
            trainer.run(single_stage=True)
            gate = trainer.gate_updates(stage)
            rows.append({
                "width": width,
                "seed": seed,
                "warm_start": source is not None,
                "updates_to_gate": np.nan if gate is None else gate,
                "updates": trainer.update,
            })
            logger.info(f"Буфер {width}, зерно {seed}: критерий {'не достигнут' if gate is None else f'за {gate} обновлений'}")

    table = pd.DataFrame(rows, columns=["width", "seed", "warm_start", "updates_to_gate", "updates"])
    out_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_dir / "buffer_study.csv", index=False)
    return table
