#!/usr/bin/env python3
"""
Демонстрационный скрипт для показа работы HarlArena
"""

import sys
import os
from dataclasses import replace
from loguru import logger

# Добавляем путь к модулям проекта
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

from envs import EnvSetup, reset, step, team_preset
from harness import CurriculumTrainer, default_run_config, run_tournament


def demo_episode():
    """Демонстрация одного эпизода сумо с неподвижными агентами"""
    logger.info("=== ДЕМОНСТРАЦИЯ ЭПИЗОДА ===")

    task, teams = team_preset("sumo_1v1")
    setup = EnvSetup(teams=teams, task=task)
    state, observations = reset(setup, seed=0, num_instances=4)
    logger.info(f"Задача {task.value}: {setup.n_agents} агента, наблюдения {setup.obs_dims}, действия {setup.action_dims}")

    actions = [obs[:, :dim] * 0.0 for obs, dim in zip(observations, setup.action_dims)]
    while not state.done.all():
        result = step(state, actions)
        state = result.state

    logger.info(f"Эпизоды завершились на шаге {int(state.step.max())}, ничьи по времени: {result.info['timeout'].tolist()}")


def demo_training():
    """Демонстрация короткого обучения и турнира против начального снимка"""
    logger.info("=== ДЕМОНСТРАЦИЯ ОБУЧЕНИЯ ===")

    config = default_run_config("sumo_1v1")
    config = replace(
        config,
        env=replace(config.env, max_episode_len=120),
        training=replace(config.training, num_envs=8, horizon=64, total_updates=5,
                         eval_every=0, snapshot_every=0, output_dir="runs/demo"),
    )
    trainer = CurriculumTrainer(config)
    trainer.run()

    report = run_tournament(trainer.learners, trainer.initial, trainer.setup, n_instances=100,
                            seed=1, mirror=True, opponent="initial-snapshot")
    logger.info(f"Обученные стороны против начальных: {report.summary()}")


def main():
    """Главная функция демонстрации"""
    logger.info("Запуск демонстрации HarlArena")

    try:
        # Демонстрация эпизода
        demo_episode()

        print("\n" + "="*50 + "\n")

        # Демонстрация обучения
        demo_training()

        logger.info("Демонстрация завершена")

    except Exception as e:
        logger.error(f"Ошибка в демонстрации: {e}")


if __name__ == "__main__":
    main()
