#!/usr/bin/env python3
"""
HarlArena - многокомандное состязательное обучение с подкреплением
Командная строка: train, eval, resume, replay, export-plot, buffer-study
"""

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd
from loguru import logger

# Добавляем путь к модулям проекта
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from harness import (
    buffer_study,
    load_checkpoint,
    load_run_config,
    plot_metrics,
    record_episode,
    replay_trajectory,
    resume_training,
    run_tournament,
    train_curriculum,
)
from harness.metrics import EVAL_FILE, METRICS_FILE
from utils.config import Config
from utils.errors import ArenaError
from utils.logger import get_logger, setup_logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harl-arena", description="Многокомандное обучение HAPPO в двумерной арене")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="обучение по учебному плану с нуля")
    train.add_argument("--config", required=True, help="YAML-файл запуска")
    train.add_argument("--seed", type=int, help="зерно (перекрывает training.seed)")
    train.add_argument("--out", help="каталог результатов")
    train.add_argument("--updates", type=int, help="общее число обновлений")

    evaluate = commands.add_parser("eval", help="турнир двух контрольных точек")
    evaluate.add_argument("--a", required=True, help="контрольная точка стороны A")
    evaluate.add_argument("--b", required=True, help="контрольная точка стороны B")
    evaluate.add_argument("--n", type=int, default=1000, help="число эпизодов")
    evaluate.add_argument("--seed", type=int, default=0, help="зерно расстановок")
    evaluate.add_argument("--mirror", action="store_true", help="парные эпизоды с переставленными сторонами")
    evaluate.add_argument("--record", help="записать журнал траектории экземпляра 0")
    evaluate.add_argument("--out", help="каталог для tournament.csv")

    resume = commands.add_parser("resume", help="продолжение обучения с контрольной точки")
    resume.add_argument("--checkpoint", required=True, help="контрольная точка")
    resume.add_argument("--out", help="каталог результатов")
    resume.add_argument("--updates", type=int, help="общее число обновлений")

    replay = commands.add_parser("replay", help="журнал траектории в CSV положений тел")
    replay.add_argument("trajectory", help="журнал траектории")
    replay.add_argument("--out", required=True, help="путь CSV")

    plot = commands.add_parser("export-plot", help="SVG-графики из metrics.csv и eval.csv")
    plot.add_argument("--out", required=True, help="каталог с CSV")

    study = commands.add_parser("buffer-study", help="обновления до критерия при разных ширинах буфера")
    study.add_argument("--config", required=True, help="YAML-файл запуска")
    study.add_argument("--widths", type=int, nargs="+", default=[0, 50], help="ширины нулевого буфера")
    study.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2], help="зёрна")
    study.add_argument("--stage", type=int, default=0, help="обучаемая стадия плана")
    study.add_argument("--checkpoint", help="контрольная точка предыдущей стадии для тёплого старта")
    study.add_argument("--out", help="каталог результатов")
    study.add_argument("--updates", type=int, help="предел обновлений на прогон")
    return parser


def cmd_train(args) -> None:
    config = load_run_config(args.config).with_overrides(seed=args.seed, out=args.out, updates=args.updates)
    train_curriculum(config)


def cmd_eval(args) -> None:
    ckpt_a, ckpt_b = load_checkpoint(args.a), load_checkpoint(args.b)
    setup = ckpt_a.env_setup()
    report = run_tournament(ckpt_a.learners, ckpt_b.learners, setup, args.n, args.seed,
                            mirror=args.mirror, opponent=Path(args.b).stem)
    print(report.summary())

    out_dir = Path(args.out) if args.out else Path(args.a).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    row = {"a": args.a, "b": args.b, "seed": args.seed, "mirror": args.mirror, **report.to_row()}
    pd.DataFrame([row]).to_csv(out_dir / "tournament.csv", index=False)

    if args.record:
        record_episode(ckpt_a.learners, ckpt_b.learners, setup, args.seed, args.record)


def cmd_resume(args) -> None:
    resume_training(args.checkpoint, out_dir=args.out, updates=args.updates)


def cmd_replay(args) -> None:
    replay_trajectory(args.trajectory, args.out)


def cmd_export_plot(args) -> None:
    out_dir = Path(args.out)
    paths = plot_metrics(out_dir / METRICS_FILE, out_dir / EVAL_FILE, out_dir)
    for path in paths.values():
        print(path)


def cmd_buffer_study(args) -> None:
    config = load_run_config(args.config).with_overrides(out=args.out, updates=args.updates)
    widths = args.widths
    if args.checkpoint:
        # Тёплый старт возможен только с той же шириной буфера, что у точки
        widths = [config.plan.zero_buffer_width]
    table = buffer_study(config, widths, args.seeds, args.stage, args.checkpoint)
    print(table.to_string(index=False))


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "resume": cmd_resume,
    "replay": cmd_replay,
    "export-plot": cmd_export_plot,
    "buffer-study": cmd_buffer_study,
}


def main(argv: Optional[List[str]] = None):
    """Главная функция командной строки"""
    args = build_parser().parse_args(argv)

    # Загружаем конфигурацию окружения
    config = Config()

    # Настраиваем логирование
    setup_logger(
        log_level=config.get('LOG_LEVEL', 'INFO'),
        log_file=config.get('LOG_FILE')
    )
    cli = get_logger("harl_arena.cli")
    cli.info(f"Команда {args.command}")

    try:
        COMMANDS[args.command](args)
    except ArenaError as e:
        # Одна строка диагностики без трассировки
        cli.error(f"{type(e).__name__}: {e}")
        sys.exit(1)
    except Exception as e:
        logger.exception(f"Непредвиденная ошибка: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
