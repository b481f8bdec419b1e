"""
Выгрузка истории обучения в CSV и построение SVG-графиков
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd
from loguru import logger

from harl import TrainingHistory
from utils.errors import ContractError

METRICS_FILE = "metrics.csv"
EVAL_FILE = "eval.csv"
LEADING_COLUMNS = ["update", "stage", "event"]
EVAL_COLUMNS = ["update", "stage", "mean_return", "reach_rate", "block_out_rate", "win_rate_t0", "win_rate_t1"]


def _ordered(columns, leading: List[str]) -> List[str]:
    rest = sorted(c for c in columns if c not in leading)
    return leading + rest


def metrics_frame(history: TrainingHistory) -> pd.DataFrame:
    """Строка на обновление; события учебного плана в колонке event"""
    events: Dict[int, List[str]] = {}
    for e in history.events:
        events.setdefault(int(e["update"]), []).append(str(e["event"]))
    rows = []
    for row in history.updates:
        row = dict(row)
        row["event"] = "; ".join(events.get(int(row["update"]), []))
        rows.append(row)
    columns = set(LEADING_COLUMNS).union(*(r.keys() for r in rows)) if rows else LEADING_COLUMNS
    return pd.DataFrame(rows, columns=_ordered(columns, LEADING_COLUMNS))


def eval_frame(history: TrainingHistory) -> pd.DataFrame:
    """Строка на точку оценки; без оценок остаётся только заголовок"""
    columns = set(EVAL_COLUMNS).union(*(r.keys() for r in history.evals)) if history.evals else EVAL_COLUMNS
    return pd.DataFrame(list(history.evals), columns=_ordered(columns, EVAL_COLUMNS))


def export_metrics(history: TrainingHistory, out_dir: Union[str, Path], plots: bool = True) -> Dict[str, Path]:
    """
    Пишет metrics.csv и eval.csv, по желанию SVG-графики из тех же данных

    Args:
        history: История обучения
        out_dir: Каталог вывода
        plots: Строить ли графики

    Returns:
        Словарь имя -> путь записанного файла
    """
    if not history.updates:
        raise ContractError("История обучения пуста: нечего выгружать")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    paths = {"metrics": out_dir / METRICS_FILE, "eval": out_dir / EVAL_FILE}
    metrics_frame(history).to_csv(paths["metrics"], index=False)
    eval_frame(history).to_csv(paths["eval"], index=False)
    logger.info(f"Метрики выгружены: {paths['metrics']} ({len(history.updates)} строк), {paths['eval']} ({len(history.evals)} строк)")

    if plots:
        paths.update(plot_metrics(paths["metrics"], paths["eval"], out_dir))
    return paths


def load_metrics(out_dir: Union[str, Path]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    out_dir = Path(out_dir)
    for name in (METRICS_FILE, EVAL_FILE):
        if not (out_dir / name).exists():
            raise ContractError(f"Файл {out_dir / name} не найден")
    return pd.read_csv(out_dir / METRICS_FILE), pd.read_csv(out_dir / EVAL_FILE)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # Без даты в метаданных SVG повторный запуск даёт тот же файл
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_metrics(metrics_csv: Union[str, Path], eval_csv: Union[str, Path],
                 out_dir: Optional[Union[str, Path]] = None) -> Dict[str, Path]:
    """Кривые возвратов команд и win rate; файлы returns.svg и win_rate.svg"""
    metrics_csv, eval_csv = Path(metrics_csv), Path(eval_csv)
    out_dir = Path(out_dir) if out_dir is not None else metrics_csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = pd.read_csv(metrics_csv)
    evals = pd.read_csv(eval_csv)
    paths: Dict[str, Path] = {}

    return_columns = [c for c in metrics.columns if c.startswith("return_t")]
    if return_columns and len(metrics):
        fig, ax = plt.subplots(figsize=(8, 4))
        for column in return_columns:
            ax.plot(metrics["update"], metrics[column], label=column)
        for update in metrics.loc[metrics["event"].fillna("") != "", "update"]:
            ax.axvline(update, color="grey", linestyle="--", linewidth=0.8)
        ax.set_xlabel("обновление")
        ax.set_ylabel("средний возврат эпизода")
        ax.legend()
        ax.grid(True, alpha=0.3)
        paths["returns_plot"] = _save(fig, out_dir / "returns.svg")

    rate_columns = [c for c in ("win_rate_t0", "win_rate_t1") if c in evals.columns and evals[c].notna().any()]
    if rate_columns:
        fig, ax = plt.subplots(figsize=(8, 4))
        for column in rate_columns:
            ax.plot(evals["update"], evals[column], marker="o", label=column)
        ax.axhline(0.5, color="grey", linestyle=":", linewidth=0.8)
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel("обновление")
        ax.set_ylabel("win rate против начального снимка")
        ax.legend()
        ax.grid(True, alpha=0.3)
        paths["win_rate_plot"] = _save(fig, out_dir / "win_rate.svg")

    logger.debug(f"Построено графиков: {len(paths)}")
    return paths
