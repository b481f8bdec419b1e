"""
Двоичный журнал траектории одного экземпляра для воспроизведения

Формат (little-endian):
    b"HARLTRAJ", версия <i8, длина заголовка <i8, заголовок JSON (utf-8)
    затем записи шагов: действия всех агентов <f8, награды команд <f8, флаг завершения <u1

Заголовок хранит задачу, хэш описания запуска, dt, зерно, размерности и
полное описание запуска, чтобы журнал воспроизводился без исходного конфига.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
from loguru import logger

from utils.errors import CheckpointError, ShapeError
from .arena import EnvSetup

MAGIC = b"HARLTRAJ"
VERSION = 1


@dataclass
class Trajectory:
    header: Dict[str, Any]
    actions: List[List[np.ndarray]]   # шаг -> агент -> (k,)
    rewards: np.ndarray               # (T, n_teams)
    dones: np.ndarray                 # (T,)

    @property
    def setup(self) -> EnvSetup:
        return EnvSetup.from_description(self.header["setup"])

    @property
    def seed(self) -> int:
        return int(self.header["seed"])

    def __len__(self) -> int:
        return len(self.actions)


class TrajectoryWriter:
    """Пишет журнал по шагам; используется как контекстный менеджер"""

    def __init__(self, path: Union[str, Path], setup: EnvSetup, seed: int):
        self.path = Path(path)
        self.setup = setup
        self.action_dims = setup.action_dims
        self.n_teams = setup.n_teams
        self.steps = 0
        header = {
            "task": setup.task.value,
            "spec_hash": setup.spec_hash(),
            "dt": setup.control_dt,
            "seed": int(seed),
            "action_dims": self.action_dims,
            "n_teams": self.n_teams,
            "setup": setup.describe(),
        }
        payload = json.dumps(header, sort_keys=True, default=str).encode("utf-8")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "wb")
        self._file.write(MAGIC)
        self._file.write(np.array([VERSION, len(payload)], dtype="<i8").tobytes())
        self._file.write(payload)

    def write_step(self, actions: Sequence[np.ndarray], rewards: np.ndarray, done: bool) -> None:
        flat = []
        for i, (a, k) in enumerate(zip(actions, self.action_dims)):
            a = np.asarray(a, dtype=np.float64).reshape(-1)
            if a.shape != (k,):
                raise ShapeError(f"Агент {i}: в журнал передано действие длины {a.shape[0]}, ожидалось {k}")
            flat.append(a)
        rewards = np.asarray(rewards, dtype=np.float64).reshape(-1)
        if rewards.shape != (self.n_teams,):
            raise ShapeError(f"Ожидалось {self.n_teams} наград команд, получено {rewards.shape[0]}")
        self._file.write(np.concatenate(flat + [rewards]).astype("<f8").tobytes())
        self._file.write(np.array([1 if done else 0], dtype="<u1").tobytes())
        self.steps += 1

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()
            logger.info(f"Траектория записана: {self.path} ({self.steps} шагов)")

    def __enter__(self) -> "TrajectoryWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_trajectory(path: Union[str, Path]) -> Trajectory:
    """Читает журнал; усечённая последняя запись - ошибка"""
    buf = Path(path).read_bytes()
    if buf[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: не журнал траектории")
    offset = len(MAGIC)
    if len(buf) < offset + 16:
        raise CheckpointError(f"{path}: усечённый заголовок")
    version, length = np.frombuffer(buf, dtype="<i8", count=2, offset=offset)
    if int(version) != VERSION:
        raise CheckpointError(f"{path}: версия журнала {int(version)}, поддерживается {VERSION}")
    offset += 16
    header = json.loads(buf[offset:offset + int(length)].decode("utf-8"))
    offset += int(length)

    dims = header["action_dims"]
    n_teams = header["n_teams"]
    n_floats = sum(dims) + n_teams
    record = 8 * n_floats + 1
    body = len(buf) - offset
    if body % record:
        raise CheckpointError(f"{path}: усечённая запись шага")

    actions, rewards, dones = [], [], []
    splits = np.cumsum(dims)[:-1]
    for start in range(offset, len(buf), record):
        values = np.frombuffer(buf, dtype="<f8", count=n_floats, offset=start).copy()
        actions.append(np.split(values[:sum(dims)], splits))
        rewards.append(values[sum(dims):])
        dones.append(bool(buf[start + 8 * n_floats]))
    return Trajectory(
        header=header,
        actions=actions,
        rewards=np.array(rewards).reshape(-1, n_teams),
        dones=np.array(dones, dtype=bool),
    )
