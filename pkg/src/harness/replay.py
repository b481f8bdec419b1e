"""
Воспроизведение журнала траектории и выгрузка положений тел в CSV
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from envs import read_trajectory, reset, step
from utils.errors import ContractError

TRAJECTORY_COLUMNS = ["step", "body", "x", "y", "vx", "vy", "heading", "altitude"]


def _rows(state, t: int):
    b = state.bodies
    for body in range(b.num_bodies):
        yield {
            "step": t,
            "body": body,
            "x": b.position[0, body, 0],
            "y": b.position[0, body, 1],
            "vx": b.velocity[0, body, 0],
            "vy": b.velocity[0, body, 1],
            "heading": b.heading[0, body],
            "altitude": b.altitude[0, body],
        }


def replay_trajectory(path: Union[str, Path], out_csv: Optional[Union[str, Path]] = None) -> pd.DataFrame:
    """
    Повторная симуляция записанных действий

    Награды и флаги завершения сверяются с журналом побитово; расхождение
    означает, что среда или её параметры изменились после записи.

    Args:
        path: Журнал траектории
        out_csv: Куда записать CSV положений; None - только вернуть таблицу

    Returns:
        Таблица step, body, x, y, vx, vy, heading, altitude (шаг 0 - начальная расстановка)
    """
    trajectory = read_trajectory(path)
    setup = trajectory.setup
    if setup.spec_hash() != trajectory.header["spec_hash"]:
        raise ContractError(f"{path}: описание среды не совпадает с хэшем журнала")

    state, _ = reset(setup, trajectory.seed, instance_ids=[0])
    rows = list(_rows(state, 0))
    for t, actions in enumerate(trajectory.actions):
        if state.done[0]:
            raise ContractError(f"{path}: эпизод завершился раньше журнала (шаг {t})")
        result = step(state, [np.asarray(a)[None, :] for a in actions])
        if not np.array_equal(result.rewards[0], trajectory.rewards[t]):
            raise ContractError(
                f"{path}: награды шага {t} не воспроизводятся: {result.rewards[0]} != {trajectory.rewards[t]}"
            )
        if bool(result.dones[0]) != bool(trajectory.dones[t]):
            raise ContractError(f"{path}: флаг завершения шага {t} не воспроизводится")
        state = result.state
        rows.extend(_rows(state, t + 1))

    table = pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)
    if out_csv is not None:
        out_csv = Path(out_csv)
        out_csv.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out_csv, index=False)
        logger.info(f"Траектория {path}: {len(trajectory)} шагов, CSV {out_csv}")
    return table
