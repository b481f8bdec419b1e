"""
Контрольные точки обучения: самоописывающий двоичный формат

Формат: MAGIC, версия (<i8), длина метаданных (<i8), JSON метаданных,
длина блока данных (<i8), блок данных, SHA-256 всего предыдущего.
Блок данных состоит из именованных сегментов: параметры MLP или списки массивов.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from curriculum import ObservationLayout
from envs import EnvSetup, TeamSpec
from harl import CriticNet, PolicyNet, TeamLearner, TrainingHistory
from numcore import AdamState, arrays_from_bytes, arrays_to_bytes, params_from_bytes, params_to_bytes
from utils.errors import CheckpointError

MAGIC = b"HARLCKPT"
FORMAT_VERSION = 1
_INT = np.dtype("<i8")
_DIGEST = 32


@dataclass
class Checkpoint:
    """
    Состояние обучения, достаточное для продолжения без исходного файла запуска

    Args:
        config_hash: Хэш конфигурации запуска
        stage: Индекс стадии
        update: Глобальный номер следующего обновления
        stage_start: Номер обновления, с которого началась стадия
        learners: Текущие стороны
        initial_learners: Стороны в начале стадии (соперник для оценки прогресса)
        layouts: Раскладки наблюдений агентов
        setup: EnvSetup.describe() текущей стадии
        rng_state: Состояние генератора тренера (минибатчи, порядок агентов)
        env_state: VecArena.get_state() или None
        history: TrainingHistory.to_dict()
        config: RunConfig.to_dict() для самоописания
    """

    config_hash: str
    stage: int
    update: int
    stage_start: int
    learners: List[TeamLearner]
    initial_learners: List[TeamLearner]
    layouts: Tuple[ObservationLayout, ...]
    setup: Dict[str, Any]
    rng_state: Dict[str, Any]
    env_state: Optional[Dict[str, Any]] = None
    history: Dict[str, Any] = field(default_factory=lambda: TrainingHistory().to_dict())
    config: Optional[Dict[str, Any]] = None
    version: int = FORMAT_VERSION

    @property
    def teams(self) -> Tuple[TeamSpec, ...]:
        return self.env_setup().teams

    def env_setup(self) -> EnvSetup:
        return EnvSetup.from_description(self.setup)

    def training_history(self) -> TrainingHistory:
        return TrainingHistory.from_dict(self.history)

    def trainer_rng(self) -> np.random.Generator:
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng_state
        return rng


class _BlobWriter:
    def __init__(self):
        self.chunks: List[bytes] = []
        self.segments: List[List] = []
        self.offset = 0

    def _add(self, name: str, kind: str, data: bytes) -> None:
        self.segments.append([name, kind, self.offset, len(data)])
        self.chunks.append(data)
        self.offset += len(data)

    def mlp(self, name: str, params) -> None:
        self._add(name, "mlp", params_to_bytes(params))

    def arrays(self, name: str, arrays: Sequence[np.ndarray]) -> None:
        self._add(name, "arrays", arrays_to_bytes(list(arrays)))

    def blob(self) -> bytes:
        return b"".join(self.chunks)


class _BlobReader:
    def __init__(self, blob: bytes, segments: Sequence[Sequence]):
        self.blob = blob
        self.segments = {name: (kind, int(offset), int(length)) for name, kind, offset, length in segments}

    def _segment(self, name: str, kind: str) -> Tuple[int, int]:
        if name not in self.segments:
            raise CheckpointError(f"Сегмент '{name}' отсутствует в контрольной точке")
        seg_kind, offset, length = self.segments[name]
        if seg_kind != kind or offset + length > len(self.blob):
            raise CheckpointError(f"Сегмент '{name}' повреждён")
        return offset, length

    def mlp(self, name: str):
        offset, length = self._segment(name, "mlp")
        params, end = params_from_bytes(self.blob, offset)
        if end != offset + length:
            raise CheckpointError(f"Сегмент '{name}': длина не совпадает")
        return params

    def arrays(self, name: str) -> List[np.ndarray]:
        offset, length = self._segment(name, "arrays")
        arrays, end = arrays_from_bytes(self.blob, offset)
        if end != offset + length:
            raise CheckpointError(f"Сегмент '{name}': длина не совпадает")
        return arrays


def _write_learner(writer: _BlobWriter, prefix: str, learner: TeamLearner) -> Dict[str, Any]:
    meta: Dict[str, Any] = {
        "team_id": learner.team_id,
        "n_policies": len(learner.policies),
        "has_critic": learner.critic is not None,
        "frozen": learner.frozen,
        "rng": learner.rng.bit_generator.state,
        "actor_steps": [o.step for o in learner.actor_opts],
        "critic_step": None if learner.critic_opt is None else learner.critic_opt.step,
    }
    for k, (policy, opt) in enumerate(zip(learner.policies, learner.actor_opts)):
        writer.mlp(f"{prefix}/policy{k}/mlp", policy.mlp)
        writer.arrays(f"{prefix}/policy{k}/log_std", [policy.log_std])
        writer.arrays(f"{prefix}/policy{k}/adam_m", opt.m)
        writer.arrays(f"{prefix}/policy{k}/adam_v", opt.v)
    if learner.critic is not None:
        writer.mlp(f"{prefix}/critic/mlp", learner.critic.mlp)
        writer.arrays(f"{prefix}/critic/adam_m", learner.critic_opt.m)
        writer.arrays(f"{prefix}/critic/adam_v", learner.critic_opt.v)
    return meta


def _read_learner(reader: _BlobReader, prefix: str, meta: Dict[str, Any]) -> TeamLearner:
    policies, opts = [], []
    for k in range(int(meta["n_policies"])):
        (log_std,) = reader.arrays(f"{prefix}/policy{k}/log_std")
        policies.append(PolicyNet(reader.mlp(f"{prefix}/policy{k}/mlp"), log_std))
        opts.append(AdamState(
            reader.arrays(f"{prefix}/policy{k}/adam_m"),
            reader.arrays(f"{prefix}/policy{k}/adam_v"),
            int(meta["actor_steps"][k]),
        ))
    critic, critic_opt = None, None
    if meta["has_critic"]:
        critic = CriticNet(reader.mlp(f"{prefix}/critic/mlp"))
        critic_opt = AdamState(
            reader.arrays(f"{prefix}/critic/adam_m"),
            reader.arrays(f"{prefix}/critic/adam_v"),
            int(meta["critic_step"]),
        )
    rng = np.random.default_rng()
    rng.bit_generator.state = meta["rng"]
    return TeamLearner(int(meta["team_id"]), policies, critic, rng, bool(meta["frozen"]), opts, critic_opt)


def checkpoint_to_bytes(ckpt: Checkpoint) -> bytes:
    writer = _BlobWriter()
    learners = [_write_learner(writer, f"learner{t}", l) for t, l in enumerate(ckpt.learners)]
    initial = [_write_learner(writer, f"initial{t}", l) for t, l in enumerate(ckpt.initial_learners)]

    env_meta = None
    if ckpt.env_state is not None:
        arrays = ckpt.env_state["arrays"]
        names = sorted(arrays)
        writer.arrays("env/arrays", [arrays[n] for n in names])
        env_meta = {
            "names": names,
            "dtypes": [str(np.asarray(arrays[n]).dtype) for n in names],
            "rng_states": ckpt.env_state["rng_states"],
            "seed": ckpt.env_state["seed"],
        }

    meta = {
        "version": ckpt.version,
        "config_hash": ckpt.config_hash,
        "stage": ckpt.stage,
        "update": ckpt.update,
        "stage_start": ckpt.stage_start,
        "learners": learners,
        "initial_learners": initial,
        "layouts": [layout.to_dict() for layout in ckpt.layouts],
        "setup": ckpt.setup,
        "rng_state": ckpt.rng_state,
        "env": env_meta,
        "history": ckpt.history,
        "config": ckpt.config,
        "segments": writer.segments,
    }
    meta_bytes = json.dumps(meta, sort_keys=True, default=_json_default).encode("utf-8")
    blob = writer.blob()
    body = b"".join([
        MAGIC,
        np.asarray([FORMAT_VERSION, len(meta_bytes)], dtype=_INT).tobytes(),
        meta_bytes,
        np.asarray([len(blob)], dtype=_INT).tobytes(),
        blob,
    ])
    return body + hashlib.sha256(body).digest()


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Значение типа {type(value).__name__} не сериализуется")


def checkpoint_from_bytes(buf: bytes) -> Checkpoint:
    header = len(MAGIC) + 2 * _INT.itemsize
    if len(buf) < header + _INT.itemsize + _DIGEST:
        raise CheckpointError(f"Контрольная точка усечена: {len(buf)} байт")
    if buf[:len(MAGIC)] != MAGIC:
        raise CheckpointError("Файл не является контрольной точкой (неверная сигнатура)")
    body, digest = buf[:-_DIGEST], buf[-_DIGEST:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("Нарушена целостность контрольной точки: SHA-256 не совпадает")

    version, meta_len = (int(v) for v in np.frombuffer(buf, dtype=_INT, count=2, offset=len(MAGIC)))
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Версия формата {version} не поддерживается (ожидалась {FORMAT_VERSION})")
    meta_end = header + meta_len
    if meta_len < 0 or meta_end + _INT.itemsize > len(body):
        raise CheckpointError("Контрольная точка усечена: метаданные")
    meta = json.loads(body[header:meta_end].decode("utf-8"))
    (blob_len,) = np.frombuffer(body, dtype=_INT, count=1, offset=meta_end)
    blob = body[meta_end + _INT.itemsize:]
    if int(blob_len) != len(blob):
        raise CheckpointError(f"Контрольная точка усечена: блок данных {len(blob)} из {int(blob_len)} байт")

    reader = _BlobReader(blob, meta["segments"])
    learners = [_read_learner(reader, f"learner{t}", m) for t, m in enumerate(meta["learners"])]
    initial = [_read_learner(reader, f"initial{t}", m) for t, m in enumerate(meta["initial_learners"])]

    env_state = None
    if meta["env"] is not None:
        env = meta["env"]
        values = reader.arrays("env/arrays")
        arrays = {n: v.astype(d) for n, d, v in zip(env["names"], env["dtypes"], values)}
        env_state = {"arrays": arrays, "rng_states": env["rng_states"], "seed": env["seed"]}

    return Checkpoint(
        config_hash=meta["config_hash"],
        stage=int(meta["stage"]),
        update=int(meta["update"]),
        stage_start=int(meta["stage_start"]),
        learners=learners,
        initial_learners=initial,
        layouts=tuple(ObservationLayout.from_dict(d) for d in meta["layouts"]),
        setup=meta["setup"],
        rng_state=meta["rng_state"],
        env_state=env_state,
        history=meta["history"],
        config=meta["config"],
        version=version,
    )


def save_checkpoint(path: Union[str, Path], ckpt: Checkpoint) -> Path:
    """Записывает контрольную точку; каталог создаётся при необходимости"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_to_bytes(ckpt))
    logger.info(f"Контрольная точка записана: {path} (стадия {ckpt.stage}, обновление {ckpt.update})")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Контрольная точка не найдена: {path}")
    ckpt = checkpoint_from_bytes(path.read_bytes())
    logger.debug(f"Контрольная точка {path}: стадия {ckpt.stage}, обновление {ckpt.update}")
    return ckpt
