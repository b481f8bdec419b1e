"""
Файл запуска: YAML с секциями task, teams, curriculum, happo, reward, env, physics, regime, training
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type, Union

import yaml
from loguru import logger

from curriculum import CurriculumPlan, StageSpec, default_gate, default_stage
from curriculum.plan import DEFAULT_BUFFER_WIDTH
from envs import EnvConfig, RewardConfig, TaskKind, TeamSpec, team_preset, teams_from_roles
from harl import HappoConfig, Regime
from physics2d import PhysicsConfig
from utils.config import Config
from utils.errors import ConfigError

SECTIONS = ("task", "teams", "curriculum", "happo", "reward", "env", "physics", "regime", "training")


@dataclass(frozen=True)
class TrainingConfig:
    """Размер пакета, горизонт, длительность, каденции оценки и снимков"""

    num_envs: int = 64
    horizon: int = 128
    total_updates: int = 500
    eval_every: int = 10
    eval_instances: int = 1000
    snapshot_every: int = 50
    seed: int = 0
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.num_envs < 1:
            raise ConfigError(f"training.num_envs должен быть >= 1: {self.num_envs}")
        if self.horizon < 1:
            raise ConfigError(f"training.horizon должен быть >= 1: {self.horizon}")
        if self.total_updates < 0:
            raise ConfigError(f"training.total_updates не может быть отрицательным: {self.total_updates}")
        if self.eval_instances < 1:
            raise ConfigError(f"training.eval_instances должен быть >= 1: {self.eval_instances}")
        if self.eval_every < 0 or self.snapshot_every < 0:
            raise ConfigError("Каденции оценки и снимков не могут быть отрицательными")


def _check_keys(data: Mapping[str, Any], allowed, path: str) -> None:
    if not isinstance(data, Mapping):
        raise ConfigError(f"Секция {path} должна быть словарём, получено {type(data).__name__}")
    for key in data:
        if key not in allowed:
            raise ConfigError(f"Неизвестный ключ {path}.{key}")


def _section(cls: Type, data: Optional[Mapping[str, Any]], path: str, base: Any = None):
    """Датакласс из словаря со строгой проверкой ключей; base задаёт значения по умолчанию"""
    data = data or {}
    _check_keys(data, {f.name for f in fields(cls)}, path)
    try:
        if base is not None:
            return replace(base, **data)
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"Секция {path}: {e}") from e


@dataclass(frozen=True)
class RunConfig:
    """
    Полное описание запуска

    Args:
        task: Итоговая задача (задача последней стадии)
        teams: Составы команд
        teams_source: Исходная запись секции teams (пресет или роли)
        plan: Учебный план
        happo: Гиперпараметры обновления
        reward: Базовые скаляры наград, которые стадии могут переопределять
        env: Параметры сред
        physics: Параметры физики
        regime: Режим состязательного обучения
        training: Размеры и каденции
    """

    task: TaskKind
    teams: Tuple[TeamSpec, ...]
    teams_source: Dict[str, Any]
    plan: CurriculumPlan
    happo: HappoConfig = field(default_factory=HappoConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    regime: Regime = field(default_factory=Regime)
    training: TrainingConfig = field(default_factory=TrainingConfig)

    @property
    def seed(self) -> int:
        return self.training.seed

    def output_dir(self) -> Path:
        return Path(self.training.output_dir or Config().get("HARL_OUTPUT_DIR"))

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None,
                       updates: Optional[int] = None) -> "RunConfig":
        """Значения флагов командной строки поверх файла"""
        changes: Dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if out is not None:
            changes["output_dir"] = str(out)
        if updates is not None:
            changes["total_updates"] = int(updates)
        return replace(self, training=replace(self.training, **changes)) if changes else self

    def to_dict(self) -> Dict[str, Any]:
        """Каноническое представление в форме файла запуска"""
        stages = []
        for s in self.plan.stages:
            stage = asdict(s)
            stage["task"] = s.task.value
            stages.append(stage)
        return {
            "task": self.task.value,
            "teams": dict(self.teams_source),
            "curriculum": {"zero_buffer_width": self.plan.zero_buffer_width, "stages": stages},
            "happo": asdict(self.happo),
            "reward": asdict(self.reward),
            "env": asdict(self.env),
            "physics": asdict(self.physics),
            "regime": asdict(self.regime),
            "training": asdict(self.training),
        }

    def hash(self) -> str:
        """SHA-256 канонического JSON с сортировкой ключей"""
        payload = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        _check_keys(data, SECTIONS, "config")

        teams_source = dict(data.get("teams") or {"preset": "sumo_1v1"})
        _check_keys(teams_source, ("preset", "roles"), "teams")
        if ("preset" in teams_source) == ("roles" in teams_source):
            raise ConfigError("Секция teams должна содержать ровно один из ключей preset или roles")
        if "preset" in teams_source:
            preset_task, teams = team_preset(teams_source["preset"])
        else:
            preset_task, teams = None, teams_from_roles(teams_source["roles"])

        task_value = data.get("task") or (preset_task.value if preset_task else None)
        if task_value is None:
            raise ConfigError("Не задана задача: укажите task или teams.preset")
        task = _task(task_value, "task")

        reward = _section(RewardConfig, data.get("reward"), "reward")
        plan = _plan(data.get("curriculum"), task, reward)
        if plan.final_task != task:
            raise ConfigError(f"Последняя стадия плана ({plan.final_task.value}) не совпадает с task ({task.value})")

        regime_data = dict(data.get("regime") or {})
        _check_keys(regime_data, ("kind", "interval"), "regime")

        return cls(
            task=task,
            teams=teams,
            teams_source=teams_source,
            plan=plan,
            happo=_section(HappoConfig, data.get("happo"), "happo"),
            reward=reward,
            env=_section(EnvConfig, data.get("env"), "env"),
            physics=_section(PhysicsConfig, data.get("physics"), "physics"),
            regime=Regime(**regime_data),
            training=_section(TrainingConfig, data.get("training"), "training"),
        )


def _task(value: Any, path: str) -> TaskKind:
    try:
        return TaskKind(value)
    except ValueError as e:
        raise ConfigError(f"{path}: неизвестная задача '{value}'; доступны: {[t.value for t in TaskKind]}") from e


_STAGE_KEYS = ("task", "reward", "gate_metric", "gate_threshold", "patience", "max_updates", "name")


def _plan(data: Optional[Mapping[str, Any]], task: TaskKind, base_reward: RewardConfig) -> CurriculumPlan:
    """Стадии из секции curriculum; без неё план из одной стадии итоговой задачи"""
    data = dict(data or {})
    _check_keys(data, ("zero_buffer_width", "stages"), "curriculum")
    width = int(data.get("zero_buffer_width", DEFAULT_BUFFER_WIDTH if data.get("stages") else 0))
    raw_stages: List[Mapping[str, Any]] = list(data.get("stages") or [{"task": task.value}])

    stages = []
    for k, raw in enumerate(raw_stages):
        path = f"curriculum.stages[{k}]"
        _check_keys(raw, _STAGE_KEYS, path)
        if "task" not in raw:
            raise ConfigError(f"{path}: не задана задача стадии")
        stage_task = _task(raw["task"], f"{path}.task")
        reward = _section(RewardConfig, raw.get("reward"), f"{path}.reward", base=base_reward)
        metric, threshold = default_gate(stage_task, reward)
        stages.append(StageSpec(
            task=stage_task,
            reward=reward,
            gate_metric=raw.get("gate_metric", metric),
            gate_threshold=float(raw.get("gate_threshold", threshold)),
            patience=int(raw.get("patience", 3)),
            max_updates=int(raw.get("max_updates", 200)),
            name=raw.get("name", ""),
        ))
    return CurriculumPlan(tuple(stages), width)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Читает и проверяет YAML-файл запуска"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Файл конфигурации не найден: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Не удалось разобрать {path}: {e}") from e
    config = RunConfig.from_dict(data)
    logger.info(f"Конфигурация {path}: задача {config.task.value}, {config.plan.n_stages} стадий, хэш {config.hash()[:12]}")
    return config


def save_run_config(config: RunConfig, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # yaml.safe_dump не принимает кортежи
    data = json.loads(json.dumps(config.to_dict()))
    path.write_text(yaml.safe_dump(data, sort_keys=True, allow_unicode=True), encoding="utf-8")


def default_run_config(preset: str = "sumo_1v1", curriculum: bool = False) -> RunConfig:
    """Запуск по умолчанию для именованного состава"""
    task, teams = team_preset(preset)
    plan = CurriculumPlan.sumo() if curriculum and task == TaskKind.SUMO else CurriculumPlan((default_stage(task),), 0)
    return RunConfig(task=task, teams=teams, teams_source={"preset": preset}, plan=plan)
