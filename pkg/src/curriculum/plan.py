"""
Учебный план: стадии, критерии перехода и общая раскладка наблюдений
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger

from envs.observation import task_feature_slots
from envs.specs import AgentSpec, RewardConfig, TaskKind, TeamSpec
from utils.errors import ConfigError
from .layout import ObservationLayout, build_layout

KNOWN_METRICS = ("mean_return", "reach_rate", "block_out_rate", "win_rate_t0", "win_rate_t1")

DEFAULT_BUFFER_WIDTH = 50


class Advance(str, Enum):
    STAY = "stay"
    ADVANCE = "advance"
    DONE = "done"


@dataclass(frozen=True)
class StageSpec:
    """
    Стадия учебного плана

    Args:
        task: Задача стадии
        reward: Скаляры наград стадии
        gate_metric: Метрика оценки, по которой стадия считается пройденной
        gate_threshold: Порог метрики
        patience: Сколько оценок подряд метрика должна держаться не ниже порога
        max_updates: Предел обновлений на стадии
    """

    task: TaskKind
    reward: RewardConfig = field(default_factory=RewardConfig)
    gate_metric: str = "mean_return"
    gate_threshold: float = 0.0
    patience: int = 3
    max_updates: int = 200
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "task", TaskKind(self.task))
        if not self.name:
            object.__setattr__(self, "name", self.task.value)
        if self.gate_metric not in KNOWN_METRICS:
            raise ConfigError(f"Неизвестная метрика перехода '{self.gate_metric}'; доступны: {list(KNOWN_METRICS)}")
        if not math.isfinite(self.gate_threshold):
            raise ConfigError(f"Порог стадии {self.name} должен быть конечным: {self.gate_threshold}")
        if self.patience < 1:
            raise ConfigError(f"patience стадии {self.name} должен быть >= 1: {self.patience}")
        if self.max_updates < 1:
            raise ConfigError(f"max_updates стадии {self.name} должен быть >= 1: {self.max_updates}")


# Метрика и порог по умолчанию для задачи стадии
DEFAULT_GATES: Dict[TaskKind, Tuple[str, float]] = {
    TaskKind.BLOCK_PUSH: ("block_out_rate", 0.7),
    TaskKind.SUMO: ("win_rate_t0", 0.6),
    TaskKind.LASER_TAG: ("win_rate_t0", 0.6),
}

# Доля от delta + gamma_dist: награда за достижение цели плюс предел плотного члена
WALK_GATE_FRACTION = 0.8


def default_gate(task: Union[TaskKind, str], reward: Optional[RewardConfig] = None) -> Tuple[str, float]:
    """Метрика и порог перехода; порог ходьбы к точке считается по наградам стадии"""
    task = TaskKind(task)
    if task == TaskKind.WALK_TO_POINT:
        reward = reward if reward is not None else RewardConfig()
        return "mean_return", WALK_GATE_FRACTION * (reward.delta + reward.gamma_dist)
    return DEFAULT_GATES[task]


def default_stage(task: Union[TaskKind, str], **overrides) -> StageSpec:
    metric, threshold = default_gate(task, overrides.get("reward"))
    params: Dict[str, Any] = {"gate_metric": metric, "gate_threshold": threshold}
    params.update(overrides)
    return StageSpec(task=TaskKind(task), **params)


@dataclass(frozen=True)
class CurriculumPlan:
    """Упорядоченные стадии и ширина нулевого буфера"""

    stages: Tuple[StageSpec, ...]
    zero_buffer_width: int = DEFAULT_BUFFER_WIDTH

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ConfigError("Учебный план должен содержать хотя бы одну стадию")
        if self.zero_buffer_width < 0:
            raise ConfigError(f"Ширина нулевого буфера не может быть отрицательной: {self.zero_buffer_width}")

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def final_task(self) -> TaskKind:
        return self.stages[-1].task

    @classmethod
    def single(cls, task: Union[TaskKind, str], zero_buffer_width: int = 0, **overrides) -> "CurriculumPlan":
        return cls((default_stage(task, **overrides),), zero_buffer_width)

    @classmethod
    def sumo(cls, zero_buffer_width: int = DEFAULT_BUFFER_WIDTH) -> "CurriculumPlan":
        """Ходьба к точке, толкание блока, затем сумо"""
        return cls(
            (
                default_stage(TaskKind.WALK_TO_POINT),
                default_stage(TaskKind.BLOCK_PUSH),
                default_stage(TaskKind.SUMO, max_updates=500),
            ),
            zero_buffer_width,
        )

    def with_buffer(self, width: int) -> "CurriculumPlan":
        return replace(self, zero_buffer_width=int(width))

    def truncated(self, n_stages: int) -> "CurriculumPlan":
        """Первые n_stages стадий; раскладка при этом меняется, переносить между такими планами нельзя"""
        return replace(self, stages=self.stages[:n_stages])


def make_layout(plan: CurriculumPlan, agent: AgentSpec, teams: Sequence[TeamSpec]) -> ObservationLayout:
    """
    Раскладка агента для всего плана

    Объединение признаков всех стадий в порядке первого появления; слот
    активируется со стадии, где встретился впервые, в конце нулевой буфер.
    """
    seen: Dict[str, Tuple[int, int]] = {}
    order: List[str] = []
    for index, stage in enumerate(plan.stages):
        for name, width in task_feature_slots(stage.task, agent, teams):
            if name in seen:
                if seen[name][0] != width:
                    raise ConfigError(
                        f"Слот '{name}' объявлен с шириной {seen[name][0]} и {width} в разных стадиях"
                    )
                continue
            seen[name] = (width, index)
            order.append(name)
    return build_layout([(name, seen[name][0], seen[name][1]) for name in order], plan.zero_buffer_width)


def make_layouts(plan: CurriculumPlan, teams: Sequence[TeamSpec]) -> Tuple[ObservationLayout, ...]:
    """Раскладки всех агентов в глобальном порядке"""
    layouts = tuple(make_layout(plan, a, teams) for t in teams for a in t.agents)
    for layout in layouts:
        for s in range(plan.n_stages - 1):
            before = {x.name for x in layout.active_slots(s)}
            after = {x.name for x in layout.active_slots(s + 1)}
            if not before <= after:
                raise ConfigError(f"Слоты {sorted(before - after)} деактивируются после стадии {s}")
    return layouts


def advance(history: Union[Any, Sequence[Mapping[str, Any]]], plan: CurriculumPlan, stage: int) -> Advance:
    """
    Решение о переходе по истории оценок

    Args:
        history: TrainingHistory или список строк оценок
        plan: Учебный план
        stage: Индекс текущей стадии

    Returns:
        STAY, ADVANCE или DONE, если выполнен критерий последней стадии
    """
    if not 0 <= stage < plan.n_stages:
        raise ConfigError(f"Стадия {stage} вне плана из {plan.n_stages} стадий")
    spec = plan.stages[stage]
    if spec.gate_metric not in KNOWN_METRICS:
        raise ConfigError(f"Неизвестная метрика перехода '{spec.gate_metric}'")

    rows = history.evals if hasattr(history, "evals") else history
    series = [
        float(row[spec.gate_metric]) for row in rows
        if row.get("stage", stage) == stage and spec.gate_metric in row
    ]
    recent = series[-spec.patience:]
    if len(recent) < spec.patience or not all(v >= spec.gate_threshold for v in recent):
        return Advance.STAY

    logger.info(
        f"Стадия {stage} ({spec.name}): {spec.gate_metric} >= {spec.gate_threshold} "
        f"{spec.patience} оценок подряд"
    )
    return Advance.DONE if stage == plan.n_stages - 1 else Advance.ADVANCE
