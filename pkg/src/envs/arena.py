"""
Многокомандная среда: описание запуска, состояние и чистые reset/step

Все функции работают сразу с N независимыми экземплярами. Тела в каждом
экземпляре упорядочены так: агенты в порядке команд, затем блоки задачи.
"""

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from curriculum.layout import ObservationLayout, build_layout
from physics2d import (
    ActuationLimits,
    ArenaSpec,
    BodyBatch,
    BodyKind,
    PhysicsConfig,
    apply_actions,
    contain_in_rect,
    integrate,
    point_ray_distances,
    resolve_collisions,
    ring_excursion_mask,
    wrap_angle,
)
from utils.errors import ConfigError, NumericError, ShapeError
from .observation import observe, task_feature_slots
from .rewards import team_rewards
from .spawn import Spawn, spawn_instance
from .specs import AgentSpec, EliminationStatus, EnvConfig, RewardConfig, TaskKind, TeamSpec, validate_teams

ADVERSARIAL_TASKS = (TaskKind.SUMO, TaskKind.LASER_TAG)


@dataclass(frozen=True)
class EnvSetup:
    """
    Неизменяемое описание запуска: команды, задача, раскладки и параметры

    Args:
        teams: Команды в порядке номеров
        task: Задача стадии
        layouts: Раскладка наблюдения каждого агента; None - только признаки задачи
        stage: Индекс стадии, по которому активируются слоты раскладок
    """

    teams: Tuple[TeamSpec, ...]
    task: TaskKind
    layouts: Optional[Tuple[ObservationLayout, ...]] = None
    reward: RewardConfig = field(default_factory=RewardConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    stage: int = 0

    def __post_init__(self):
        object.__setattr__(self, "teams", tuple(self.teams))
        object.__setattr__(self, "task", TaskKind(self.task))
        validate_teams(self.teams)
        self._validate_task()
        if self.layouts is None:
            layouts = tuple(
                build_layout([(name, width, self.stage) for name, width in task_feature_slots(self.task, a, self.teams)])
                for a in self.agents
            )
            object.__setattr__(self, "layouts", layouts)
        object.__setattr__(self, "layouts", tuple(self.layouts))
        object.__setattr__(self, "reward", self.reward.with_dt(self.control_dt))
        self._validate_layouts()

    def _validate_task(self) -> None:
        if self.task in ADVERSARIAL_TASKS and len(self.teams) != 2:
            raise ConfigError(f"Задача {self.task.value} требует ровно 2 команды, получено {len(self.teams)}")
        for team in self.teams:
            for agent in team.agents:
                if agent.flying and self.task != TaskKind.LASER_TAG:
                    raise ConfigError(f"Агент {agent.agent_id}: летающие тела допустимы только в laser_tag")
        if self.task == TaskKind.LASER_TAG:
            for agent in self.teams[0].agents:
                if agent.flying or agent.kind != BodyKind.DIFFERENTIAL_DRIVE:
                    raise ConfigError(f"Агент {agent.agent_id}: команда 0 в laser_tag состоит из танков")
            for agent in self.teams[1].agents:
                if not agent.flying:
                    raise ConfigError(f"Агент {agent.agent_id}: команда 1 в laser_tag состоит из дронов")

    def _validate_layouts(self) -> None:
        if len(self.layouts) != self.n_agents:
            raise ConfigError(f"Ожидалось {self.n_agents} раскладок наблюдения, получено {len(self.layouts)}")
        for i, (agent, layout) in enumerate(zip(self.agents, self.layouts)):
            active = {s.name: s.width for s in layout.active_slots(self.stage)}
            for name, width in task_feature_slots(self.task, agent, self.teams):
                if active.get(name) != width:
                    raise ConfigError(
                        f"Раскладка агента {i} не содержит активного слота '{name}' ширины {width} на стадии {self.stage}"
                    )

    @property
    def agents(self) -> Tuple[AgentSpec, ...]:
        return tuple(a for t in self.teams for a in t.agents)

    @property
    def agent_team(self) -> np.ndarray:
        return np.array([t.team_id for t in self.teams for _ in t.agents], dtype=np.int64)

    def team_members(self, team: int) -> List[int]:
        """Глобальные индексы агентов команды"""
        return [i for i, t in enumerate(self.agent_team) if t == team]

    @property
    def n_agents(self) -> int:
        return sum(len(t.agents) for t in self.teams)

    @property
    def n_teams(self) -> int:
        return len(self.teams)

    @property
    def n_blocks(self) -> int:
        return self.n_agents if self.task == TaskKind.BLOCK_PUSH else 0

    @property
    def n_bodies(self) -> int:
        return self.n_agents + self.n_blocks

    @property
    def arena(self) -> ArenaSpec:
        if self.task == TaskKind.LASER_TAG:
            return ArenaSpec.rect(self.env.arena_width, self.env.arena_height, self.env.min_height)
        return ArenaSpec.ring(self.env.ring_radius)

    @property
    def control_dt(self) -> float:
        return self.physics.dt * self.physics.substeps

    @property
    def obs_dims(self) -> List[int]:
        return [layout.total_width for layout in self.layouts]

    @property
    def action_dims(self) -> List[int]:
        return [a.action_dim for a in self.agents]

    def with_stage(self, stage: int, task: Optional[TaskKind] = None, reward: Optional[RewardConfig] = None) -> "EnvSetup":
        return EnvSetup(
            teams=self.teams,
            task=self.task if task is None else task,
            layouts=self.layouts,
            reward=self.reward if reward is None else reward,
            env=self.env,
            physics=self.physics,
            stage=stage,
        )

    def describe(self) -> Dict[str, Any]:
        return {
            "task": self.task.value,
            "stage": self.stage,
            "teams": [[asdict(a) for a in t.agents] for t in self.teams],
            "layouts": [layout.to_dict() for layout in self.layouts],
            "reward": asdict(self.reward),
            "env": asdict(self.env),
            "physics": asdict(self.physics),
        }

    @classmethod
    def from_description(cls, data: Dict[str, Any]) -> "EnvSetup":
        """Обратная операция к describe"""
        teams = []
        for team_id, agents in enumerate(data["teams"]):
            specs = []
            for a in agents:
                a = dict(a)
                a["limits"] = ActuationLimits(**a["limits"])
                specs.append(AgentSpec(**a))
            teams.append(TeamSpec(team_id, tuple(specs)))
        return cls(
            teams=tuple(teams),
            task=TaskKind(data["task"]),
            layouts=tuple(ObservationLayout.from_dict(d) for d in data["layouts"]),
            reward=RewardConfig(**data["reward"]),
            env=EnvConfig(**data["env"]),
            physics=PhysicsConfig(**data["physics"]),
            stage=int(data["stage"]),
        )

    def spec_hash(self) -> str:
        """SHA-256 канонического JSON описания"""
        payload = json.dumps(self.describe(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class StepEvents:
    """События последнего шага по агентам, формы (N, A)"""

    reached_now: np.ndarray
    block_out_now: np.ndarray
    left_now: np.ndarray
    knocked_now: np.ndarray
    active_before: np.ndarray

    @classmethod
    def empty(cls, n_instances: int, n_agents: int) -> "StepEvents":
        def zeros():
            return np.zeros((n_instances, n_agents), dtype=bool)
        return cls(zeros(), zeros(), zeros(), zeros(), np.ones((n_instances, n_agents), dtype=bool))


@dataclass
class EnvState:
    """Состояние N экземпляров среды"""

    setup: EnvSetup
    bodies: BodyBatch
    goals: np.ndarray                 # (N, A, 2)
    elimination: EliminationStatus
    step: np.ndarray                  # (N,)
    rngs: List[np.random.Generator]
    reached: np.ndarray               # (N, A)
    block_out: np.ndarray             # (N, A)
    last_actions: List[np.ndarray]    # по агентам, (N, k)
    events: StepEvents
    done: np.ndarray                  # (N,)

    @property
    def num_instances(self) -> int:
        return self.bodies.num_instances

    def copy(self) -> "EnvState":
        """Копия массивов; генераторы общие"""
        return EnvState(
            setup=self.setup,
            bodies=self.bodies.copy(),
            goals=self.goals.copy(),
            elimination=self.elimination.copy(),
            step=self.step.copy(),
            rngs=list(self.rngs),
            reached=self.reached.copy(),
            block_out=self.block_out.copy(),
            last_actions=[a.copy() for a in self.last_actions],
            events=copy.deepcopy(self.events),
            done=self.done.copy(),
        )

    def to_arrays(self) -> Dict[str, np.ndarray]:
        """Динамическая часть состояния для контрольной точки"""
        b, e = self.bodies, self.elimination
        arrays = {
            "position": b.position, "velocity": b.velocity, "heading": b.heading,
            "angular_velocity": b.angular_velocity, "altitude": b.altitude,
            "vertical_velocity": b.vertical_velocity, "goals": self.goals,
            "L": e.L, "tie": e.tie, "timeout": e.timeout, "eliminated": e.eliminated,
            "step": self.step, "reached": self.reached, "block_out": self.block_out, "done": self.done,
        }
        for i, a in enumerate(self.last_actions):
            arrays[f"last_action_{i}"] = a
        return {k: np.array(v) for k, v in arrays.items()}

    def rng_states(self) -> List[Dict[str, Any]]:
        return [rng.bit_generator.state for rng in self.rngs]

    @classmethod
    def from_arrays(cls, setup: EnvSetup, arrays: Dict[str, np.ndarray], rng_states: Sequence[Dict]) -> "EnvState":
        n = arrays["position"].shape[0]
        template = _template_bodies(setup, n)
        bodies = BodyBatch(
            position=arrays["position"].astype(np.float64), velocity=arrays["velocity"].astype(np.float64),
            heading=arrays["heading"].astype(np.float64), angular_velocity=arrays["angular_velocity"].astype(np.float64),
            altitude=arrays["altitude"].astype(np.float64),
            vertical_velocity=arrays["vertical_velocity"].astype(np.float64),
            radius=template.radius, mass=template.mass, kind=template.kind, flying=template.flying,
        )
        rngs = []
        for state in rng_states:
            rng = np.random.default_rng()
            rng.bit_generator.state = state
            rngs.append(rng)
        return cls(
            setup=setup,
            bodies=bodies,
            goals=arrays["goals"].astype(np.float64),
            elimination=EliminationStatus(
                arrays["L"].astype(bool), arrays["tie"].astype(bool),
                arrays["timeout"].astype(bool), arrays["eliminated"].astype(bool),
            ),
            step=arrays["step"].astype(np.int64),
            rngs=rngs,
            reached=arrays["reached"].astype(bool),
            block_out=arrays["block_out"].astype(bool),
            last_actions=[arrays[f"last_action_{i}"].astype(np.float64) for i in range(setup.n_agents)],
            events=StepEvents.empty(n, setup.n_agents),
            done=arrays["done"].astype(bool),
        )


@dataclass
class StepResult:
    state: EnvState
    rewards: np.ndarray               # (N, n_teams)
    dones: np.ndarray                 # (N,)
    observations: List[np.ndarray]    # по агентам, (N, obs_dim)
    info: Dict[str, np.ndarray]


def _body_limits(setup: EnvSetup) -> List[ActuationLimits]:
    return [a.limits for a in setup.agents] + [ActuationLimits()] * setup.n_blocks


def _template_bodies(setup: EnvSetup, n: int) -> BodyBatch:
    agents = setup.agents
    b = setup.n_bodies
    radius = np.array([a.radius for a in agents] + [setup.env.block_radius] * setup.n_blocks)
    mass = np.array([a.mass for a in agents] + [setup.env.block_mass] * setup.n_blocks)
    kind = np.array([int(a.kind) for a in agents] + [int(BodyKind.HOLONOMIC)] * setup.n_blocks, dtype=np.int64)
    flying = np.array([a.flying for a in agents] + [False] * setup.n_blocks, dtype=bool)
    zeros2, zeros = np.zeros((n, b, 2)), np.zeros((n, b))
    return BodyBatch(zeros2, zeros2.copy(), zeros, zeros.copy(), zeros.copy(), zeros.copy(), radius, mass, kind, flying)


def _place_spawns(state: EnvState, instances: Sequence[int], spawns: Sequence[Spawn]) -> None:
    """Записывает расстановки в экземпляры и сбрасывает их счётчики (на месте)"""
    setup = state.setup
    bodies = state.bodies
    for i, sp in zip(instances, spawns):
        bodies.position[i] = sp.positions
        bodies.velocity[i] = 0.0
        bodies.heading[i] = sp.headings
        bodies.angular_velocity[i] = 0.0
        bodies.altitude[i] = sp.altitudes
        bodies.vertical_velocity[i] = 0.0
        state.goals[i] = sp.goals
        state.elimination.L[i] = False
        state.elimination.tie[i] = False
        state.elimination.timeout[i] = False
        state.elimination.eliminated[i] = False
        state.step[i] = 0
        state.reached[i] = False
        state.block_out[i] = False
        state.done[i] = False
        for a in state.last_actions:
            a[i] = 0.0
    if setup.task == TaskKind.LASER_TAG:
        state.goals[:] = _drone_goals(state)


def _drone_goals(state: EnvState) -> np.ndarray:
    """Цель дрона: парный танк, смещённый на goal_offset вдоль оси y, внутри арены"""
    setup = state.setup
    env = setup.env
    goals = state.goals.copy()
    tanks, drones = setup.team_members(0), setup.team_members(1)
    half = np.array([env.arena_width / 2.0, env.arena_height / 2.0])
    for k, d in enumerate(drones):
        target = state.bodies.position[:, tanks[k % len(tanks)]] + np.array([0.0, env.goal_offset])
        limit = half - setup.agents[d].radius
        goals[:, d] = np.clip(target, -limit, limit)
    return goals


def reset(setup: EnvSetup, seed: int, num_instances: int = 1,
          instance_ids: Optional[Sequence[int]] = None) -> Tuple[EnvState, List[np.ndarray]]:
    """
    Начальное состояние N экземпляров

    Экземпляр получает свой генератор default_rng([seed, id]), где id - его
    номер или элемент instance_ids, поэтому расстановка не зависит от размера пакета.
    """
    if instance_ids is not None:
        num_instances = len(instance_ids)
    else:
        instance_ids = range(num_instances)
    if num_instances < 1:
        raise ConfigError(f"Число экземпляров должно быть >= 1: {num_instances}")
    rngs = [np.random.default_rng([int(seed), int(i)]) for i in instance_ids]
    n_agents = setup.n_agents
    state = EnvState(
        setup=setup,
        bodies=_template_bodies(setup, num_instances),
        goals=np.zeros((num_instances, n_agents, 2)),
        elimination=EliminationStatus.empty(num_instances, setup.n_teams, n_agents),
        step=np.zeros(num_instances, dtype=np.int64),
        rngs=rngs,
        reached=np.zeros((num_instances, n_agents), dtype=bool),
        block_out=np.zeros((num_instances, n_agents), dtype=bool),
        last_actions=[np.zeros((num_instances, k)) for k in setup.action_dims],
        events=StepEvents.empty(num_instances, n_agents),
        done=np.zeros(num_instances, dtype=bool),
    )
    _place_spawns(state, range(num_instances), [spawn_instance(setup, rng) for rng in rngs])
    return state, observe(state)


def reset_instances(state: EnvState, mask: np.ndarray) -> Tuple[EnvState, List[np.ndarray]]:
    """Новый эпизод в экземплярах mask; генераторы копируются, исходное состояние не меняется"""
    mask = np.asarray(mask, dtype=bool)
    out = state.copy()
    out.rngs = copy.deepcopy(state.rngs)
    instances = np.flatnonzero(mask)
    spawns = [spawn_instance(state.setup, out.rngs[i]) for i in instances]
    _place_spawns(out, instances, spawns)
    out.events.active_before[instances] = True
    for field_name in ("reached_now", "block_out_now", "left_now", "knocked_now"):
        getattr(out.events, field_name)[instances] = False
    return out, observe(out)


def mirror_instances(state: EnvState, mask: np.ndarray) -> Tuple[EnvState, List[np.ndarray]]:
    """
    Поворот сцены на пол-оборота вокруг центра арены в экземплярах mask

    Ринг и прямоугольная арена с центром в начале координат переходят сами в
    себя, а команды меняются сторонами поля: позиции, скорости и цели меняют
    знак, курс поворачивается на pi.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (state.num_instances,):
        raise ShapeError(f"Маска формы {mask.shape}, ожидалось {(state.num_instances,)}")
    out = state.copy()
    rows = np.flatnonzero(mask)
    bodies = out.bodies
    bodies.position[rows] = -bodies.position[rows]
    bodies.velocity[rows] = -bodies.velocity[rows]
    bodies.heading[rows] = wrap_angle(bodies.heading[rows] + np.pi)
    out.goals[rows] = -out.goals[rows]
    if state.setup.task == TaskKind.LASER_TAG:
        out.goals[:] = _drone_goals(out)
    return out, observe(out)


def _check_actions(setup: EnvSetup, actions: Sequence[np.ndarray], n: int) -> List[np.ndarray]:
    if len(actions) != setup.n_agents:
        raise ShapeError(f"Ожидалось {setup.n_agents} действий, получено {len(actions)}")
    checked = []
    for i, (act, k) in enumerate(zip(actions, setup.action_dims)):
        act = np.asarray(act, dtype=np.float64)
        if act.ndim == 1 and n == 1:
            act = act[None]
        if act.shape != (n, k):
            raise ShapeError(f"Агент {i}: ожидалось действие формы {(n, k)}, получено {act.shape}")
        if not np.all(np.isfinite(act)):
            raise NumericError(f"Агент {i}: нечисловое действие")
        checked.append(act)
    return checked


def _advance_bodies(state: EnvState, actions: List[np.ndarray], frozen: np.ndarray) -> BodyBatch:
    setup = state.setup
    phys = setup.physics
    arena = setup.arena
    bodies = state.bodies
    per_body = list(actions) + [None] * setup.n_blocks
    limits = _body_limits(setup)
    for _ in range(phys.substeps):
        forces = apply_actions(bodies, per_body, limits)
        bodies = integrate(bodies, forces, phys.dt, drag=phys.drag, gravity=phys.gravity, frozen=frozen)
        bodies = resolve_collisions(bodies, restitution=phys.restitution, frozen=frozen)
        if setup.task == TaskKind.LASER_TAG:
            bodies = contain_in_rect(bodies, arena)
            capped = np.clip(bodies.altitude, 0.0, setup.env.max_altitude)
            hit_cap = capped != bodies.altitude
            bodies.altitude = np.where(frozen, state.bodies.altitude, capped)
            bodies.vertical_velocity = np.where(hit_cap, 0.0, bodies.vertical_velocity)
    return bodies


def _update_walk(state: EnvState, events: StepEvents, live: np.ndarray) -> np.ndarray:
    setup = state.setup
    n_agents = setup.n_agents
    gap = state.goals - state.bodies.position[:, :n_agents]
    close = np.hypot(gap[..., 0], gap[..., 1]) < setup.env.reach_radius
    events.reached_now = close & ~state.reached & live[:, None]
    state.reached = state.reached | events.reached_now
    return np.all(state.reached, axis=1)


def _update_block_push(state: EnvState, events: StepEvents, live: np.ndarray) -> np.ndarray:
    setup = state.setup
    n_agents = setup.n_agents
    arena = setup.arena
    active = events.active_before & live[:, None]
    block_out = ring_excursion_mask(state.bodies.position[:, n_agents:], arena)
    agent_out = ring_excursion_mask(state.bodies.position[:, :n_agents], arena)
    events.block_out_now = active & block_out & ~state.block_out
    events.left_now = active & agent_out
    state.block_out = state.block_out | events.block_out_now
    state.elimination.eliminated = state.elimination.eliminated | events.block_out_now | events.left_now
    return np.all(state.elimination.eliminated, axis=1)


def _update_sumo(state: EnvState, events: StepEvents, live: np.ndarray) -> np.ndarray:
    setup = state.setup
    n_agents = setup.n_agents
    elim = state.elimination
    out = ring_excursion_mask(state.bodies.position[:, :n_agents], setup.arena) & live[:, None]
    events.left_now = out & ~elim.eliminated
    elim.eliminated = elim.eliminated | out
    for team in range(setup.n_teams):
        elim.L[:, team] = np.any(elim.eliminated[:, setup.team_members(team)], axis=1)
    elim.tie = np.all(elim.L, axis=1)
    return np.any(elim.L, axis=1)


def _update_laser_tag(state: EnvState, events: StepEvents, live: np.ndarray) -> np.ndarray:
    setup = state.setup
    env = setup.env
    elim = state.elimination
    bodies = state.bodies
    tanks, drones = setup.team_members(0), setup.team_members(1)

    origins = bodies.position[:, tanks]                                   # (N, T, 2)
    directions = np.stack([np.cos(bodies.heading[:, tanks]), np.sin(bodies.heading[:, tanks])], axis=-1)
    points = bodies.position[:, drones]                                   # (N, D, 2)
    dist = point_ray_distances(origins[:, :, None], directions[:, :, None], points[:, None])  # (N, T, D)
    in_band = bodies.altitude[:, drones] <= env.ray_height
    hit = np.any(dist < env.knockout_radius, axis=1) & in_band
    fell = bodies.altitude[:, drones] < env.min_height

    alive = ~elim.eliminated[:, drones] & live[:, None]
    knocked = alive & (hit | fell)
    events.knocked_now[:, drones] = knocked
    elim.eliminated[:, drones] = elim.eliminated[:, drones] | knocked
    elim.L[:, 1] = np.all(elim.eliminated[:, drones], axis=1)
    elim.L[:, 0] = False
    state.goals = _drone_goals(state)
    return elim.L[:, 1].copy()


_TASK_UPDATES = {
    TaskKind.WALK_TO_POINT: _update_walk,
    TaskKind.BLOCK_PUSH: _update_block_push,
    TaskKind.SUMO: _update_sumo,
    TaskKind.LASER_TAG: _update_laser_tag,
}


def step(state: EnvState, actions: Sequence[np.ndarray]) -> StepResult:
    """
    Один управляющий шаг всех экземпляров

    Порядок: приводы, интегрирование, столкновения, проверки выхода и
    выбывания, награды, завершение. Выбывшие агенты заморожены, их действия
    обнуляются. Уже завершённые экземпляры не меняются и получают нулевую награду.
    """
    setup = state.setup
    n = state.num_instances
    n_agents = setup.n_agents
    actions = _check_actions(setup, actions, n)

    live = ~state.done
    eliminated_before = state.elimination.eliminated.copy()
    masked = [np.where(eliminated_before[:, [i]], 0.0, np.clip(a, -1.0, 1.0)) for i, a in enumerate(actions)]

    frozen = np.zeros((n, setup.n_bodies), dtype=bool)
    frozen[:, :n_agents] = eliminated_before
    if setup.n_blocks:
        frozen[:, n_agents:] = state.block_out
    frozen |= state.done[:, None]

    new = state.copy()
    new.bodies = _advance_bodies(state, masked, frozen)
    new.last_actions = [np.where(live[:, None], m, old) for m, old in zip(masked, state.last_actions)]
    new.step = state.step + live.astype(np.int64)

    events = StepEvents.empty(n, n_agents)
    events.active_before = ~eliminated_before
    new.events = events
    task_done = _TASK_UPDATES[setup.task](new, events, live) & live

    timeout = live & ~task_done & (new.step >= setup.env.max_episode_len)
    new.elimination.timeout = np.where(live, timeout, state.elimination.timeout)
    new.done = state.done | task_done | timeout

    rewards = np.where(live[:, None], team_rewards(new), 0.0)
    info = {
        "task_done": task_done,
        "timeout": timeout,
        "L": new.elimination.L.copy(),
        "tie": new.elimination.tie.copy(),
        "eliminated": new.elimination.eliminated.copy(),
        "reached": new.reached.copy(),
        "block_out": new.block_out.copy(),
    }
    return StepResult(new, rewards, new.done.copy(), observe(new), info)
