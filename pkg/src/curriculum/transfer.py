"""
Перенос контрольной точки между стадиями учебного плана
"""

from dataclasses import replace
from typing import Sequence

from loguru import logger

from utils.errors import ContractError, IncompatibilityError
from .layout import ObservationLayout
from .plan import CurriculumPlan, make_layout


def check_compatible(old: ObservationLayout, new: ObservationLayout, from_stage: int, to_stage: int) -> None:
    """
    Раскладки совместимы, если ширины равны и каждый слот, активный на
    from_stage, лежит на том же месте и остаётся активным на to_stage.
    """
    if old.total_width != new.total_width:
        raise IncompatibilityError(f"Ширина наблюдения {old.total_width} != {new.total_width}")
    for slot in old.active_slots(from_stage):
        if not new.has_slot(slot.name):
            raise IncompatibilityError(f"Слот '{slot.name}' отсутствует в новой раскладке")
        target = new.slot(slot.name)
        if (target.offset, target.width) != (slot.offset, slot.width):
            raise IncompatibilityError(
                f"Слот '{slot.name}' сдвинут: [{slot.offset}:+{slot.width}] -> [{target.offset}:+{target.width}]"
            )
        if not target.is_active(to_stage):
            raise IncompatibilityError(f"Слот '{slot.name}' деактивируется на стадии {to_stage}")


def _carry(learners: Sequence) -> list:
    carried = []
    for learner in learners:
        copy = learner.copy()
        copy.reset_optimizers()
        copy.frozen = False
        carried.append(copy)
    return carried


def transfer_checkpoint(ckpt, from_stage: int, to_stage: int, plan: CurriculumPlan):
    """
    Контрольная точка для следующей стадии

    Параметры сетей копируются без изменений, моменты Adam обнуляются,
    раскладки берутся из плана и сверяются с сохранёнными.

    Args:
        ckpt: Контрольная точка стадии from_stage (поля stage, learners, layouts, teams)
        from_stage: Стадия, на которой получена точка
        to_stage: Целевая стадия, to_stage > from_stage
        plan: Учебный план

    Returns:
        Новая контрольная точка; состояние сред не переносится
    """
    if not from_stage < to_stage:
        raise ContractError(f"Перенос возможен только вперёд: {from_stage} -> {to_stage}")
    if to_stage >= plan.n_stages:
        raise ContractError(f"Стадия {to_stage} вне плана из {plan.n_stages} стадий")
    if ckpt.stage != from_stage:
        raise ContractError(f"Контрольная точка относится к стадии {ckpt.stage}, а не {from_stage}")

    teams = ckpt.teams
    agents = [a for t in teams for a in t.agents]
    if len(agents) != len(ckpt.layouts):
        raise IncompatibilityError(f"В точке {len(ckpt.layouts)} раскладок, в составе {len(agents)} агентов")
    layouts = []
    for agent, old in zip(agents, ckpt.layouts):
        new = make_layout(plan, agent, teams)
        check_compatible(old, new, from_stage, to_stage)
        layouts.append(new)

    logger.info(f"Перенос стадии {from_stage} -> {to_stage}: параметры скопированы, оптимизаторы сброшены")
    return replace(
        ckpt,
        stage=to_stage,
        stage_start=ckpt.update,
        learners=_carry(ckpt.learners),
        initial_learners=_carry(ckpt.learners),
        layouts=tuple(layouts),
        env_state=None,
    )
