"""
HAPPO: командные критики и последовательное обновление агентов команды
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from loguru import logger

from numcore import (
    LOG_STD_MAX,
    LOG_STD_MIN,
    AdamState,
    adam_step,
    clip_by_global_norm,
    gaussian_entropy,
    gaussian_log_prob,
    gaussian_log_prob_grads,
    init_mlp,
    mlp_backward,
)
from utils.errors import ConfigError, NumericError
from .buffer import RolloutBuffer, compute_gae
from .learner import TeamLearner
from .networks import CriticNet, PolicyNet


@dataclass(frozen=True)
class HappoConfig:
    """Гиперпараметры обновления"""

    clip_eps: float = 0.2
    discount: float = 0.99
    gae_lambda: float = 0.95
    epochs: int = 4
    num_minibatches: int = 4
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    normalize_advantages: bool = True
    max_grad_norm: float = 0.5
    critic_input: str = "team_concat"
    shared_critic_ablation: bool = False

    def __post_init__(self):
        if not 0 < self.clip_eps < 1:
            raise ConfigError(f"clip_eps должен лежать в (0, 1): {self.clip_eps}")
        if not 0 < self.discount <= 1:
            raise ConfigError(f"discount должен лежать в (0, 1]: {self.discount}")
        if not 0 <= self.gae_lambda <= 1:
            raise ConfigError(f"gae_lambda должен лежать в [0, 1]: {self.gae_lambda}")
        if self.epochs < 1 or self.num_minibatches < 1:
            raise ConfigError("epochs и num_minibatches должны быть >= 1")
        if self.critic_input != "team_concat":
            raise ConfigError(f"Неизвестный режим входа критика: {self.critic_input}")


def ppo_clip_loss(ratio, advantage, eps: float):
    """-min(r * A, clip(r, 1 - eps, 1 + eps) * A)"""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    return -np.minimum(ratio * advantage, np.clip(ratio, 1.0 - eps, 1.0 + eps) * advantage)


def ppo_clip_grad(ratio, advantage, eps: float):
    """Производная ppo_clip_loss по ratio: -A вне зажатой ветви, иначе 0"""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    clipped = ((advantage > 0) & (ratio > 1.0 + eps)) | ((advantage < 0) & (ratio < 1.0 - eps))
    return np.where(clipped, 0.0, -advantage)


def minibatch_indices(rng: np.random.Generator, n: int, count: int) -> List[np.ndarray]:
    """Случайное разбиение n примеров на count почти равных частей"""
    return [mb for mb in np.array_split(rng.permutation(n), min(count, n)) if len(mb)]


@dataclass
class TeamStats:
    policy_loss: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    approx_kl: float = 0.0
    clip_fraction: float = 0.0
    adv_mean: float = 0.0
    adv_std: float = 0.0
    grad_norm: float = 0.0
    updated: bool = False


@dataclass
class UpdateStats:
    teams: List[TeamStats] = field(default_factory=list)

    def as_row(self) -> Dict[str, float]:
        row = {}
        for t, s in enumerate(self.teams):
            for name in ("policy_loss", "value_loss", "entropy", "approx_kl", "clip_fraction",
                         "adv_mean", "adv_std", "grad_norm"):
                row[f"{name}_t{t}"] = getattr(s, name)
        return row


def _normalize(adv: np.ndarray, team: int) -> np.ndarray:
    std = float(adv.std())
    if std < 1e-8:
        logger.warning(f"Команда {team}: дисперсия преимуществ нулевая, нормализация пропущена")
        return adv
    return (adv - adv.mean()) / std


def _critic_step(critic: CriticNet, opt: AdamState, x: np.ndarray, target: np.ndarray,
                 cfg: HappoConfig) -> Tuple[CriticNet, AdamState, float]:
    """Один шаг регрессии критика: value_coef * mean((V - R)^2)"""
    v = critic.value(x)
    err = v - target
    loss = cfg.value_coef * float(np.mean(err ** 2))
    upstream = (2.0 * cfg.value_coef / len(target)) * err[:, None]
    grads, _ = mlp_backward(critic.mlp, x, upstream)
    clipped, _ = clip_by_global_norm(grads.tensors(), cfg.max_grad_norm)
    critic, opt = adam_step(critic, clipped, opt, cfg.critic_lr)
    return critic, opt, loss


def _actor_step(policy: PolicyNet, opt: AdamState, obs: np.ndarray, actions: np.ndarray,
                old_lp: np.ndarray, adv: np.ndarray, weight: np.ndarray,
                cfg: HappoConfig) -> Tuple[PolicyNet, AdamState, Dict[str, float]]:
    """
    Один шаг актора на минибатче

    Потеря: взвешенное среднее ppo_clip_loss минус entropy_coef * энтропия.
    weight - маска живых агентов, нормированная на их число.
    """
    head = policy.head(obs)
    lp = gaussian_log_prob(head, actions)
    ratio = np.exp(lp - old_lp)
    per_sample = ppo_clip_loss(ratio, adv, cfg.clip_eps)
    entropy = gaussian_entropy(head)
    loss = float(np.sum(weight * per_sample)) - cfg.entropy_coef * entropy
    if not np.isfinite(loss):
        raise NumericError(f"Нечисловая потеря актора: {loss}")

    d_lp = weight * ppo_clip_grad(ratio, adv, cfg.clip_eps) * ratio
    d_mean, d_log_std = gaussian_log_prob_grads(head, actions)
    grads, _ = mlp_backward(policy.mlp, obs, d_lp[:, None] * d_mean)
    g_log_std = np.sum(d_lp[:, None] * d_log_std, axis=0) - cfg.entropy_coef
    clipped, norm = clip_by_global_norm(grads.tensors() + [g_log_std], cfg.max_grad_norm)
    policy, opt = adam_step(policy, clipped, opt, cfg.actor_lr)
    # Голова зажимает log_std; хранимое значение держим в тех же границах
    policy = PolicyNet(policy.mlp, np.clip(policy.log_std, LOG_STD_MIN, LOG_STD_MAX))

    clip_frac = float(np.sum(weight * (np.abs(ratio - 1.0) > cfg.clip_eps)))
    kl = float(np.sum(weight * (old_lp - lp)))
    return policy, opt, {"loss": loss, "entropy": entropy, "clip_fraction": clip_frac, "approx_kl": kl, "grad_norm": norm}


def _mask_weight(alive: np.ndarray) -> np.ndarray:
    count = float(np.sum(alive))
    return alive.astype(np.float64) / max(count, 1.0)


def happo_update(
    learners: Sequence[TeamLearner],
    buffer: RolloutBuffer,
    cfg: HappoConfig,
    rng: np.random.Generator,
) -> Tuple[List[TeamLearner], UpdateStats]:
    """
    Обновление всех незамороженных команд по собранному буферу

    Для каждой команды: регрессия критика к возвратам, затем акторы по одному
    в случайной перестановке. Преимущество агента умножается на накопленное
    отношение вероятностей уже обновлённых товарищей (множитель M).
    Замороженные стороны возвращаются как есть.

    Returns:
        (новые стороны, статистика обновления)
    """
    if buffer.advantages is None:
        raise NumericError("Буфер не финализирован: вызовите finalize перед обновлением")

    out: List[TeamLearner] = []
    stats = UpdateStats()
    n = buffer.horizon * buffer.num_instances
    all_agents = list(range(len(buffer.observations)))

    for team, learner in enumerate(learners):
        team_stats = TeamStats()
        stats.teams.append(team_stats)
        if learner.frozen:
            out.append(learner)
            continue
        learner = learner.copy()
        members = buffer.team_members(team)

        adv_raw = buffer.flat(buffer.advantages[..., team])
        team_stats.adv_mean, team_stats.adv_std = float(adv_raw.mean()), float(adv_raw.std())
        adv = _normalize(adv_raw, team) if cfg.normalize_advantages else adv_raw

        if learner.critic is not None:
            critic_members = all_agents if cfg.shared_critic_ablation else members
            x = buffer.flat(buffer.critic_input(critic_members))
            target = buffer.flat(buffer.returns[..., team])
            losses = []
            for epoch in range(cfg.epochs):
                for k, mb in enumerate(minibatch_indices(rng, n, cfg.num_minibatches)):
                    critic, opt, loss = _critic_step(learner.critic, learner.critic_opt, x[mb], target[mb], cfg)
                    if not np.isfinite(loss):
                        logger.error(f"Команда {team}: нечисловая потеря критика, эпоха {epoch}, минибатч {k}")
                        raise NumericError(f"Нечисловая потеря критика команды {team}: эпоха {epoch}, минибатч {k}")
                    learner.critic, learner.critic_opt = critic, opt
                    losses.append(loss)
            team_stats.value_loss = float(np.mean(losses))

        multiplier = np.ones(n)
        actor_logs = []
        for local in rng.permutation(len(members)):
            agent = members[int(local)]
            obs = buffer.flat(buffer.observations[agent])
            actions = buffer.flat(buffer.actions[agent])
            old_lp = buffer.flat(buffer.log_probs[agent])
            alive = buffer.flat(buffer.alive[..., agent])
            policy, opt = learner.policies[int(local)], learner.actor_opts[int(local)]
            for epoch in range(cfg.epochs):
                for k, mb in enumerate(minibatch_indices(rng, n, cfg.num_minibatches)):
                    try:
                        policy, opt, log = _actor_step(
                            policy, opt, obs[mb], actions[mb], old_lp[mb],
                            multiplier[mb] * adv[mb], _mask_weight(alive[mb]), cfg,
                        )
                    except NumericError as e:
                        logger.error(f"Команда {team}, агент {agent}: обновление прервано, эпоха {epoch}, минибатч {k}")
                        raise NumericError(f"{e} (команда {team}, агент {agent}, эпоха {epoch}, минибатч {k})") from e
                    actor_logs.append(log)
                    logger.debug(
                        f"Команда {team}, агент {agent}, эпоха {epoch}, минибатч {k}: "
                        f"потеря {log['loss']:.5f}, KL {log['approx_kl']:.5f}"
                    )
            learner.policies[int(local)], learner.actor_opts[int(local)] = policy, opt
            new_lp = policy.log_prob(obs, actions)
            multiplier = multiplier * np.where(alive, np.exp(new_lp - old_lp), 1.0)

        if actor_logs:
            for name in ("loss", "entropy", "clip_fraction", "approx_kl", "grad_norm"):
                value = float(np.mean([log[name] for log in actor_logs]))
                setattr(team_stats, "policy_loss" if name == "loss" else name, value)
        team_stats.updated = True
        out.append(learner)
    return out, stats


def zero_sum_critic_toy(
    c: float = 1.0,
    steps: int = 2000,
    discount: float = 0.99,
    episode_len: int = 1,
    horizon: int = 32,
    lr: float = 1e-2,
    seed: int = 0,
) -> Dict[str, object]:
    """
    Общий и командные критики на игре без состояния с наградами +c / -c

    Каждый эпизод длится episode_len шагов. Общий критик учится на средней
    награде команд (ноль), командные - на своих. Возвращает итоговые оценки
    и истинные дисконтированные возвраты.
    """
    if horizon % episode_len:
        raise ConfigError("horizon должен быть кратен episode_len")
    rng = np.random.default_rng(seed)
    x = np.ones((horizon, 1))
    cfg = HappoConfig(value_coef=0.5, critic_lr=lr, max_grad_norm=1e9)
    rewards = np.stack([np.full(horizon, c), np.full(horizon, -c)], axis=-1)
    dones = np.broadcast_to((np.arange(horizon) % episode_len == episode_len - 1)[:, None], rewards.shape)

    team_critics = [CriticNet(init_mlp([1, 16, 1], rng)) for _ in range(2)]
    shared = CriticNet(init_mlp([1, 16, 1], rng))
    team_opts = [AdamState.zeros_like(cr) for cr in team_critics]
    shared_opt = AdamState.zeros_like(shared)
    shared_rewards = rewards.mean(axis=-1)

    for _ in range(steps):
        for t in range(2):
            values = np.full(horizon, float(team_critics[t].value(x[:1])[0]))
            _, returns = compute_gae(rewards[:, t], values, dones[:, t], 0.0, discount, 1.0)
            team_critics[t], team_opts[t], _ = _critic_step(team_critics[t], team_opts[t], x, returns, cfg)
        values = np.full(horizon, float(shared.value(x[:1])[0]))
        _, returns = compute_gae(shared_rewards, values, dones[:, 0], 0.0, discount, 1.0)
        shared, shared_opt, _ = _critic_step(shared, shared_opt, x, returns, cfg)

    # Критик без состояния сходится к среднему возврату по позициям эпизода
    true_team, _ = compute_gae(rewards[:episode_len, 0], np.zeros(episode_len), dones[:episode_len, 0], 0.0, discount, 1.0)
    true_return = float(true_team.mean())
    result = {
        "shared": float(shared.value(x[:1])[0]),
        "team": [float(cr.value(x[:1])[0]) for cr in team_critics],
        "true": [true_return, -true_return],
    }
    logger.info(
        f"Игрушечная игра с нулевой суммой: общий критик {result['shared']:.4f}, "
        f"командные {result['team'][0]:.4f} / {result['team'][1]:.4f}"
    )
    return result
