"""PPO (clipped objective) for the DRC-fix policy, trained against the
layout tool's environment protocol over parallel subprocess sessions."""

from __future__ import annotations

import dataclasses
import json
import time

import numpy as np
import torch
import torch.nn.functional as F

from .envclient import EnvPool, EnvSession
from .models import FixPolicy
from .weights_io import save_weights


@dataclasses.dataclass
class PpoConfig:
    cell: str = "latch"
    n_envs: int = 6
    rollout_steps: int = 32
    iterations: int = 36
    episode_cap: int = 40
    lr: float = 7e-4
    gamma: float = 0.98
    gae_lambda: float = 0.9
    clip: float = 0.2
    epochs: int = 2
    minibatch: int = 96
    value_coef: float = 0.5
    entropy_coef: float = 0.02
    entropy_final: float = 0.003
    max_grad_norm: float = 0.5
    place_steps: int = 4000
    seed: int = 0


def masked_dist(logits: torch.Tensor) -> torch.distributions.Categorical:
    return torch.distributions.Categorical(logits=logits)


def collect_rollout(pool: EnvPool, model: FixPolicy, steps: int):
    """One synchronous rollout across the pool; returns stacked tensors."""
    obs_buf, act_buf, logp_buf, rew_buf, val_buf = [], [], [], [], []
    done_buf, trunc_buf = [], []
    with torch.inference_mode():
        for _ in range(steps):
            obs = torch.as_tensor(np.stack(pool.obs), dtype=torch.float32)
            logits, values = model(obs)
            dist = masked_dist(logits)
            actions = dist.sample()
            results = pool.step(actions.tolist())
            obs_buf.append(obs)
            act_buf.append(actions)
            logp_buf.append(dist.log_prob(actions))
            val_buf.append(values)
            rew_buf.append(torch.tensor([r for _o, r, _d, _t in results]))
            done_buf.append(torch.tensor([float(d) for _o, _r, d, _t in results]))
            trunc_buf.append(torch.tensor([float(t) for _o, _r, _d, t in results]))
        final_obs = torch.as_tensor(np.stack(pool.obs), dtype=torch.float32)
        _logits, final_values = model(final_obs)
    return (torch.stack(obs_buf), torch.stack(act_buf), torch.stack(logp_buf),
            torch.stack(rew_buf), torch.stack(val_buf), torch.stack(done_buf),
            torch.stack(trunc_buf), final_values)


def gae(rewards, values, dones, truncs, final_values, gamma, lam):
    """Generalized advantage estimation. Cap truncations are treated as
    terminal (the swept state's value is unavailable after auto-reset)."""
    steps, n = rewards.shape
    adv = torch.zeros_like(rewards)
    last = torch.zeros(n)
    next_values = torch.cat([values[1:], final_values.unsqueeze(0)], dim=0)
    for t in reversed(range(steps)):
        boundary = torch.clamp(dones[t] + truncs[t], max=1.0)
        delta = rewards[t] + gamma * next_values[t] * (1.0 - boundary) - values[t]
        last = delta + gamma * lam * (1.0 - boundary) * last
        adv[t] = last
    return adv, adv + values


def ppo_update(model, optimizer, batch, cfg: PpoConfig, entropy_coef: float):
    obs, actions, old_logp, advantages, returns = batch
    n = obs.shape[0]
    idx = torch.randperm(n)
    stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0}
    count = 0
    for _ in range(cfg.epochs):
        for start in range(0, n, cfg.minibatch):
            mb = idx[start:start + cfg.minibatch]
            logits, values = model(obs[mb])
            dist = masked_dist(logits)
            logp = dist.log_prob(actions[mb])
            ratio = torch.exp(logp - old_logp[mb])
            adv = advantages[mb]
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
            surrogate = torch.min(ratio * adv,
                                  torch.clamp(ratio, 1 - cfg.clip, 1 + cfg.clip) * adv)
            policy_loss = -surrogate.mean()
            value_loss = F.mse_loss(values, returns[mb])
            entropy = dist.entropy().mean()
            loss = policy_loss + cfg.value_coef * value_loss - entropy_coef * entropy
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.max_grad_norm)
            optimizer.step()
            stats["policy_loss"] += policy_loss.item()
            stats["value_loss"] += value_loss.item()
            stats["entropy"] += entropy.item()
            count += 1
    return {k: v / max(count, 1) for k, v in stats.items()}


def train_drcfix(cfg: PpoConfig, out_path=None, log=print):
    """Standard-recipe PPO over parallel env sessions; returns (model, curve)."""
    torch.manual_seed(cfg.seed)
    model = FixPolicy()
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    curve = []
    with EnvPool(cfg.n_envs, cfg.cell, seed_start=cfg.seed * 100_000,
                 place_steps=cfg.place_steps, episode_cap=cfg.episode_cap) as pool:
        pool.reset_all()
        for it in range(cfg.iterations):
            t0 = time.monotonic()
            frac = it / max(cfg.iterations - 1, 1)
            entropy_coef = cfg.entropy_coef + frac * (cfg.entropy_final - cfg.entropy_coef)
            obs, actions, logp, rewards, values, dones, truncs, final_v = \
                collect_rollout(pool, model, cfg.rollout_steps)
            adv, returns = gae(rewards, values, dones, truncs, final_v,
                               cfg.gamma, cfg.gae_lambda)
            flat = (obs.reshape(-1, *obs.shape[2:]), actions.reshape(-1),
                    logp.reshape(-1), adv.reshape(-1), returns.reshape(-1))
            stats = ppo_update(model, optimizer, flat, cfg, entropy_coef)
            stats["iteration"] = it
            stats["mean_reward"] = float(rewards.mean())
            stats["seconds"] = round(time.monotonic() - t0, 2)
            curve.append(stats)
            log(json.dumps(stats))
    if out_path:
        save_weights(out_path, model.export_tensors())
    return model, curve


def evaluate_model(model: FixPolicy, cell: str, seeds, step_cap: int = 64,
                   place_steps: int = 4000):
    """Mean residual DRC count over held-out episodes (argmax rollout).
    Episodes that reset clean are skipped so both policies face real work."""
    residuals = []
    initials = []
    with EnvSession(place_steps=place_steps) as sess:
        for seed in seeds:
            obs, info = sess.reset(cell, seed)
            if info["drc_count"] == 0:
                continue
            initials.append(info["drc_count"])
            drc = info["drc_count"]
            for _ in range(step_cap):
                if not obs[1].any():
                    break
                with torch.inference_mode():
                    logits, _v = model(torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0))
                action = int(torch.argmax(logits[0]))
                obs, _r, done, info = sess.step(action)
                drc = info["drc_count"]
                if done:
                    break
            residuals.append(drc)
    return residuals, initials


def evaluate_random(cell: str, seeds, step_cap: int = 64, rng_seed: int = 0,
                    place_steps: int = 4000):
    """Uniform-over-mask baseline on the same episodes."""
    rng = np.random.default_rng(rng_seed)
    residuals = []
    initials = []
    with EnvSession(place_steps=place_steps) as sess:
        for seed in seeds:
            obs, info = sess.reset(cell, seed)
            if info["drc_count"] == 0:
                continue
            initials.append(info["drc_count"])
            drc = info["drc_count"]
            for _ in range(step_cap):
                legal = np.flatnonzero(obs[1].reshape(-1))
                if len(legal) == 0:
                    break
                obs, _r, done, info = sess.step(int(rng.choice(legal)))
                drc = info["drc_count"]
                if done:
                    break
            residuals.append(drc)
    return residuals, initials
