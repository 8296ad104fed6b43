"""Clients for the layout tool's JSON-line environment protocol."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np


class EnvSession:
    """One `serve-env` subprocess speaking line-delimited JSON on stdio."""

    def __init__(self, place_steps: int = 4000, config: str | None = None):
        cmd = [sys.executable, "-m", "cellgen", "serve-env",
               "--place-steps", str(place_steps)]
        if config:
            cmd += ["--config", config]
        self.proc = subprocess.Popen(cmd, stdin=subprocess.PIPE,
                                     stdout=subprocess.PIPE, text=True)

    def _rpc(self, obj: dict) -> dict:
        self.proc.stdin.write(json.dumps(obj) + "\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise RuntimeError("environment server closed the stream")
        resp = json.loads(line)
        if "error" in resp:
            raise RuntimeError(f"environment error: {resp['error']}")
        return resp

    def reset(self, cell, seed):
        resp = self._rpc({"cmd": "reset", "cell": cell, "seed": seed})
        return np.asarray(resp["obs"], dtype=np.float32), resp["info"]

    def step(self, action: int):
        resp = self._rpc({"cmd": "step", "action": int(action)})
        return (np.asarray(resp["obs"], dtype=np.float32), float(resp["reward"]),
                bool(resp["done"]), resp["info"])

    def close(self):
        try:
            self._rpc({"cmd": "close"})
        except Exception:
            pass
        self.proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class EnvPool:
    """A fixed set of sessions stepped in lockstep; episodes reset with
    sequentially drawn seeds so every rollout sees fresh initial routes."""

    def __init__(self, n_envs: int, cell: str, seed_start: int = 0,
                 place_steps: int = 4000, episode_cap: int = 48):
        self.sessions = [EnvSession(place_steps=place_steps) for _ in range(n_envs)]
        self.cell = cell
        self.next_seed = seed_start
        self.episode_cap = episode_cap
        self.obs = [None] * n_envs
        self.steps = [0] * n_envs
        self.drcs = [0] * n_envs

    def _fresh(self, i: int):
        # skip episodes that start already clean
        for _ in range(50):
            obs, info = self.sessions[i].reset(self.cell, self.next_seed)
            self.next_seed += 1
            if info["drc_count"] > 0 and obs[1].any():
                self.obs[i] = obs
                self.steps[i] = 0
                self.drcs[i] = info["drc_count"]
                return
        self.obs[i] = obs
        self.steps[i] = 0
        self.drcs[i] = info["drc_count"]

    def reset_all(self):
        for i in range(len(self.sessions)):
            self._fresh(i)
        return list(self.obs)

    def step(self, actions):
        """Returns (obs_before_reset, rewards, dones, truncations)."""
        out = []
        for i, (sess, action) in enumerate(zip(self.sessions, actions)):
            obs, reward, done, info = sess.step(action)
            self.steps[i] += 1
            self.drcs[i] = info["drc_count"]
            truncated = not done and (self.steps[i] >= self.episode_cap
                                      or not obs[1].any())
            out.append((obs, reward, done, truncated))
            if done or truncated:
                self._fresh(i)
            else:
                self.obs[i] = obs
        return out

    def close(self):
        for s in self.sessions:
            s.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
