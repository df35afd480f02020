"""Non-strategic solvers: minimize expected turns (turn-aware SSP) or expected
darts (turn-free variant) to check out, ignoring the opponent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .board import IS_DOUBLE, SCORES
from .skill import HitTable
from .turnstates import (ANCHOR, IU_COUNT, _U, evaluate_block_affine,
                         improve_block, iu_index, reachable_cols, transitions)

BIG = 1e15  # stands in for the infinite value of an improper policy


@dataclass(frozen=True)
class SolveConfig:
    start_score: int = 501
    rel_tol: float = 1e-9
    max_policy_iters: int = 100
    max_alternations: int = 50

    def __post_init__(self):
        if not 2 <= self.start_score <= 501:
            raise ValueError("start_score must be in 2..501")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")


@dataclass
class NsSolution:
    """Expected turns-to-go and optimal targets over (s, i, u) states."""

    start_score: int
    values: np.ndarray = field(repr=False)  # (start+1, 183)
    policy: np.ndarray = field(repr=False)  # (start+1, 183) grid target indices

    def value(self, s: int, i: int = 3, u: int = 0) -> float:
        return float(self.values[s, iu_index(i, u)])

    def target(self, s: int, i: int = 3, u: int = 0) -> int:
        return int(self.policy[s, iu_index(i, u)])


def reachable_mask(s: int) -> np.ndarray:
    """Which (i, u) states can occur when the turn started on score s."""
    return _U <= s - 2


def solve_ns(hit: HitTable, cfg: SolveConfig) -> NsSolution:
    """Optimal expected-turns policy, solved score-ascending with per-score
    policy iteration (the bust self-loop is eliminated in closed form)."""
    hit.validate()
    start = cfg.start_score
    values = np.zeros((start + 1, IU_COUNT))
    policy = np.zeros((start + 1, IU_COUNT), dtype=np.int32)
    anchor_vals = np.zeros(start + 1)
    for s in range(2, start + 1):
        kind, nxt = transitions(s)
        pol = policy[s - 1].copy() if s > 2 else np.zeros(IU_COUNT, dtype=np.int32)
        block_vals = np.zeros(IU_COUNT)
        for _ in range(cfg.max_policy_iters):
            alpha, beta = evaluate_block_affine(kind, nxt, hit.probs[pol], 0.0,
                                                anchor_vals, cost=1.0)
            v = alpha[ANCHOR] / (1.0 - beta[ANCHOR]) if beta[ANCHOR] < 1 - 1e-12 else BIG
            block_vals = alpha + beta * v
            new_pol, _ = improve_block(kind, nxt, hit.probs, 0.0, v, anchor_vals,
                                       block_vals, maximize=False,
                                       cols=reachable_cols(s))
            if np.array_equal(new_pol, pol):
                break
            pol = new_pol
        values[s] = block_vals
        policy[s] = pol
        anchor_vals[s] = block_vals[ANCHOR]
    return NsSolution(start_score=start, values=values, policy=policy)


def ns_bellman_residual(sol: NsSolution, hit: HitTable) -> float:
    """max over reachable states of |V - T(V)| / max(V, 1)."""
    anchor_vals = sol.values[:, ANCHOR]
    worst = 0.0
    for s in range(2, sol.start_score + 1):
        kind, nxt = transitions(s)
        v = anchor_vals[s]
        _, q_best = improve_block(kind, nxt, hit.probs, 0.0, v, anchor_vals,
                                  sol.values[s], maximize=False,
                                  cols=reachable_cols(s))
        t_v = q_best.copy()
        t_v[ANCHOR] += 1.0
        mask = reachable_mask(s)
        resid = np.abs(sol.values[s][mask] - t_v[mask]) / np.maximum(sol.values[s][mask], 1.0)
        worst = max(worst, float(resid.max()))
    return worst


# ---------------------------------------------------------------------------
# turn-free dart-count variant

def solve_ns_dartcount(hit: HitTable, cfg: SolveConfig) -> np.ndarray:
    """Expected darts-to-go V(s) ignoring the turn structure (a bust only
    reverts the offending dart).  Returns values indexed by score."""
    hit.validate()
    values = np.zeros(cfg.start_score + 1)
    scores = SCORES[None, :]
    for s in range(2, cfg.start_score + 1):
        remain = s - scores[0]
        checkout = (remain == 0) & IS_DOUBLE
        # a bust reverts the dart; a scoreless dart also leaves s unchanged
        stay = ((remain <= 1) | (remain == s)) & ~checkout
        nv = np.where(stay | checkout, 0.0, values[np.clip(remain, 0, None)])
        num = 1.0 + hit.probs @ nv
        den = 1.0 - hit.probs @ stay.astype(np.float64)
        with np.errstate(divide="ignore"):
            per_action = np.where(den > 1e-12, num / np.maximum(den, 1e-300), BIG)
        values[s] = per_action.min()
    return values


# ---------------------------------------------------------------------------
# Monte-Carlo rollout

def rollout_turns(sol: NsSolution, hit: HitTable, n_legs: int,
                  rng: np.random.Generator, max_darts: int = 100_000) -> np.ndarray:
    """Simulate legs under the NS policy; returns turns-to-checkout per leg."""
    s = np.full(n_legs, sol.start_score, dtype=np.int64)
    i = np.full(n_legs, 3, dtype=np.int64)
    u = np.zeros(n_legs, dtype=np.int64)
    turns = np.zeros(n_legs, dtype=np.int64)
    active = np.ones(n_legs, dtype=bool)
    for _ in range(max_darts):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        turns[idx[i[idx] == 3]] += 1
        iu = np.where(i[idx] == 3, 0, np.where(i[idx] == 2, 1 + u[idx], 62 + u[idx]))
        targets = sol.policy[s[idx], iu]
        rows = hit.probs[targets]
        z = (rows.cumsum(axis=1) < rng.random(len(idx))[:, None]).sum(axis=1)
        z = np.minimum(z, rows.shape[1] - 1)
        h = SCORES[z]
        remain = s[idx] - u[idx] - h
        win = (remain == 0) & IS_DOUBLE[z]
        bust = (remain <= 1) & ~win
        cont = ~win & ~bust & (i[idx] > 1)
        end = ~win & ~bust & (i[idx] == 1)
        active[idx[win]] = False
        s[idx[end]] = remain[end]
        u[idx[cont]] += h[cont]
        i[idx[cont]] -= 1
        reset = idx[bust | end]
        i[reset] = 3
        u[reset] = 0
    if active.any():
        raise RuntimeError("rollout did not terminate within max_darts")
    return turns
