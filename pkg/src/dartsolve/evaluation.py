"""Fixed-policy evaluation: head-to-head leg win probabilities, match-level
win probability over a best-of-N race, and the match-level gain of switching
strategies.  No optimization happens here — both players' aims are inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, fsum

import numpy as np

from .board import IS_DOUBLE, SCORES
from .ns_solver import SolveConfig
from .skill import HitTable
from .turnstates import ANCHOR, IU_COUNT, evaluate_block_affine, iu_index, transitions
from .zsg_solver import OpponentTurnKernel, turn_kernel  # noqa: F401  (re-export)


def _policy_row(policy: np.ndarray, s: int, opp: int) -> np.ndarray:
    """Aim targets for one score block; accepts context-free (S+1, 183) or
    opponent-aware (S+1, S+1, 183) policy tables."""
    return policy[s] if policy.ndim == 2 else policy[s, opp]


@dataclass
class HeadToHead:
    """Leg win probabilities when both players follow fixed policies.

    valuesA[sA, sB, iu] = P(A wins | A throwing); valuesB[sB, sA, iu]
    likewise for B.
    """

    start_score: int
    valuesA: np.ndarray = field(repr=False)
    valuesB: np.ndarray = field(repr=False)

    def value(self, sA: int, sB: int, i: int = 3, u: int = 0) -> float:
        return float(self.valuesA[sA, sB, iu_index(i, u)])

    def value_b(self, sB: int, sA: int, i: int = 3, u: int = 0) -> float:
        return float(self.valuesB[sB, sA, iu_index(i, u)])


def head_to_head(policyA: np.ndarray, policyB: np.ndarray, hitA: HitTable,
                 hitB: HitTable, cfg: SolveConfig) -> HeadToHead:
    """Evaluate a fixed policy pair over every (sA, sB, i, u) state.

    Same block structure as the game solver: each score pair couples the two
    players' within-turn states through the turn handoff, leaving a 2x2
    linear system per block; with the policies fixed there is nothing to
    iterate.
    """
    hitA.validate()
    hitB.validate()
    S = cfg.start_score
    valuesA = np.zeros((S + 1, S + 1, IU_COUNT))
    valuesB = np.zeros((S + 1, S + 1, IU_COUNT))
    for sB in range(2, S + 1):
        kindB, nxtB = transitions(sB)
        for sA in range(2, S + 1):
            kindA, nxtA = transitions(sA)
            end_a = 1.0 - valuesB[sB, :sA, ANCHOR]
            end_b = 1.0 - valuesA[sA, :sB, ANCHOR]
            rowsA = hitA.probs[_policy_row(policyA, sA, sB)]
            rowsB = hitB.probs[_policy_row(policyB, sB, sA)]
            aA, bA = evaluate_block_affine(kindA, nxtA, rowsA, 1.0, end_a)
            aB, bB = evaluate_block_affine(kindB, nxtB, rowsB, 1.0, end_b)
            den = 1.0 - bA[ANCHOR] * bB[ANCHOR]
            vA = (aA[ANCHOR] + bA[ANCHOR] * (1.0 - aB[ANCHOR] - bB[ANCHOR])) / den \
                if den > 1e-15 else 0.0
            vB = aB[ANCHOR] + bB[ANCHOR] * (1.0 - vA)
            valuesA[sA, sB] = aA + bA * (1.0 - vB)
            valuesB[sB, sA] = aB + bB * (1.0 - vA)
    return HeadToHead(start_score=S, valuesA=valuesA, valuesB=valuesB)


# ---------------------------------------------------------------------------
# match-level combinatorics

@dataclass(frozen=True)
class MatchSpec:
    """Best-of-N match: N odd legs, alternating starters, A starts leg 1.

    pA = P(A wins a leg A starts); pB = P(A wins a leg B starts).
    """

    n_legs: int
    pA: float
    pB: float

    def __post_init__(self):
        if self.n_legs < 1 or self.n_legs % 2 == 0:
            raise ValueError("n_legs must be odd and >= 1")
        if not (0.0 <= self.pA <= 1.0 and 0.0 <= self.pB <= 1.0):
            raise ValueError("leg probabilities must lie in [0, 1]")


def _binom_pmf(n: int, p: float) -> np.ndarray:
    k = np.arange(n + 1)
    pmf = np.array([comb(n, int(j)) for j in k], dtype=np.float64)
    return pmf * np.power(p, k) * np.power(1.0 - p, n - k)


def match_win_prob(spec: MatchSpec, a_starts: bool = True) -> float:
    """P(A wins the match), exactly.

    All N legs are played; A wins iff it takes at least K+1 of them, where
    N = 2K+1.  A's wins in its K+1 started legs and in the opponent's K are
    independent binomials, so the match probability is a short convolution.
    """
    K = (spec.n_legs - 1) // 2
    p_own, p_other = (spec.pA, spec.pB) if a_starts else (spec.pB, spec.pA)
    pmf_own = _binom_pmf(K + 1, p_own)      # legs A starts
    pmf_other = _binom_pmf(K, p_other)      # legs the opponent starts
    # tail P(other-leg wins >= K+1-j); the j=0 term is identically 0
    tail = np.concatenate([np.cumsum(pmf_other[::-1])[::-1], [0.0]])
    terms = [pmf_own[j] * (1.0 if K + 1 - j <= 0 else tail[min(K + 1 - j, K + 1)])
             for j in range(K + 2)]
    return fsum(terms)


def gain(pA_star: float, pB_star: float, pA_ns: float, pB_ns: float,
         n_legs: int) -> float:
    """Match-level win-probability increase from the starred strategy's leg
    probabilities over the baseline's, both against the same opponent."""
    return (match_win_prob(MatchSpec(n_legs, pA_star, pB_star))
            - match_win_prob(MatchSpec(n_legs, pA_ns, pB_ns)))


# ---------------------------------------------------------------------------
# Monte-Carlo leg simulator

def simulate_legs(policyA: np.ndarray, policyB: np.ndarray, hitA: HitTable,
                  hitB: HitTable, start: int, n_legs: int,
                  rng: np.random.Generator, max_darts: int = 1_000_000) -> np.ndarray:
    """Play n_legs legs with both players on fixed policies; A throws first.
    Returns a boolean array, True where A won."""
    s = np.full((n_legs, 2), start, dtype=np.int64)  # column 0 = A, 1 = B
    turn = np.zeros(n_legs, dtype=np.int64)          # whose throw
    i = np.full(n_legs, 3, dtype=np.int64)
    u = np.zeros(n_legs, dtype=np.int64)
    a_won = np.zeros(n_legs, dtype=bool)
    active = np.ones(n_legs, dtype=bool)
    tables = (hitA.probs, hitB.probs)
    policies = (policyA, policyB)
    for _ in range(max_darts):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        iu = np.where(i[idx] == 3, 0,
                      np.where(i[idx] == 2, 1 + u[idx], 62 + u[idx]))
        # snapshot: a handoff during this pass must not grant the receiving
        # player a dart until the next pass
        turn_now = turn[idx].copy()
        for p in (0, 1):
            sel = idx[turn_now == p]
            if sel.size == 0:
                continue
            own, opp = s[sel, p], s[sel, 1 - p]
            pol = policies[p]
            tgt = pol[own, iu[turn_now == p]] if pol.ndim == 2 \
                else pol[own, opp, iu[turn_now == p]]
            rows = tables[p][tgt]
            z = (rows.cumsum(axis=1) < rng.random(sel.size)[:, None]).sum(axis=1)
            z = np.minimum(z, rows.shape[1] - 1)
            h = SCORES[z]
            remain = own - u[sel] - h
            win = (remain == 0) & IS_DOUBLE[z]
            bust = (remain <= 1) & ~win
            cont = ~win & ~bust & (i[sel] > 1)
            end = ~win & ~bust & (i[sel] == 1)
            active[sel[win]] = False
            a_won[sel[win]] = p == 0
            s[sel[end], p] = remain[end]
            u[sel[cont]] += h[cont]
            i[sel[cont]] -= 1
            over = sel[bust | end]
            i[over], u[over] = 3, 0
            turn[over] = 1 - p
    if active.any():
        raise RuntimeError("simulation did not terminate within max_darts")
    return a_won
