"""Two-player zero-sum solvers: best response to a fixed opponent and the
equilibrium of the alternating-turns game.

States are (sA, sB, i, u) with the first score belonging to the player about
to throw.  Values are win probabilities of the thrower.  Solutions hold two
tables, one per player, each indexed (own score, opponent score, iu); the two
are coupled because a finished turn hands the dart to the opponent.

Each (sA, sB) pair is solved as one block: A's 183 within-turn states plus
B's 183 states of the opposite block, joined through their two start-of-turn
anchors (A busting puts B on throw and vice versa).  Policy evaluation leaves
the handoff value symbolic, so each block reduces to a 2x2 linear solve; the
equilibrium of a block is found by alternating exact best responses, which
bracket the value from above and below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .board import IS_DOUBLE, parse_outcome, score as outcome_score
from .ns_solver import SolveConfig, solve_ns
from .skill import HitTable
from .turnstates import (ANCHOR, IU_COUNT, STAGE_SLICES, BUST, END, MID, WIN,
                         evaluate_block_affine, improve_block, iu_index,
                         reachable_cols, transitions)

A_WIN = "A_WIN"
B_WIN = "B_WIN"


@dataclass(frozen=True)
class ZsgState:
    """Thrower's score, opponent's score, throws left, points so far this turn."""

    sA: int
    sB: int
    i: int = 3
    u: int = 0

    def __post_init__(self):
        if not (2 <= self.sA and 2 <= self.sB):
            raise ValueError("live states need both scores >= 2")
        iu_index(self.i, self.u)  # validates (i, u)


def br_transition(st: ZsgState, z: int | str, sB_next: int):
    """Successor of throwing outcome z from st, given the opponent's score
    after their interleaved turn is sB_next (only consumed when the turn
    passes).  Returns a ZsgState, A_WIN, or B_WIN."""
    z = parse_outcome(z) if isinstance(z, str) else z
    h = outcome_score(z)
    is_double = IS_DOUBLE[z]
    remain = st.sA - st.u - h
    if remain == 0 and is_double:
        return A_WIN
    if remain <= 1 or (st.i == 1 and remain == st.sA):
        # bust (or a scoreless final dart): turn over on the original score
        if sB_next == 0:
            return B_WIN
        return ZsgState(st.sA, sB_next, 3, 0)
    if st.i > 1:
        return ZsgState(st.sA, st.sB, st.i - 1, st.u + h)
    if sB_next == 0:
        return B_WIN
    return ZsgState(remain, sB_next, 3, 0)


@dataclass
class ZsgSolution:
    """Equilibrium win probabilities and aim policies for both players.

    valuesA[sA, sB, iu] is P(A wins) with A about to throw; valuesB[sB, sA, iu]
    is P(B wins) with B about to throw.  J (the thrower's table) is valuesA.
    bounds_lower/upper bracket valuesA at the block anchor; alternations counts
    best-response rounds per block.
    """

    start_score: int
    valuesA: np.ndarray = field(repr=False)  # (S+1, S+1, 183)
    valuesB: np.ndarray = field(repr=False)
    policyA: np.ndarray = field(repr=False)  # int32, same shape
    policyB: np.ndarray = field(repr=False)
    bounds_lower: np.ndarray = field(repr=False)  # (S+1, S+1)
    bounds_upper: np.ndarray = field(repr=False)
    alternations: np.ndarray = field(repr=False)  # int32 (S+1, S+1)

    @property
    def J(self) -> np.ndarray:
        return self.valuesA

    def value(self, sA: int, sB: int, i: int = 3, u: int = 0) -> float:
        return float(self.valuesA[sA, sB, iu_index(i, u)])

    def target_a(self, sA: int, sB: int, i: int = 3, u: int = 0) -> int:
        return int(self.policyA[sA, sB, iu_index(i, u)])

    def target_b(self, sB: int, sA: int, i: int = 3, u: int = 0) -> int:
        return int(self.policyB[sB, sA, iu_index(i, u)])


def _block_best_response(kind, nxt, probs, pol, end_vals, opp_a0, opp_b0,
                         max_iters, cols=None):
    """Exact best response on one block, the opponent's block frozen.

    The opponent's anchor is affine in ours: v_opp = opp_a0 + opp_b0*(1 - v).
    Returns (policy, v, block values, alpha, beta) with the last evaluation's
    affine coefficients (value = alpha + beta * handoff)."""
    seen = {pol.tobytes()}
    best = None
    for _ in range(max_iters):
        alpha, beta = evaluate_block_affine(kind, nxt, probs[pol], 1.0, end_vals)
        den = 1.0 - beta[ANCHOR] * opp_b0
        # den -> 0 only if both sides bust forever; then nobody ever wins
        v = (alpha[ANCHOR] + beta[ANCHOR] * (1.0 - opp_a0 - opp_b0)) / den \
            if den > 0.0 else 0.0
        v = min(max(v, 0.0), 1.0)  # win probability; shed roundoff overshoot
        handoff = 1.0 - (opp_a0 + opp_b0 * (1.0 - v))
        blk = alpha + beta * handoff
        if best is None or v > best[1]:
            best = (pol, v, blk, alpha, beta)
        new_pol, _ = improve_block(kind, nxt, probs, 1.0, handoff, end_vals,
                                   blk, maximize=True, cols=cols)
        if np.array_equal(new_pol, pol):
            return pol, v, blk, alpha, beta
        # revisiting a policy means the iteration entered a cycle of
        # numerically tied policies; keep the best self-consistent iterate
        key = new_pol.tobytes()
        if key in seen:
            break
        seen.add(key)
        pol = new_pol
    return best


def solve_equilibrium(hitA: HitTable, hitB: HitTable, cfg: SolveConfig) -> ZsgSolution:
    """Equilibrium of the full game by per-block alternating best responses.

    Blocks are visited opponent-score-major, both scores ascending, so every
    cross-block handoff value already exists.  Each block alternates an exact
    A-side best response (an upper bound on A's value) with a B-side one (a
    lower bound) until the bracket closes below rel_tol.  B's policy starts
    from its single-player solution, A's warm-starts from the previous block.
    When the two players share a hit table, each unordered score pair is
    solved once and mirrored.
    """
    hitA.validate()
    hitB.validate()
    S = cfg.start_score
    symmetric = hitA is hitB or (hitA.probs.shape == hitB.probs.shape
                                 and np.array_equal(hitA.probs, hitB.probs))
    nsA = solve_ns(hitA, cfg)
    nsB = nsA if symmetric else solve_ns(hitB, cfg)

    shape = (S + 1, S + 1, IU_COUNT)
    valuesA = np.zeros(shape)
    valuesB = np.zeros(shape)
    policyA = np.zeros(shape, dtype=np.int32)
    policyB = np.zeros(shape, dtype=np.int32)
    lower = np.zeros((S + 1, S + 1))
    upper = np.zeros((S + 1, S + 1))
    alts = np.zeros((S + 1, S + 1), dtype=np.int32)

    if symmetric:
        pairs = ((sA, sB) for sA in range(2, S + 1) for sB in range(2, sA + 1))
    else:
        pairs = ((sA, sB) for sB in range(2, S + 1) for sA in range(2, S + 1))

    failed = []
    for sA, sB in pairs:
        kindA, nxtA = transitions(sA)
        kindB, nxtB = transitions(sB)
        end_a = 1.0 - valuesB[sB, :sA, ANCHOR]  # turn ends on r < sA: B throws
        end_b = 1.0 - valuesA[sA, :sB, ANCHOR]
        polA = policyA[sA - 1, sB].copy() if sA > 2 else nsA.policy[sA].copy()
        polB = policyB[sB, sA - 1].copy() if sA > 2 else nsB.policy[sB].copy()

        aB, bB = evaluate_block_affine(kindB, nxtB, hitB.probs[polB], 1.0, end_b)
        up = lo = vB = vb_up = vb_lo = 0.0
        blkA = blkB = None
        converged = False
        mirror = symmetric and sA != sB  # B-side bounds get stored there too
        for alt in range(1, cfg.max_alternations + 1):
            polA, vA, blkA, aA, bA = _block_best_response(
                kindA, nxtA, hitA.probs, polA, end_a, aB[ANCHOR], bB[ANCHOR],
                cfg.max_policy_iters, cols=reachable_cols(sA))
            up = vA
            vb_lo = aB[ANCHOR] + bB[ANCHOR] * (1.0 - up)  # B frozen vs A's BR
            polB, vB, blkB, aB, bB = _block_best_response(
                kindB, nxtB, hitB.probs, polB, end_b, aA[ANCHOR], bA[ANCHOR],
                cfg.max_policy_iters, cols=reachable_cols(sB))
            vb_up = vB
            lo = aA[ANCHOR] + bA[ANCHOR] * (1.0 - vB)
            gap = up - lo
            if gap < cfg.rel_tol * max(abs(up), 1e-12) and not (
                    mirror and vb_up - vb_lo >=
                    cfg.rel_tol * max(abs(vb_up), 1e-12)):
                converged = True
                break
        if not converged:
            failed.append((sA, sB, up - lo))
        blkA = aA + bA * (1.0 - vB)  # re-evaluate A against B's final response
        valuesA[sA, sB] = blkA
        valuesB[sB, sA] = blkB
        policyA[sA, sB] = polA
        policyB[sB, sA] = polB
        lower[sA, sB], upper[sA, sB] = lo, up
        alts[sA, sB] = alt
        if symmetric and sA != sB:
            valuesA[sB, sA] = blkB
            valuesB[sA, sB] = blkA
            policyA[sB, sA] = polB
            policyB[sA, sB] = polA
            lower[sB, sA], upper[sB, sA] = vb_lo, vb_up
            alts[sB, sA] = alt
    if failed:
        worst = max(failed, key=lambda t: t[2])
        raise RuntimeError(
            f"{len(failed)} blocks did not close their best-response bracket "
            f"within {cfg.max_alternations} alternations; worst gap "
            f"{worst[2]:.3g} at (sA={worst[0]}, sB={worst[1]})")
    return ZsgSolution(start_score=S, valuesA=valuesA, valuesB=valuesB,
                       policyA=policyA, policyB=policyB, bounds_lower=lower,
                       bounds_upper=upper, alternations=alts)


# ---------------------------------------------------------------------------
# opponent turn kernel and best response against it

@dataclass(frozen=True)
class OpponentTurnKernel:
    """Distribution of the opponent's end-of-turn score.

    probs[s, ctx, s'] = P(their score moves s -> s' during one turn | the
    thrower's own score is ctx); s'=0 is a checkout.  Context matters because
    an opponent playing the game policy aims differently against different
    scores; single-player policies give context-free rows.
    """

    probs: np.ndarray = field(repr=False)  # (S+1, C+1, S+1)

    def validate(self, tol: float = 1e-9) -> None:
        p = self.probs[2:, :, :]
        sums = p.sum(axis=2)
        if np.abs(sums - 1.0).max() > tol:
            raise ValueError("kernel rows must sum to 1")
        if np.abs(p[:, :, 1]).max() > 0:
            raise ValueError("a score of 1 is unreachable")
        S = self.probs.shape[0] - 1
        for s in range(2, S):
            if np.abs(self.probs[s, :, s + 1:]).max() > 0:
                raise ValueError("scores cannot increase")


def _turn_row(kind, nxt, hit_rows, s, out_len):
    """End-of-turn score distribution for one start score under fixed aims."""
    mass = np.zeros(IU_COUNT)
    mass[ANCHOR] = 1.0
    out = np.zeros(out_len)
    for i in (3, 2, 1):
        sl = STAGE_SLICES[i]
        flow = mass[sl, None] * hit_rows[sl]
        k, nx = kind[sl], nxt[sl]
        out[0] += flow[k == WIN].sum()
        out[s] += flow[k == BUST].sum()
        endm = k == END
        np.add.at(out, nx[endm], flow[endm])
        midm = k == MID
        np.add.at(mass, nx[midm], flow[midm])
    return out


def turn_kernel(policy: np.ndarray, hit: HitTable, s_max: int,
                ctx_max: int) -> OpponentTurnKernel:
    """Compile a fixed policy into an OpponentTurnKernel.

    ``policy`` is (S+1, 183) for context-free aims or (S+1, C+1, 183) for
    aims that depend on the other player's score."""
    probs = np.zeros((s_max + 1, ctx_max + 1, s_max + 1))
    for s in range(2, s_max + 1):
        kind, nxt = transitions(s)
        if policy.ndim == 2:
            probs[s, :] = _turn_row(kind, nxt, hit.probs[policy[s]], s, s_max + 1)
        else:
            for ctx in range(ctx_max + 1):
                probs[s, ctx] = _turn_row(kind, nxt, hit.probs[policy[s, ctx]],
                                          s, s_max + 1)
    kern = OpponentTurnKernel(probs=probs)
    kern.validate()
    return kern


def identity_kernel(s_max: int, ctx_max: int) -> OpponentTurnKernel:
    """An opponent whose score never moves (e.g. one who always misses)."""
    probs = np.zeros((s_max + 1, ctx_max + 1, s_max + 1))
    for s in range(2, s_max + 1):
        probs[s, :, s] = 1.0
    return OpponentTurnKernel(probs=probs)


@dataclass
class BrSolution:
    """Best-response values and policy against a fixed opponent kernel."""

    start_score: int
    values: np.ndarray = field(repr=False)  # (S+1, S+1, 183): [own, opp, iu]
    policy: np.ndarray = field(repr=False)

    def value(self, sA: int, sB: int, i: int = 3, u: int = 0) -> float:
        return float(self.values[sA, sB, iu_index(i, u)])


def best_response(hitA: HitTable, kernelB: OpponentTurnKernel,
                  cfg: SolveConfig) -> BrSolution:
    """Optimal play against an opponent reduced to a turn kernel.

    After A's turn ends on r, B's score moves sB -> sB' with probability
    kernelB[sB, r, sB']; sB'=0 loses the leg.  Solved opponent-score-major,
    both scores ascending, each block by policy iteration; the bust branch
    (which may loop on the same block through a stationary opponent) stays
    symbolic and is resolved in closed form.
    """
    hitA.validate()
    kernelB.validate()
    S = cfg.start_score
    values = np.zeros((S + 1, S + 1, IU_COUNT))
    policy = np.zeros((S + 1, S + 1, IU_COUNT), dtype=np.int32)
    anchors = values[:, :, ANCHOR]
    for sB in range(2, S + 1):
        K = kernelB.probs[sB]  # (C+1, S+1)
        for sA in range(2, S + 1):
            kind, nxt = transitions(sA)
            end_vals = np.zeros(sA)
            rs = np.arange(2, sA)
            if rs.size:
                end_vals[2:] = np.einsum("rj,rj->r", K[rs, 2:sB + 1],
                                         anchors[2:sA, 2:sB + 1])
            c0 = K[sA, 2:sB] @ anchors[sA, 2:sB]  # opponent moves below sB
            c1 = K[sA, sB]                        # opponent stays: self-loop
            pol = policy[sA - 1, sB].copy() if sA > 2 \
                else np.zeros(IU_COUNT, dtype=np.int32)
            seen = {pol.tobytes()}
            best = None
            for _ in range(cfg.max_policy_iters):
                alpha, beta = evaluate_block_affine(kind, nxt,
                                                    hitA.probs[pol], 1.0,
                                                    end_vals)
                den = 1.0 - beta[ANCHOR] * c1
                v = (alpha[ANCHOR] + beta[ANCHOR] * c0) / den \
                    if den > 0.0 else 0.0
                v = min(max(v, 0.0), 1.0)
                bust_val = c0 + c1 * v
                blk = alpha + beta * bust_val
                if best is None or v > best[1]:
                    best = (pol, v, blk)
                new_pol, _ = improve_block(kind, nxt, hitA.probs, 1.0,
                                           bust_val, end_vals, blk,
                                           maximize=True,
                                           cols=reachable_cols(sA))
                if np.array_equal(new_pol, pol):
                    best = (pol, v, blk)
                    break
                key = new_pol.tobytes()
                if key in seen:
                    break
                seen.add(key)
                pol = new_pol
            pol, v, blk = best
            values[sA, sB] = blk
            policy[sA, sB] = pol
    return BrSolution(start_score=S, values=values, policy=policy)


# ---------------------------------------------------------------------------
# one-step lookahead

def _lookahead_values(sol: ZsgSolution, st: ZsgState) -> np.ndarray:
    """Continuation value of each outcome from st under the stored policies."""
    kind, nxt = transitions(st.sA)
    k = iu_index(st.i, st.u)
    row_k, row_n = kind[k], nxt[k]
    vb = sol.valuesB[st.sB, :, ANCHOR]
    vnext = np.where(row_k == WIN, 1.0, 1.0 - vb[st.sA])
    mid = row_k == MID
    vnext[mid] = sol.valuesA[st.sA, st.sB, row_n[mid]]
    endm = row_k == END
    vnext[endm] = 1.0 - vb[row_n[endm]]
    return vnext


def q_values(sol: ZsgSolution, hit: HitTable, st: ZsgState) -> np.ndarray:
    """Win probability of aiming at each grid target now, then playing the
    stored equilibrium; shape (n_targets,)."""
    return hit.probs @ _lookahead_values(sol, st)


def q_value(sol: ZsgSolution, hit: HitTable, st: ZsgState, target: int) -> float:
    if not 0 <= target < len(hit.grid):
        raise ValueError(f"target index {target} outside the action grid")
    return float(hit.probs[target] @ _lookahead_values(sol, st))


def heatmap(sol: ZsgSolution, hit: HitTable, st: ZsgState,
            baseline: float) -> np.ndarray:
    """Per-target win-probability change versus a baseline value at st
    (typically the single-player policy evaluated against this opponent)."""
    return q_values(sol, hit, st) - baseline
