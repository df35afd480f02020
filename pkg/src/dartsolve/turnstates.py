"""Within-turn state layout and transition structure shared by the solvers.

A turn from start-of-turn score s has 1 + 61 + 121 = 183 (throws-left, points)
states laid out as:

    index 0        (i=3, u=0)
    index 1..61    (i=2, u=0..60)
    index 62..182  (i=1, u=0..120)

For each state and each of the 63 outcomes the transition is one of: checkout
(WIN), turn voided (BUST), another throw in the same turn (MID), or turn ends
on a new score (END).  A turn ending back on s (three misses) is equivalent to
a bust and is folded into BUST.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .board import IS_DOUBLE, SCORES

IU_COUNT = 183
ANCHOR = 0  # (i=3, u=0), the start-of-turn state

_I = np.concatenate([[3], np.full(61, 2), np.full(121, 1)])
_U = np.concatenate([[0], np.arange(61), np.arange(121)])

WIN, BUST, MID, END = 0, 1, 2, 3


def iu_index(i: int, u: int) -> int:
    if i == 3:
        if u != 0:
            raise ValueError("u must be 0 at the start of a turn")
        return 0
    if i == 2:
        if not 0 <= u <= 60:
            raise ValueError("u out of range for i=2")
        return 1 + u
    if i == 1:
        if not 0 <= u <= 120:
            raise ValueError("u out of range for i=1")
        return 62 + u
    raise ValueError("i must be 1, 2, or 3")


def iu_state(idx: int) -> tuple[int, int]:
    return int(_I[idx]), int(_U[idx])


# stage index ranges in dependency order: i=1 feeds i=2 feeds i=3
STAGE_SLICES = {1: slice(62, 183), 2: slice(1, 62), 3: slice(0, 1)}


@lru_cache(maxsize=None)
def transitions(s: int) -> tuple[np.ndarray, np.ndarray]:
    """(kind, nxt) arrays of shape (183, 63) for start-of-turn score s.

    ``nxt`` holds the child iu index for MID and the new score for END.
    States with u > s - 2 are unreachable; they come out all-BUST, feed
    nothing, and are never entered.
    """
    scores = SCORES[None, :]
    u = _U[:, None]
    i = _I[:, None]
    remain = s - u - scores
    checkout = (remain == 0) & IS_DOUBLE[None, :]
    kind = np.where(checkout, WIN,
                    np.where(remain <= 1, BUST,
                             np.where(i > 1, MID, END))).astype(np.int8)
    child = np.where(i == 3, 1 + u + scores, 62 + u + scores)
    nxt = np.where(kind == MID, child, np.where(kind == END, remain, 0))
    # a scoreless final throw returns the thrower to s: same as a bust
    self_end = (kind == END) & (nxt == s)
    kind[self_end] = BUST
    nxt[self_end] = 0
    return kind, nxt.astype(np.int32)


@lru_cache(maxsize=None)
def reachable_cols(s: int) -> np.ndarray | None:
    """iu indices with u <= s - 2, the only states a turn from score s can
    visit.  None means all 183 are reachable (s >= 122)."""
    if s >= 122:
        return None
    m = s - 2
    return np.concatenate([np.arange(0, 2 + min(60, m)),
                           np.arange(62, 63 + m)])


def evaluate_block_affine(kind: np.ndarray, nxt: np.ndarray, hit_rows: np.ndarray,
                          win_value: float, end_values: np.ndarray,
                          cost: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Policy evaluation of one score block with the self-loop left symbolic.

    ``hit_rows``: (183, 63) outcome probabilities of each state's chosen target.
    ``end_values``: value after the turn ends on score r, indexed by r (length
    s+1; entries for unreachable r are ignored).  Returns (alpha, beta) with
    state value = alpha + beta * x, where x is the value of returning to the
    start-of-turn state (bust).  ``cost`` is added at the anchor state only.
    """
    alpha = np.zeros(IU_COUNT)
    beta = np.zeros(IU_COUNT)
    end_idx = np.where(kind == END, nxt, 0)
    a_out = np.where(kind == WIN, win_value, 0.0)
    a_out = np.where(kind == END, end_values[end_idx], a_out)
    b_out = (kind == BUST).astype(np.float64)
    for i in (1, 2, 3):
        sl = STAGE_SLICES[i]
        a = a_out[sl].copy()
        b = b_out[sl].copy()
        if i > 1:
            mid = kind[sl] == MID
            ch = nxt[sl]
            a[mid] = alpha[ch][mid]
            b[mid] = beta[ch][mid]
        alpha[sl] = np.einsum("ij,ij->i", hit_rows[sl], a)
        beta[sl] = np.einsum("ij,ij->i", hit_rows[sl], b)
    alpha[ANCHOR] += cost
    return alpha, beta


def improve_block(kind: np.ndarray, nxt: np.ndarray, hit_probs: np.ndarray,
                  win_value: float, bust_value: float, end_values: np.ndarray,
                  block_values: np.ndarray, maximize: bool,
                  cols: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One policy-improvement sweep over a score block.

    ``hit_probs``: (n_targets, 63) hit table. Returns (policy, q_best) where
    policy[state] is the greedy target index (ties break to the lowest index)
    and q_best the corresponding one-throw lookahead value (without stage cost).
    ``cols`` restricts the sweep to reachable states; the rest are all-bust,
    so their lookahead value is bust_value regardless of the aim.
    """
    mid_idx = np.where(kind == MID, nxt, 0)
    end_idx = np.where(kind == END, nxt, 0)
    vnext = np.where(kind == WIN, win_value, bust_value)
    vnext = np.where(kind == MID, block_values[mid_idx], vnext)
    vnext = np.where(kind == END, end_values[end_idx], vnext)
    if cols is None:
        q = hit_probs @ vnext.T  # (n_targets, 183)
        policy = (np.argmax(q, axis=0) if maximize else np.argmin(q, axis=0)).astype(np.int32)
        return policy, q[policy, np.arange(IU_COUNT)]
    q = hit_probs @ vnext[cols].T
    best = (np.argmax(q, axis=0) if maximize else np.argmin(q, axis=0)).astype(np.int32)
    policy = np.zeros(IU_COUNT, dtype=np.int32)
    policy[cols] = best
    q_best = np.full(IU_COUNT, bust_value)
    q_best[cols] = q[best, np.arange(len(cols))]
    return policy, q_best
