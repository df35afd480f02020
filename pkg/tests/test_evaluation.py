import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dartsolve import evaluation, ns_solver
from dartsolve.turnstates import ANCHOR
from conftest import toy_hit_table


def toy_policies():
    return np.zeros((3, 183), dtype=np.int32)


class TestHeadToHead:
    def test_toy_closed_form(self):
        # one action each, so the fixed-policy value equals the race value
        hA, hB = toy_hit_table(0.8), toy_hit_table(0.3)
        cfg = ns_solver.SolveConfig(start_score=2)
        h = evaluation.head_to_head(toy_policies(), toy_policies(), hA, hB, cfg)
        pa, pb = 1 - 0.2**3, 1 - 0.7**3
        v = pa / (1.0 - (1 - pa) * (1 - pb))
        assert abs(h.value(2, 2) - v) < 1e-12
        assert abs(h.value_b(2, 2) - (pb + (1 - pb) * (1 - v))) < 1e-12

    def test_identical_players_mirror(self, small_pro_table):
        cfg = ns_solver.SolveConfig(start_score=41)
        ns = ns_solver.solve_ns(small_pro_table, cfg)
        pol = np.asarray(ns.policy)
        h = evaluation.head_to_head(pol, pol, small_pro_table,
                                    small_pro_table, cfg)
        # same skill and policy on both sides: B's table is A's with the
        # score axes swapped
        assert np.allclose(h.valuesA, h.valuesB, atol=1e-12)
        assert (h.valuesA[2:, 2:] >= -1e-12).all()
        assert (h.valuesA[2:, 2:] <= 1.0 + 1e-12).all()

    def test_matches_simulation(self, coarse_hit_table):
        cfg = ns_solver.SolveConfig(start_score=41)
        ns = ns_solver.solve_ns(coarse_hit_table, cfg)
        pol = np.asarray(ns.policy)
        h = evaluation.head_to_head(pol, pol, coarse_hit_table,
                                    coarse_hit_table, cfg)
        rng = np.random.default_rng(3)
        won = evaluation.simulate_legs(pol, pol, coarse_hit_table,
                                       coarse_hit_table, 41, 20_000, rng)
        se = won.std() / np.sqrt(len(won))
        assert abs(won.mean() - h.value(41, 41)) < 3 * se


def enumerate_match(n_legs, pA, pB, a_starts=True):
    """Oracle: sum over all 2^N leg-outcome sequences with alternating
    starters."""
    first = 0 if a_starts else 1
    k_win = (n_legs - 1) // 2 + 1
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n_legs):
        p = 1.0
        for leg, a_wins in enumerate(bits):
            pr = pA if (first + leg) % 2 == 0 else pB
            p *= pr if a_wins else 1.0 - pr
        if sum(bits) >= k_win:
            total += p
    return total


class TestMatchWinProb:
    def test_single_leg(self):
        assert evaluation.match_win_prob(evaluation.MatchSpec(1, 0.7, 0.4)) == 0.7
        assert evaluation.match_win_prob(evaluation.MatchSpec(1, 0.7, 0.4),
                                         a_starts=False) == 0.4

    def test_degenerate_probabilities(self):
        assert evaluation.match_win_prob(evaluation.MatchSpec(5, 1.0, 1.0)) == 1.0
        assert evaluation.match_win_prob(evaluation.MatchSpec(5, 0.0, 0.0)) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(pA=st.floats(0.0, 1.0), pB=st.floats(0.0, 1.0),
           n=st.sampled_from([1, 3, 5, 7, 9]), a_starts=st.booleans())
    def test_matches_exhaustive_enumeration(self, pA, pB, n, a_starts):
        spec = evaluation.MatchSpec(n, pA, pB)
        exact = enumerate_match(n, pA, pB, a_starts)
        assert abs(evaluation.match_win_prob(spec, a_starts) - exact) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(pA=st.floats(0.0, 1.0), pB=st.floats(0.0, 1.0),
           n=st.sampled_from([1, 3, 7]))
    def test_role_swap_complement(self, pA, pB, n):
        # viewing the same match from the other chair: the opponent starts
        # the legs we do not, and wins each leg we lose
        mine = evaluation.match_win_prob(evaluation.MatchSpec(n, pA, pB))
        theirs = evaluation.match_win_prob(
            evaluation.MatchSpec(n, 1.0 - pB, 1.0 - pA), a_starts=False)
        assert abs(mine + theirs - 1.0) < 1e-12

    def test_longer_match_amplifies_edge(self):
        probs = [evaluation.match_win_prob(evaluation.MatchSpec(n, 0.55, 0.55))
                 for n in (1, 5, 15, 31)]
        assert all(b > a for a, b in zip(probs, probs[1:]))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            evaluation.MatchSpec(4, 0.5, 0.5)
        with pytest.raises(ValueError):
            evaluation.MatchSpec(0, 0.5, 0.5)
        with pytest.raises(ValueError):
            evaluation.MatchSpec(3, 1.2, 0.5)


class TestGain:
    def test_no_edge_no_gain(self):
        assert evaluation.gain(0.6, 0.4, 0.6, 0.4, 11) == 0.0

    def test_gain_grows_with_match_length(self):
        g1 = evaluation.gain(0.52, 0.48, 0.51, 0.47, 1)
        g31 = evaluation.gain(0.52, 0.48, 0.51, 0.47, 31)
        assert g31 > g1 > 0.0


class TestSimulateLegs:
    def test_toy_matches_closed_form(self):
        hA, hB = toy_hit_table(0.8), toy_hit_table(0.3)
        pa, pb = 1 - 0.2**3, 1 - 0.7**3
        v = pa / (1.0 - (1 - pa) * (1 - pb))
        rng = np.random.default_rng(5)
        won = evaluation.simulate_legs(toy_policies(), toy_policies(),
                                       hA, hB, 2, 40_000, rng)
        se = np.sqrt(v * (1 - v) / len(won))
        assert abs(won.mean() - v) < 3 * se

    def test_opponent_aware_policy_accepted(self, small_pro_table, eq41):
        rng = np.random.default_rng(9)
        won = evaluation.simulate_legs(eq41.policyA, eq41.policyB,
                                       small_pro_table, small_pro_table,
                                       41, 5_000, rng)
        v = eq41.value(41, 41)
        se = np.sqrt(v * (1 - v) / len(won))
        assert abs(won.mean() - v) < 4 * se
