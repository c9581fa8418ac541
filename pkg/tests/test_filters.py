"""Belief recursions: reference values, invariance properties and
trajectory simulation."""

import numpy as np
import pytest

from helpers import P_TP2_3, random_belief_pair, random_tp2_stochastic
from pomdpkit.errors import ZeroLikelihood
from pomdpkit.filters import (
    hmm_filter_step,
    hmm_predictor_step,
    normalizer_vector,
    risk_sensitive_step,
    simulate_trajectory,
    social_action_likelihoods,
    social_learning_step,
)
from pomdpkit.model import PomdpModel, validate_model
from pomdpkit.orders import Comparison, mlr_compare, fosd_compare
from pomdpkit.rng import make_rng, uniform_simplex


def reference_model():
    return validate_model({
        "X": 3, "U": 1, "Y": 3,
        "P": [P_TP2_3.tolist()],
        "B": [P_TP2_3.tolist()],
        "c": [[0.0]] * 3,
        "rho": 0.9,
    })


PI1 = np.array([0.2, 0.2, 0.6])
PI2 = np.array([0.3, 0.2, 0.5])


class TestHmmFilter:
    def test_reference_posteriors(self):
        m = reference_model()
        s1 = hmm_filter_step(PI1, 1, 1, m)
        assert np.allclose(np.round(s1.posterior, 4),
                           [0.5410, 0.2787, 0.1803])
        s2 = hmm_filter_step(PI1, 2, 1, m)
        assert np.allclose(np.round(s2.posterior, 4),
                           [0.1793, 0.4620, 0.3587])

    def test_noninformative_update(self):
        m = validate_model({
            "X": 3, "U": 1, "Y": 4,
            "P": [np.eye(3).tolist()],
            "B": [[[0.25] * 4] * 3],
            "c": [[0.0]] * 3,
            "rho": 0.9,
        })
        s = hmm_filter_step(PI1, 2, 1, m)
        assert np.allclose(s.posterior, PI1)
        assert s.normalizer == pytest.approx(0.25)

    def test_zero_likelihood_raises(self):
        m = validate_model({
            "X": 2, "U": 1, "Y": 2,
            "P": [np.eye(2).tolist()],
            "B": [[[1.0, 0.0], [0.0, 1.0]]],
            "c": [[0.0]] * 2,
            "rho": 0.9,
        })
        with pytest.raises(ZeroLikelihood):
            hmm_filter_step(np.array([1.0, 0.0]), 2, 1, m)

    def test_normalizer_identity(self):
        m = reference_model()
        rng = make_rng(0)
        for _ in range(50):
            pi = uniform_simplex(rng, 1, 3)[0]
            sig = normalizer_vector(pi, 1, m)
            assert sig.sum() == pytest.approx(1.0, abs=1e-12)
            for y in range(1, 4):
                step = hmm_filter_step(pi, y, 1, m)
                assert step.normalizer == pytest.approx(sig[y - 1])


class TestPredictorAndNormalizer:
    def test_reference_ratio(self):
        m = reference_model()
        ratio = hmm_predictor_step(PI1, 1, m) / hmm_predictor_step(PI2, 1, m)
        assert np.allclose(np.round(ratio, 4), [0.8148, 1.0, 1.1282])

    def test_reference_sigma_vectors(self):
        m = reference_model()
        assert np.allclose(np.round(normalizer_vector(PI1, 1, m), 4),
                           [0.2440, 0.3680, 0.3880])
        assert np.allclose(np.round(normalizer_vector(PI2, 1, m), 4),
                           [0.2690, 0.3680, 0.3630])

    def test_sigma_fosd_monotone_in_prior(self):
        m = reference_model()
        assert fosd_compare(normalizer_vector(PI1, 1, m),
                            normalizer_vector(PI2, 1, m)) is Comparison.GE


class TestOrderPreservation:
    def test_bayes_rule_preserves_mlr(self):
        rng = make_rng(1)
        for _ in range(500):
            X = int(rng.integers(2, 5))
            hi, lo = random_belief_pair(rng, X)
            b = rng.uniform(0.05, 1.0, X)
            post_hi = b * hi / (b @ hi)
            post_lo = b * lo / (b @ lo)
            assert mlr_compare(post_hi, post_lo) in (Comparison.GE,
                                                     Comparison.EQ)

    def test_filter_monotone_in_prior_under_tp2(self):
        rng = make_rng(2)
        for _ in range(300):
            X = int(rng.integers(2, 5))
            P = random_tp2_stochastic(rng, X)
            B = random_tp2_stochastic(rng, X, int(rng.integers(2, 5)))
            m = PomdpModel(P[None], B[None], np.zeros((X, 1)), 0.9)
            hi, lo = random_belief_pair(rng, X)
            y = int(rng.integers(1, B.shape[1] + 1))
            try:
                post_hi = hmm_filter_step(hi, y, 1, m).posterior
                post_lo = hmm_filter_step(lo, y, 1, m).posterior
            except ZeroLikelihood:
                continue
            assert mlr_compare(post_hi, post_lo) in (Comparison.GE,
                                                     Comparison.EQ)

    def test_filter_monotone_in_observation_under_tp2(self):
        rng = make_rng(3)
        for _ in range(300):
            X = int(rng.integers(2, 5))
            Y = int(rng.integers(2, 5))
            P = random_tp2_stochastic(rng, X)
            B = random_tp2_stochastic(rng, X, Y)
            m = PomdpModel(P[None], B[None], np.zeros((X, 1)), 0.9)
            pi = uniform_simplex(rng, 1, X)[0]
            posts = [hmm_filter_step(pi, y, 1, m).posterior
                     for y in range(1, Y + 1)]
            for k in range(Y - 1):
                assert mlr_compare(posts[k + 1], posts[k]) in (
                    Comparison.GE, Comparison.EQ)

    def test_fosd_non_closure_witness(self):
        """First-order dominance flips through this Bayes update."""
        pi1 = np.array([1 / 3, 1 / 3, 1 / 3])
        pi2 = np.array([0.0, 2 / 3, 1 / 3])
        assert fosd_compare(pi1, pi2) is Comparison.LE
        b = np.array([0.0, 0.5, 0.5])
        t1 = b * pi1 / (b @ pi1)
        t2 = b * pi2 / (b @ pi2)
        assert np.allclose(t1, [0.0, 0.5, 0.5])
        assert np.allclose(t2, [0.0, 2 / 3, 1 / 3])
        assert fosd_compare(t1, t2) is Comparison.GE


class TestSocialLearning:
    COSTS = np.array([[4.57, 5.57], [2.57, 0.0]])
    B = np.array([[0.9, 0.1], [0.1, 0.9]])

    def test_posterior_matches_enumeration(self):
        pi = np.array([0.5, 0.5])
        L = social_action_likelihoods(pi, self.COSTS, self.B)
        # enumerate the two observations by hand
        expect = np.zeros((2, 2))
        for y in range(2):
            eta = self.B[:, y] * pi
            eta = eta / eta.sum()
            a = int(np.argmin(self.COSTS.T @ eta))
            expect[:, a] += self.B[:, y]
        assert np.allclose(L, expect)
        step = social_learning_step(pi, 1, self.COSTS, self.B)
        manual = expect[:, 0] * pi
        assert np.allclose(step.posterior, manual / manual.sum())

    def test_cascade_region_freezes_belief(self):
        # deep inside the high-pi(2) cascade interval every private
        # signal maps to the same action, so the public belief is fixed
        pi = np.array([0.05, 0.95])
        L = social_action_likelihoods(pi, self.COSTS, self.B)
        assert np.allclose(L[:, 1], 1.0)
        step = social_learning_step(pi, 2, self.COSTS, self.B)
        assert np.allclose(step.posterior, pi)

    def test_single_action_is_uninformative(self):
        pi = np.array([0.3, 0.7])
        step = social_learning_step(pi, 1, self.COSTS[:, :1], self.B)
        assert np.allclose(step.posterior, pi)


class TestRiskSensitive:
    def test_unit_weights_reduce_to_filter(self):
        m = reference_model()
        rng = make_rng(4)
        for _ in range(20):
            pi = uniform_simplex(rng, 1, 3)[0]
            a = risk_sensitive_step(pi, 2, m, np.ones(3))
            b = hmm_filter_step(pi, 2, 1, m)
            assert np.allclose(a.posterior, b.posterior)
            assert a.normalizer == pytest.approx(b.normalizer)

    def test_random_weights_match_formula(self):
        m = reference_model()
        rng = make_rng(5)
        for _ in range(20):
            pi = uniform_simplex(rng, 1, 3)[0]
            w = rng.uniform(0.5, 2.0, 3)
            got = risk_sensitive_step(pi, 1, m, w)
            raw = np.diag(m.B(1)[:, 0]) @ m.P(1).T @ np.diag(w) @ pi
            assert np.allclose(got.posterior, raw / raw.sum())


class TestSimulateTrajectory:
    def test_deterministic_chain_tracks_state(self):
        P = np.array([[0.0, 1.0], [1.0, 0.0]])
        B = np.eye(2)
        m = PomdpModel(P[None], B[None], np.zeros((2, 1)), 0.9)
        traj = simulate_trajectory(m, lambda pi: 1, 20, seed=0)
        for k in range(1, 21):
            expected = np.zeros(2)
            expected[traj.states[k] - 1] = 1.0
            assert np.allclose(traj.beliefs[k], expected)

    def test_seed_reproducibility(self):
        m = reference_model()
        a = simulate_trajectory(m, lambda pi: 1, 50, seed=42)
        b = simulate_trajectory(m, lambda pi: 1, 50, seed=42)
        assert (a.states == b.states).all()
        assert (a.observations == b.observations).all()
        assert a.discounted_cost == b.discounted_cost

    def test_filter_recursion_holds_stepwise(self):
        m = reference_model()
        traj = simulate_trajectory(m, lambda pi: 1, 30, seed=7)
        for k in range(30):
            step = hmm_filter_step(traj.beliefs[k],
                                   int(traj.observations[k]), 1, m)
            assert np.allclose(step.posterior, traj.beliefs[k + 1])

    def test_visit_frequencies_near_stationary(self):
        P = np.array([[0.9, 0.1], [0.4, 0.6]])
        m = PomdpModel(P[None], np.full((1, 2, 2), 0.5),
                       np.zeros((2, 1)), 0.9)
        traj = simulate_trajectory(m, lambda pi: 1, 100_000, seed=1)
        # left eigenvector oracle
        w, v = np.linalg.eig(P.T)
        stat = np.real(v[:, np.argmax(np.real(w))])
        stat = stat / stat.sum()
        freq1 = np.mean(traj.states[1:] == 1)
        se = np.sqrt(stat[0] * (1 - stat[0]) / 100_000) * 3
        # serial correlation widens the band; triple it again
        assert abs(freq1 - stat[0]) < 9 * se

    def test_csv_dump_shape(self):
        m = reference_model()
        traj = simulate_trajectory(m, lambda pi: 1, 5, seed=3)
        lines = traj.to_csv().strip().splitlines()
        assert lines[0].startswith("k,x,y,u,pi1")
        assert len(lines) == 6
