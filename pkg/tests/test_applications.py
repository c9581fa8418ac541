"""Application builders: replacement, quickest detection, sampling
control, search, social learning, bandits and their structural claims."""

import numpy as np
import pytest

from helpers import random_tp2_stochastic
from pomdpkit.apps import (
    absorption_pmf,
    build_machine_replacement,
    build_quickest_detection,
    build_sampling_control,
    build_search_pomdp,
    gittins_index,
    gittins_index_table_2state,
    opportunistic_bandit_policy,
    project_to_mlr_band,
    run_bandit_benchmark,
    social_learning_partition,
    solve_social_learning_stop,
    transformed_detection_costs,
)
from pomdpkit.errors import (
    InvalidProbability,
    NonTransient,
    PreconditionFailed,
    PriorMassOnState1,
)
from pomdpkit.model import PomdpModel, validate_model
from pomdpkit.orders import Comparison, mlr_compare
from pomdpkit.rng import make_rng, uniform_simplex
from pomdpkit.stopgrid import solve_stopping_grid
from pomdpkit.structural import extract_thresholds_2state


class TestMachineReplacement:
    def test_printed_matrices(self):
        m = build_machine_replacement(0.3, 0.9, 0.8, 1.5, [1.0, 0.0])
        assert np.allclose(m.P(1), [[0, 1], [0, 1]])
        assert np.allclose(m.P(2), [[1, 0], [0.3, 0.7]])
        assert np.allclose(m.B(1), [[0.9, 0.1], [0.2, 0.8]])
        assert np.allclose(m.cost_vector(1), [1.5, 1.5])

    def test_zero_deterioration_identity(self):
        m = build_machine_replacement(0.0, 0.9, 0.8, 1.0, [1.0, 0.0])
        assert np.allclose(m.P(2), np.eye(2))

    def test_passes_validation(self):
        m = build_machine_replacement(0.3, 0.9, 0.8, 1.5, [1.0, 0.0])
        validate_model(m)


class TestQuickestDetection:
    def test_geometric_change_time_mean(self):
        sm = build_quickest_detection(
            [0.0, 1.0], [[0.9]], [0.1], [[0.7, 0.3], [0.2, 0.8]],
            d=0.05, beta=1.0, delay_kind="classical")
        nu = absorption_pmf([0.0, 1.0], [[0.9]], [0.1], 400)
        ks = np.arange(401)
        assert nu.sum() == pytest.approx(1.0, abs=1e-15)
        assert (nu @ ks) == pytest.approx(10.0, abs=1e-6)

    def test_absorption_pmf_matches_monte_carlo(self):
        P_bar = np.array([[0.5, 0.2], [0.3, 0.6]])
        P_col = np.array([0.3, 0.1])
        pi0 = np.array([0.0, 0.5, 0.5])
        nu = absorption_pmf(pi0, P_bar, P_col, 60)
        rng = make_rng(0)
        P = np.zeros((3, 3))
        P[0, 0] = 1.0
        P[1:, 0] = P_col
        P[1:, 1:] = P_bar
        hits = np.zeros(61)
        n = 40_000
        for _ in range(n):
            x = int(rng.choice(3, p=pi0))
            for k in range(1, 61):
                x = int(rng.choice(3, p=P[x]))
                if x == 0:
                    hits[k] += 1
                    break
        mc = hits / n
        for k in range(1, 30):
            se = np.sqrt(max(nu[k] * (1 - nu[k]), 1e-9) / n)
            assert abs(mc[k] - nu[k]) < 4 * se + 1e-3

    def test_kolmogorov_shiryayev_form(self):
        sm = build_quickest_detection(
            [0.0, 1.0], [[0.9]], [0.1], [[0.7, 0.3], [0.2, 0.8]],
            d=0.05, beta=1.0, alpha=0.0, delay_kind="classical")
        pi = np.array([0.3, 0.7])
        assert sm.cost(pi, 1) == pytest.approx(1.0 * 0.7)   # false alarm
        assert sm.cost(pi, 2) == pytest.approx(0.05 * 0.3)  # delay

    def test_precondition_errors(self):
        with pytest.raises(PriorMassOnState1):
            build_quickest_detection([0.5, 0.5], [[0.9]], [0.1],
                                     [[0.7, 0.3], [0.2, 0.8]], 1.0, 1.0)
        with pytest.raises(NonTransient):
            build_quickest_detection([0.0, 1.0], [[1.0]], [0.0],
                                     [[0.7, 0.3], [0.2, 0.8]], 1.0, 1.0)

    def test_cost_transformation_policy_invariant(self):
        sm = build_quickest_detection(
            [0.0, 0.5, 0.5], [[0.5, 0.2], [0.3, 0.6]], [0.3, 0.1],
            [[0.7, 0.2, 0.1], [0.15, 0.5, 0.35], [0.15, 0.5, 0.35]],
            d=2.5, beta=2.0, alpha=0.5, delay_kind="predicted", rho=0.9)
        f = np.array([0.0, 1.0, 1.0])
        new_stop, new_cont = transformed_detection_costs(sm, 0.5, 2.0, f)
        from pomdpkit.model import StoppingModel

        shifted = StoppingModel(P=sm.P, B=sm.B, stop_cost=new_stop,
                                continue_cost=new_cont, discount=0.9)
        a = solve_stopping_grid(sm, 120, epsilon=1e-10)
        b = solve_stopping_grid(shifted, 120, epsilon=1e-10)
        agree = (a.stop_mask == b.stop_mask).mean()
        assert agree > 0.99

    def test_risk_sensitive_exponential_identity(self):
        """Both sides of the exponential-cost identity agree by
        simulation for the 2-state model."""
        eps, d, beta = 0.4, 0.6, 0.9
        P = np.array([[1.0, 0.0], [0.1, 0.9]])
        B = np.array([[0.7, 0.3], [0.2, 0.8]])
        rng = make_rng(1)
        n = 30_000
        lhs = np.empty(n)
        rhs = np.empty(n)
        for t in range(n):
            x = 1  # state 2 (0-indexed 1): pre-change start
            tau0 = None
            # fixed-threshold policy on the exact filter
            pi = np.array([0.0, 1.0])
            k = 0
            stopped = None
            while k < 200:
                if pi[0] > 0.65 and stopped is None:
                    stopped = k
                    break
                x = int(rng.choice(2, p=P[x]))
                y = int(rng.choice(2, p=B[x]))
                raw = B[:, y] * (P.T @ pi)
                pi = raw / raw.sum()
                k += 1
                if x == 0 and tau0 is None:
                    tau0 = k
            tau = stopped if stopped is not None else 200
            if tau0 is None:
                tau0 = 201
            # direct cumulative exponential cost
            delay_steps = max(tau - tau0, 0)
            fa = 1.0 if tau < tau0 else 0.0
            lhs[t] = np.exp(eps * (d * delay_steps + beta * fa))
            rhs[t] = (np.exp(eps * beta) - 1) * fa \
                + np.exp(eps * d * delay_steps)
        se = np.std(lhs - rhs) / np.sqrt(n)
        assert abs(lhs.mean() - rhs.mean()) <= 3 * se + 1e-9


class TestSamplingControl:
    def test_single_interval_costs(self):
        m = build_sampling_control([[1.0, 0.0], [0.1, 0.9]],
                                   [[0.7, 0.3], [0.2, 0.8]],
                                   intervals=[1], m=0.25, d=0.4, rho=0.95)
        # C_1 = m + c with c = d e1 on the original states
        assert np.allclose(m.cost_vector(2)[:2], [0.65, 0.25])
        assert m.cost_vector(2)[2] == 0.0

    def test_matrix_power_sums(self):
        P = np.array([[1.0, 0.0], [0.1, 0.9]])
        m = build_sampling_control(P, [[0.7, 0.3], [0.2, 0.8]],
                                   intervals=[3], m=0.0, d=1.0, rho=0.95)
        accum = np.eye(2) + P + P @ P
        expect = accum @ np.array([1.0, 0.0])
        assert np.allclose(m.cost_vector(2)[:2], expect)
        assert np.allclose(m.P(2)[:2, :2], np.linalg.matrix_power(P, 3))

    def test_threshold_structure_with_monotone_intervals(self):
        m = build_sampling_control([[1.0, 0.0], [0.1, 0.9]],
                                   [[0.7, 0.3], [0.2, 0.8]],
                                   intervals=[1, 2, 4, 8], m=0.05, d=0.08,
                                   rho=0.97)
        from pomdpkit.grid import GridValue

        g = GridValue(m, 150, interpolation="freudenthal")
        g.iterate(epsilon=1e-10)
        ts = np.linspace(0, 1, 601)
        edge = np.column_stack([1 - ts, ts, 0 * ts])
        acts = g.lookahead_actions(edge)
        jumps = np.diff(acts)
        assert (jumps >= 0).all()          # intervals grow with pi(2)
        assert (jumps > 0).sum() <= 4      # at most L interior thresholds
        assert acts[0] == 1                # announce near the change


class TestSearchPomdp:
    def test_augmented_dimensions(self):
        m = build_search_pomdp([[0.8, 0.2], [0.3, 0.7]],
                               overlook=[0.2, 0.3], blocking=[0.1, 0.1])
        assert m.num_states == 5
        assert m.num_obs == 3
        validate_model(m)

    def test_perfect_search_detects(self):
        m = build_search_pomdp([[1.0, 0.0], [0.0, 1.0]],
                               overlook=[0.0, 0.0], blocking=[0.0, 0.0])
        # searching cell 1 with the target there transitions to found
        assert m.P(1)[0, 4] == pytest.approx(1.0)

    def test_invalid_probability(self):
        with pytest.raises(InvalidProbability):
            build_search_pomdp([[0.8, 0.2], [0.3, 0.7]],
                               overlook=[1.2, 0.0], blocking=[0.0, 0.0])

    def test_detection_reward_negative_costs(self):
        m = build_search_pomdp([[0.8, 0.2], [0.3, 0.7]],
                               overlook=[0.2, 0.3], blocking=[0.1, 0.1],
                               cost_kind="detect")
        assert m.cost_vector(1)[0] == pytest.approx(-(0.9 * 0.8))
        assert m.cost_vector(1)[4] == 0.0


class TestSocialLearning:
    COSTS = [[4.57, 5.57], [2.57, 0.0]]
    B = [[0.9, 0.1], [0.1, 0.9]]

    def test_partition_reference_values(self):
        part = social_learning_partition(self.COSTS, self.B)
        assert part.kappas[1] == pytest.approx(0.778, abs=5e-4)
        assert part.kappas[2] == pytest.approx(0.280, abs=5e-4)
        assert part.kappas[3] == pytest.approx(0.0414, abs=5e-4)

    def test_symmetric_costs_centre_split(self):
        part = social_learning_partition([[1.0, 2.0], [2.0, 1.0]],
                                         [[0.8, 0.2], [0.2, 0.8]])
        assert part.kappas[2] == pytest.approx(0.5)

    def test_kappa_ordering_for_tp2_kernels(self):
        rng = make_rng(2)
        for _ in range(100):
            B = random_tp2_stochastic(rng, 2)
            costs = [[1.0, 1.0 + rng.uniform(0.1, 2)],
                     [1.0 + rng.uniform(0.1, 2), 1.0]]
            part = social_learning_partition(costs, B)
            k = part.kappas
            assert k[3] <= k[2] + 1e-12 <= k[1] + 2e-12

    def test_cost_dominance_precondition(self):
        with pytest.raises(PreconditionFailed):
            social_learning_partition([[2.0, 1.0], [0.0, 1.0]], self.B)

    def test_double_threshold_and_nonconcave_value(self):
        res = solve_social_learning_stop(self.COSTS, self.B, d=1.8,
                                         beta=2.0, rho=0.9, grid_size=500)
        assert len(res.stop_intervals) >= 2
        V = res.values
        nonconcave = any(
            V[i] < 0.5 * (V[i - 1] + V[i + 1]) - 1e-9
            for i in range(1, len(V) - 1))
        assert nonconcave

    def test_free_stop_stops_everywhere(self):
        res = solve_social_learning_stop(self.COSTS, self.B, d=1.8,
                                         beta=0.0, rho=0.9, grid_size=200)
        assert res.stop_mask.all()


class TestGittins:
    P = [[0.8, 0.2], [0.3, 0.7]]
    B = [[0.85, 0.15], [0.25, 0.75]]

    def test_constant_reward_closed_form(self):
        g = gittins_index(self.P, self.B, [0.7, 0.7], 0.8, [0.5, 0.5],
                          tol_m=1e-7)
        assert g == pytest.approx(0.7 / 0.2, abs=1e-6)

    def test_matches_grid_bisection_oracle(self):
        r = [0.2, 1.0]
        rho = 0.8
        ts, gamma = gittins_index_table_2state(self.P, self.B, r, rho,
                                               grid_size=401, m_steps=400)
        for t in (0.25, 0.75):
            a = gittins_index(self.P, self.B, r, rho, [1 - t, t],
                              tol_m=1e-4)
            b = float(np.interp(t, ts, gamma))
            assert abs(a - b) < 2e-2  # table resolution dominates

    def test_mlr_monotone_for_increasing_rewards(self):
        vals = [gittins_index(self.P, self.B, [0.2, 1.0], 0.8, [1 - t, t],
                              tol_m=1e-4) for t in (0.1, 0.4, 0.7, 0.95)]
        assert all(vals[i] <= vals[i + 1] + 1e-6 for i in range(3))


class TestOpportunisticPolicy:
    def test_two_state_always_comparable(self):
        rng = make_rng(3)
        for _ in range(100):
            beliefs = uniform_simplex(rng, 3, 2)
            choice = opportunistic_bandit_policy(list(beliefs))
            assert choice.comparable
            assert choice.index == int(np.argmax(beliefs[:, 1])) + 1

    def test_identical_beliefs_tie_to_first(self):
        choice = opportunistic_bandit_policy([[0.5, 0.5], [0.5, 0.5]])
        assert choice.index == 1

    def test_incomparable_flagged(self):
        choice = opportunistic_bandit_policy(
            [[0.2, 0.3, 0.5], [0.3, 0.2, 0.5]])
        assert not choice.comparable
        assert choice.index is None

    def test_projection_restores_comparability(self):
        pr = project_to_mlr_band([0.3, 0.2, 0.5], lower=[0.2, 0.3, 0.5])
        assert mlr_compare(pr, [0.2, 0.3, 0.5]) in (Comparison.GE,
                                                    Comparison.EQ)
        assert pr.sum() == pytest.approx(1.0, abs=1e-9)

    def test_bandit_policies_statistically_equal(self):
        res = run_bandit_benchmark(self.p(), self.b(), [0.2, 1.0], 0.8,
                                   episodes=800, horizon=40, seed=6)
        assert res["ci_overlap"]

    @staticmethod
    def p():
        return [[0.8, 0.2], [0.3, 0.7]]

    @staticmethod
    def b():
        return [[0.85, 0.15], [0.25, 0.75]]
