"""Belief-state recursions: HMM filter/predictor, social-learning filter,
risk-sensitive update and seeded trajectory simulation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroLikelihood
from .model import PomdpModel
from .rng import make_rng

ZERO_LIKELIHOOD = 1e-300


@dataclass(frozen=True)
class FilterStep:
    posterior: np.ndarray
    normalizer: float


def _bayes(unnormalized: np.ndarray) -> FilterStep:
    sigma = float(unnormalized.sum())
    if sigma <= ZERO_LIKELIHOOD:
        raise ZeroLikelihood(f"observation has zero mass (sigma={sigma!r})")
    return FilterStep(unnormalized / sigma, sigma)


def hmm_filter_step(pi, y: int, u: int, model: PomdpModel) -> FilterStep:
    """One filter update ``T(pi, y, u) = B_y(u) P'(u) pi / sigma``."""
    pi = np.asarray(pi, dtype=float)
    return _bayes(model.B(u)[:, y - 1] * (model.P(u).T @ pi))


def hmm_predictor_step(pi, u: int, model: PomdpModel) -> np.ndarray:
    """One-step-ahead prediction ``P'(u) pi``."""
    return model.P(u).T @ np.asarray(pi, dtype=float)


def normalizer_vector(pi, u: int, model: PomdpModel) -> np.ndarray:
    """Observation likelihoods ``sigma(pi, ., u)``; entries sum to one."""
    pred = hmm_predictor_step(pi, u, model)
    return model.B(u).T @ pred


def social_action_likelihoods(pi, local_costs, B) -> np.ndarray:
    """Matrix ``L[i, a] = P(a | x = e_i, pi)`` for myopic social agents.

    An agent observing y picks ``a = argmin_a c_a' eta`` with
    ``eta ∝ B_y pi``; cost ties resolve to the smaller action index.
    """
    pi = np.asarray(pi, dtype=float)
    c = np.asarray(local_costs, dtype=float)  # (X, A)
    B = np.asarray(B, dtype=float)            # (X, Y)
    if c.shape[0] != pi.size or B.shape[0] != pi.size:
        raise DimensionMismatch("costs/kernel do not match belief length")
    X, A = c.shape
    Y = B.shape[1]
    L = np.zeros((X, A))
    for y in range(Y):
        eta = B[:, y] * pi
        chosen = int(np.argmin(c.T @ eta))  # ties -> smallest index
        L[:, chosen] += B[:, y]
    return L


def social_learning_step(pi, a: int, local_costs, B) -> FilterStep:
    """Public-belief update driven by an observed action ``a``."""
    L = social_action_likelihoods(pi, local_costs, B)
    return _bayes(L[:, a - 1] * np.asarray(pi, dtype=float))


def risk_sensitive_step(pi, y: int, model: PomdpModel,
                        weights) -> FilterStep:
    """Filter update with exponential cost weights:
    ``T(pi, y) ∝ B_y P' diag(weights) pi`` (action 2 dynamics)."""
    pi = np.asarray(pi, dtype=float)
    w = np.asarray(weights, dtype=float)
    if w.shape != pi.shape:
        raise DimensionMismatch("weight vector must match belief length")
    u = min(2, model.num_actions)
    return _bayes(model.B(u)[:, y - 1] * (model.P(u).T @ (w * pi)))


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray        # (N+1,) 1-indexed, includes x_0
    observations: np.ndarray  # (N,) 1-indexed, y_1..y_N
    actions: np.ndarray       # (N,) 1-indexed, u_0..u_{N-1}
    beliefs: np.ndarray       # (N+1, X) pi_0..pi_N
    cost_terms: np.ndarray    # (N,) discounted per-step costs
    discounted_cost: float

    def to_csv(self) -> str:
        """Dump as CSV rows (k, x_k, y_k, u_k, pi_k(1..X), cost-to-date)."""
        out = io.StringIO()
        w = csv.writer(out)
        X = self.beliefs.shape[1]
        w.writerow(["k", "x", "y", "u"] + [f"pi{i+1}" for i in range(X)]
                   + ["cost_to_date"])
        running = np.cumsum(self.cost_terms)
        for k in range(len(self.actions)):
            w.writerow([k, self.states[k],
                        self.observations[k - 1] if k > 0 else "",
                        self.actions[k]]
                       + [f"{v:.12g}" for v in self.beliefs[k]]
                       + [f"{running[k]:.12g}"])
        return out.getvalue()


def simulate_trajectory(model: PomdpModel, policy, horizon: int,
                        seed: int, pi0=None) -> Trajectory:
    """Simulate the POMDP dynamics for ``horizon`` steps.

    ``policy`` maps a belief vector to a 1-indexed action.  The belief
    sequence follows the filter recursion step by step and the returned
    cost is ``sum_k rho^k c(x_k, u_k)`` plus the terminal cost when the
    model carries a finite horizon.
    """
    if horizon < 1:
        raise DimensionMismatch("horizon must be >= 1")
    rng = make_rng(seed)
    X = model.num_states
    pi = (np.full(X, 1.0 / X) if pi0 is None
          else np.asarray(pi0, dtype=float))
    x = int(rng.choice(X, p=pi))
    states = [x + 1]
    beliefs = [pi.copy()]
    observations = []
    actions = []
    cost_terms = []
    rho = model.discount
    for k in range(horizon):
        u = int(policy(pi))
        actions.append(u)
        cost_terms.append(rho ** k * model.costs[x, u - 1])
        x = int(rng.choice(X, p=model.P(u)[x]))
        y = int(rng.choice(model.num_obs, p=model.B(u)[x]))
        step = hmm_filter_step(pi, y + 1, u, model)
        pi = step.posterior
        states.append(x + 1)
        observations.append(y + 1)
        beliefs.append(pi.copy())
    total = float(np.sum(cost_terms))
    if model.horizon is not None and horizon >= model.horizon:
        total += rho ** horizon * float(model.terminal_vector()[x])
    return Trajectory(
        states=np.asarray(states),
        observations=np.asarray(observations),
        actions=np.asarray(actions),
        beliefs=np.asarray(beliefs),
        cost_terms=np.asarray(cost_terms),
        discounted_cost=total,
    )
