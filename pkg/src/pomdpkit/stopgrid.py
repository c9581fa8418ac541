"""Grid dynamic programming for two-action stopping models.

Value iteration starts from the stop cost (stopping immediately is
always available), so the sweeps decrease monotonically and converge
even in the undiscounted case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import barycentric_weights, simplex_lattice
from .model import StoppingModel, belief_cost_batch


@dataclass
class StoppingGridSolution:
    model: StoppingModel
    points: np.ndarray
    values: np.ndarray
    stop_value: np.ndarray
    continue_value: np.ndarray
    resolution: int

    @property
    def stop_mask(self) -> np.ndarray:
        return self.stop_value <= self.continue_value + 1e-12

    def value(self, pi) -> float:
        return float(self._interp(np.asarray(pi, float)[None, :])[0])

    def _interp(self, pis: np.ndarray) -> np.ndarray:
        X = pis.shape[1]
        if X == 2:
            # lattice row k holds pi = (k/M, (M-k)/M)
            M = self.resolution
            t = np.clip(pis[:, 0] * M, 0, M)
            lo = np.minimum(np.floor(t).astype(int), M - 1)
            frac = t - lo
            return self.values[lo] * (1 - frac) + self.values[lo + 1] * frac
        idx, w = barycentric_weights(pis, self.resolution)
        return (self.values[idx] * w).sum(axis=1)

    def actions(self, pis: np.ndarray) -> np.ndarray:
        """Lookahead stop/continue decisions (1 stop, 2 continue)."""
        pis = np.atleast_2d(np.asarray(pis, dtype=float))
        sm = self.model
        stop = belief_cost_batch(sm.stop_cost, pis)
        cont = belief_cost_batch(sm.continue_cost, pis)
        pred = _weighted_prediction(sm, pis)
        sig = pred @ sm.B
        for y in range(sm.num_obs):
            s = sig[:, y]
            safe = s > 0
            post = pred * sm.B[:, y][None, :]
            post[safe] /= s[safe, None]
            post[~safe] = pis[~safe]
            cont = cont + sm.discount * self._interp(post) * s * safe
        return np.where(stop <= cont + 1e-12, 1, 2)

    def action(self, pi) -> int:
        return int(self.actions(np.asarray(pi)[None, :])[0])


def _weighted_prediction(sm: StoppingModel, pis: np.ndarray) -> np.ndarray:
    w = sm.filter_weights
    base = pis if w is None else pis * w[None, :]
    return base @ sm.P


def solve_stopping_grid(sm: StoppingModel, resolution: int,
                        epsilon: float = 1e-9,
                        max_iterations: int = 100_000
                        ) -> StoppingGridSolution:
    X = sm.num_states
    pts = simplex_lattice(X, resolution)
    stop_vals = belief_cost_batch(sm.stop_cost, pts)
    cont_base = belief_cost_batch(sm.continue_cost, pts)

    pred = _weighted_prediction(sm, pts)
    sig = pred @ sm.B
    Y = sm.num_obs
    interp = []
    for y in range(Y):
        s = sig[:, y]
        safe = s > 0
        post = pred * sm.B[:, y][None, :]
        post[safe] /= s[safe, None]
        post[~safe] = pts[~safe]
        if X == 2:
            M = resolution
            t = np.clip(post[:, 0] * M, 0, M)
            lo = np.minimum(np.floor(t).astype(int), M - 1)
            frac = t - lo
            idx = np.stack([lo, lo + 1], axis=1)
            w = np.stack([1 - frac, frac], axis=1)
        else:
            idx, w = barycentric_weights(post, resolution)
        interp.append((idx, w * safe[:, None]))

    V = stop_vals.copy()
    cont_vals = cont_base.copy()
    for _ in range(max_iterations):
        cont_vals = cont_base.copy()
        for y in range(Y):
            idx, w = interp[y]
            cont_vals += sm.discount * (V[idx] * w).sum(axis=1) * sig[:, y]
        V2 = np.minimum(stop_vals, cont_vals)
        gap = np.max(np.abs(V2 - V))
        V = V2
        if gap <= epsilon:
            break
    return StoppingGridSolution(sm, pts, V, stop_vals, cont_vals,
                                resolution)


def batched_stopping_costs(sm: StoppingModel, policy_values, pi0s,
                           horizon: int, rng) -> np.ndarray:
    """Discounted sample costs of stopping policies on many paths.

    ``policy_values(pis, path_idx)`` returns stop/continue decisions
    (1/2) per alive path; paths absorb at the stop decision with the
    stop cost paid once.
    """
    pi0s = np.atleast_2d(np.asarray(pi0s, dtype=float))
    n, X = pi0s.shape
    beliefs = pi0s.copy()
    cdf = np.cumsum(pi0s, axis=1)
    states = (cdf < rng.random(n)[:, None]).sum(axis=1)
    total = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    Pc = np.cumsum(sm.P, axis=1)
    Bc = np.cumsum(sm.B, axis=1)
    disc = 1.0
    for k in range(horizon):
        if not alive.any():
            break
        idx = np.flatnonzero(alive)
        acts = policy_values(beliefs[idx], idx)
        stopping = idx[acts == 1]
        if stopping.size:
            total[stopping] += disc * belief_cost_batch(
                sm.stop_cost, beliefs[stopping])
            alive[stopping] = False
        going = idx[acts == 2]
        if going.size:
            total[going] += disc * belief_cost_batch(
                sm.continue_cost, beliefs[going])
            u = rng.random(going.size)
            states[going] = (Pc[states[going]]
                             < u[:, None]).sum(axis=1)
            yv = rng.random(going.size)
            ys = (Bc[states[going]] < yv[:, None]).sum(axis=1)
            pred = beliefs[going] @ sm.P
            post = pred * sm.B[:, ys].T
            sums = post.sum(axis=1, keepdims=True)
            sums[sums <= 0] = 1.0
            beliefs[going] = post / sums
        disc *= sm.discount
    # paths still alive at the horizon stop and pay the stop cost
    if alive.any():
        total[alive] += disc * belief_cost_batch(sm.stop_cost,
                                                 beliefs[alive])
    return total
