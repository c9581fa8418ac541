"""Simplex-grid value machinery shared by the grid oracle, policy
evaluation and the reduced-grid bounds.

Grid nodes are the lattice points ``k / resolution`` (all compositions of
``resolution`` into X parts, in lexicographic order).  Off-grid beliefs
are evaluated by linear interpolation for X = 2, by nearest neighbor for
X >= 3 (the oracle default), or by barycentric interpolation on the
standard simplicial subdivision of the lattice, which is exact for
piecewise linear functions and never overshoots a concave one.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .model import PomdpModel


def simplex_lattice(dim: int, resolution: int) -> np.ndarray:
    """All beliefs with coordinates k/resolution, in lexicographic order."""
    pts = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            pts.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], resolution, dim)
    return np.asarray(pts, dtype=float) / resolution


def lattice_index_map(dim: int, resolution: int) -> dict:
    """Map from integer composition tuples to row index in the lattice."""
    pts = np.rint(simplex_lattice(dim, resolution) * resolution).astype(int)
    return {tuple(p): i for i, p in enumerate(pts)}


def _comb_table(n: int, k: int) -> np.ndarray:
    T = np.zeros((n + 1, k + 1), dtype=np.int64)
    for i in range(n + 1):
        for j in range(k + 1):
            T[i, j] = comb(i, j)
    return T


def lattice_rank(comps: np.ndarray, resolution: int) -> np.ndarray:
    """Lexicographic row index of integer compositions, vectorized.

    Uses the hockey-stick identity to count compositions with a smaller
    prefix; ``comps`` has shape (..., X) with rows summing to
    ``resolution``.
    """
    comps = np.asarray(comps, dtype=np.int64)
    X = comps.shape[-1]
    M = resolution
    T = _comb_table(M + X, X)
    idx = np.zeros(comps.shape[:-1], dtype=np.int64)
    remaining = np.full(comps.shape[:-1], M, dtype=np.int64)
    for i in range(X - 1):
        k = X - i - 1  # parts after this coordinate
        c = comps[..., i]
        idx += T[remaining + k, k] - T[remaining - c + k, k]
        remaining = remaining - c
    return idx


def _cumulative_coords(pis: np.ndarray, M: int) -> np.ndarray:
    cum = np.cumsum(pis[:, ::-1], axis=1)[:, ::-1]
    return np.clip(M * cum[:, 1:], 0.0, M)


def _cumulative_to_comps(v: np.ndarray, M: int) -> np.ndarray:
    """Integer cumulative coords (n, X-1) -> compositions (n, X)."""
    n = v.shape[0]
    full = np.concatenate([np.full((n, 1), M, dtype=np.int64), v,
                           np.zeros((n, 1), dtype=np.int64)], axis=1)
    return full[:, :-1] - full[:, 1:]


def barycentric_weights(pis: np.ndarray,
                        resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertex indices and weights on the lattice's simplicial subdivision.

    Works in cumulative coordinates, where each lattice cell is a cube
    sliced by the ordering constraints; the vertex chain follows the
    descending fractional parts.  Returns ``(idx, w)`` of shapes (n, X)
    with ``w >= 0`` and unit row sums.
    """
    pis = np.atleast_2d(np.asarray(pis, dtype=float))
    n, X = pis.shape
    M = resolution
    if X == 2:
        t = np.clip(pis[:, 0] * M, 0, M)
        lo = np.minimum(np.floor(t).astype(np.int64), M - 1)
        frac = t - lo
        idx = np.stack([lo, lo + 1], axis=1)
        w = np.stack([1 - frac, frac], axis=1)
        return idx, w
    x = _cumulative_coords(pis, M)                       # (n, X-1)
    # x is coordinatewise decreasing, so floor(x) is too
    base = np.minimum(np.floor(x + 1e-12), M - 1).astype(np.int64)
    base = np.maximum(base, 0)
    d = np.clip(x - base, 0.0, 1.0)
    order = np.argsort(-d, axis=1, kind="stable")        # (n, X-1)
    rank = np.argsort(order, axis=1)
    # vertex k adds +1 to the first k coordinates in sorted order
    steps = rank[:, None, :] < np.arange(X)[None, :, None]
    verts = base[:, None, :] + steps                     # (n, X, X-1)
    ds = np.take_along_axis(d, order, axis=1)
    w = np.empty((n, X))
    w[:, 0] = 1.0 - ds[:, 0]
    if X > 2:
        w[:, 1:X - 1] = ds[:, :X - 2] - ds[:, 1:X - 1]
    w[:, X - 1] = ds[:, X - 2]
    w = np.clip(w, 0.0, None)
    w /= w.sum(axis=1, keepdims=True)
    comps = _cumulative_to_comps(verts.reshape(-1, X - 1), M)
    idx = lattice_rank(comps, M).reshape(n, X)
    return idx, w


def nearest_lattice_index(pis: np.ndarray, resolution: int) -> np.ndarray:
    """L1-nearest lattice node via largest-remainder apportionment."""
    pis = np.atleast_2d(np.asarray(pis, dtype=float))
    M = resolution
    v = pis * M
    base = np.floor(v).astype(np.int64)
    rem = v - base
    need = M - base.sum(axis=1)
    order = np.argsort(-rem, axis=1, kind="stable")
    rank = np.argsort(order, axis=1)
    comps = base + (rank < need[:, None])
    return lattice_rank(comps, M)


class GridValue:
    """Value table over the simplex lattice with a Bellman sweep engine."""

    def __init__(self, model: PomdpModel, resolution: int,
                 interpolation: str | None = None):
        X = model.num_states
        if interpolation is None:
            interpolation = "linear" if X == 2 else "nearest"
        if X == 2 and interpolation == "nearest":
            interpolation = "linear"
        self.model = model
        self.resolution = resolution
        self.interpolation = interpolation
        self.points = simplex_lattice(X, resolution)
        self.values = np.zeros(len(self.points))
        self._maps = None
        self.policy_table = None

    # -- interpolation ---------------------------------------------------
    def _interp(self, pis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pis = np.atleast_2d(pis)
        if self.interpolation == "nearest":
            idx = nearest_lattice_index(pis, self.resolution)
            return idx[:, None], np.ones((len(pis), 1))
        # "linear" (X == 2) and "freudenthal" share the barycentric path
        return barycentric_weights(pis, self.resolution)

    def value(self, pi) -> float:
        idx, w = self._interp(np.asarray(pi, dtype=float)[None, :])
        return float((self.values[idx] * w).sum())

    def batch_values(self, pis: np.ndarray) -> np.ndarray:
        idx, w = self._interp(pis)
        return (self.values[idx] * w).sum(axis=1)

    # -- Bellman machinery -------------------------------------------------
    def _build_maps(self):
        """Precompute sigma and interpolation data of every grid backup."""
        model = self.model
        n = len(self.points)
        U, Y = model.num_actions, model.num_obs
        self._sigma = np.zeros((U, n, Y))
        idx_list = []
        w_list = []
        for u in range(1, U + 1):
            pred = self.points @ model.P(u)        # (n, X) rows P'(u) pi
            sig = pred @ model.B(u)                # (n, Y)
            self._sigma[u - 1] = sig
            iu = []
            wu = []
            for y in range(Y):
                post = pred * model.B(u)[:, y][None, :]
                safe = sig[:, y] > 0
                norm = np.where(safe, sig[:, y], 1.0)
                post = post / norm[:, None]
                post[~safe] = self.points[~safe]
                idx, w = self._interp(post)
                w = w * safe[:, None]
                iu.append(idx)
                wu.append(w)
            idx_list.append(iu)
            w_list.append(wu)
        self._maps = (idx_list, w_list)
        self._costs = self.points @ model.costs    # (n, U)

    def sweep(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One min-over-actions Bellman backup on the grid."""
        if self._maps is None:
            self._build_maps()
        model = self.model
        rho = model.discount
        idx_list, w_list = self._maps
        n = len(self.points)
        U, Y = model.num_actions, model.num_obs
        Q = np.empty((n, U))
        for u in range(U):
            cont = np.zeros(n)
            for y in range(Y):
                iv = (values[idx_list[u][y]] * w_list[u][y]).sum(axis=1)
                cont += iv * self._sigma[u, :, y]
            Q[:, u] = self._costs[:, u] + rho * cont
        return Q.min(axis=1), Q.argmin(axis=1) + 1

    def iterate(self, epsilon: float | None = None,
                horizon: int | None = None,
                max_iterations: int = 100_000) -> "GridValue":
        """Value iteration to tolerance or fixed horizon."""
        if horizon is not None:
            V = self.points @ self.model.terminal_vector()
            pol = None
            for _ in range(horizon):
                V, pol = self.sweep(V)
            self.values = V
            self.policy_table = pol
            return self
        V = self.values
        for _ in range(max_iterations):
            V2, pol = self.sweep(V)
            gap = np.max(np.abs(V2 - V))
            V = V2
            if gap <= epsilon:
                break
        self.values = V
        self.policy_table = pol
        return self

    def iterate_policy(self, actions: np.ndarray, epsilon: float,
                       max_iterations: int = 100_000) -> "GridValue":
        """Fixed-policy evaluation sweeps (actions are 1-indexed)."""
        if self._maps is None:
            self._build_maps()
        model = self.model
        rho = model.discount
        idx_list, w_list = self._maps
        n = len(self.points)
        a0 = actions - 1
        rows = np.arange(n)
        V = np.zeros(n)
        cost = self._costs[rows, a0]
        for _ in range(max_iterations):
            cont = np.zeros(n)
            for u in range(model.num_actions):
                sel = a0 == u
                if not sel.any():
                    continue
                for y in range(model.num_obs):
                    iv = (V[idx_list[u][y][sel]]
                          * w_list[u][y][sel]).sum(axis=1)
                    cont[sel] += iv * self._sigma[u, sel, y]
            V2 = cost + rho * cont
            gap = np.max(np.abs(V2 - V))
            V = V2
            if gap <= epsilon:
                break
        self.values = V
        self.policy_table = actions
        return self

    # -- policies ----------------------------------------------------------
    def action(self, pi) -> int:
        """Nearest-grid-point policy lookup (1-indexed)."""
        pi = np.asarray(pi, dtype=float)
        d = np.abs(self.points - pi[None, :]).sum(axis=1)
        return int(self.policy_table[int(np.argmin(d))])

    def lookahead_action(self, pi) -> int:
        """One-step Bellman action using the interpolated value table."""
        return int(self.lookahead_actions(
            np.asarray(pi, dtype=float)[None, :])[0])

    def lookahead_actions(self, pis: np.ndarray) -> np.ndarray:
        """Vectorized one-step Bellman actions for many beliefs."""
        model = self.model
        pis = np.atleast_2d(pis)
        n = pis.shape[0]
        Q = np.empty((n, model.num_actions))
        for u in range(1, model.num_actions + 1):
            pred = pis @ model.P(u)
            sig = pred @ model.B(u)
            q = pis @ model.cost_vector(u)
            for y in range(model.num_obs):
                s = sig[:, y]
                safe = s > 0
                post = pred * model.B(u)[:, y][None, :]
                post[safe] /= s[safe, None]
                post[~safe] = pis[~safe]
                vals = self.batch_values(post)
                q = q + model.discount * vals * s * safe
            Q[:, u - 1] = q
        return Q.argmin(axis=1) + 1
