"""Dominating transition matrices and the MLR sandwich filter.

Rank-1 and LP constructions of transition matrices that bracket a given
chain in the copositive order, plus the per-step sandwich run that
brackets the exact posterior between cheap lower/upper filters.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import LpInfeasible, NotTP2, OrderingViolation
from .orders import Comparison, mlr_compare, is_tp2
from .simplexlp import solve_lp


def rank1_bounds(P) -> tuple[np.ndarray, np.ndarray]:
    """Tightest rank-1 bracket of a TP2 transition matrix.

    Every row of the lower bound equals row 1 of ``P`` and every row of
    the upper bound equals row X; these are the extreme rows in the MLR
    order when ``P`` is TP2.
    """
    P = np.asarray(P, dtype=float)
    if not is_tp2(P):
        raise NotTP2("rank-1 bracket requires a TP2 matrix")
    lower = np.tile(P[0], (P.shape[0], 1))
    upper = np.tile(P[-1], (P.shape[0], 1))
    return lower, upper


def _mlr_row_constraints(ref: np.ndarray, direction: str) -> tuple:
    """Linear constraints on a row r with r <=r ref (or >=r).

    ``r <=r ref`` means ref(i) r(j) <= r(i) ref(j) for i < j.
    """
    X = ref.size
    rows = []
    for i in range(X):
        for j in range(i + 1, X):
            row = np.zeros(X)
            # ref_i r_j - r_i ref_j <= 0
            row[j] = ref[i]
            row[i] = -ref[j]
            rows.append(row if direction == "lower" else -row)
    return np.asarray(rows), np.zeros(len(rows))


def _lp_bound_row(target: np.ndarray, ref: np.ndarray, eps: float,
                  direction: str) -> np.ndarray:
    """Closest row (L1) to ``target`` that is MLR-bounded by ``ref``."""
    X = target.size
    A_mlr, b_mlr = _mlr_row_constraints(ref, direction)
    # variables: r (X) then t (X) with |r - target| <= t
    nv = 2 * X
    A_ub = []
    b_ub = []
    for row, b in zip(A_mlr, b_mlr):
        A_ub.append(np.concatenate([row, np.zeros(X)]))
        b_ub.append(b)
    for i in range(X):
        e = np.zeros(nv)
        e[i] = 1.0
        e[X + i] = -1.0
        A_ub.append(e.copy())
        b_ub.append(target[i])
        e = np.zeros(nv)
        e[i] = -1.0
        e[X + i] = -1.0
        A_ub.append(e)
        b_ub.append(-target[i])
    A_eq = np.zeros((1, nv))
    A_eq[0, :X] = 1.0
    c = np.concatenate([np.zeros(X), np.ones(X)])
    res = solve_lp(c, A_ub=np.asarray(A_ub), b_ub=np.asarray(b_ub),
                   A_eq=A_eq, b_eq=[1.0])
    if not res.optimal or res.value > eps + 1e-9:
        raise LpInfeasible(
            f"no row within L1 distance {eps} is MLR-{direction} bounded")
    return np.clip(res.x[:X], 0.0, None) / res.x[:X].sum()


def lp_bounds(P, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """LP construction of bracketing matrices within induced 1-norm eps.

    Row i of the lower bound is the L1-closest row to P_i among rows MLR
    dominated by P_1; the upper bound uses rows dominating P_X.  The
    induced 1-norm constraint ``||P - P_bound||_1 <= eps`` is exactly a
    per-row L1 budget.  Raises :class:`LpInfeasible` when eps is too
    small; the construction assumes a TP2 ``P`` (otherwise rows need not
    be MLR-comparable to the extreme rows and the LPs are refused).
    """
    P = np.asarray(P, dtype=float)
    if not is_tp2(P):
        raise LpInfeasible("lp_bounds requires a TP2 matrix")
    X = P.shape[0]
    lower = np.empty_like(P)
    upper = np.empty_like(P)
    for i in range(X):
        lower[i] = _lp_bound_row(P[i], P[0], eps, "lower")
        upper[i] = _lp_bound_row(P[i], P[-1], eps, "upper")
    return lower, upper


class CountingPredictor:
    """Belief prediction with an explicit multiply counter.

    Rows of the transition matrix are grouped by value, so a rank-r
    bracket (r distinct rows) costs r * X multiplies per step instead of
    X * X for a dense matrix.
    """

    def __init__(self, P):
        P = np.asarray(P, dtype=float)
        self.X = P.shape[0]
        rows = {}
        self.group_of = np.empty(self.X, dtype=int)
        reps = []
        for i, row in enumerate(P):
            key = row.tobytes()
            if key not in rows:
                rows[key] = len(reps)
                reps.append(row)
            self.group_of[i] = rows[key]
        self.rows = np.asarray(reps)
        self.rank = len(reps)
        self.multiplies = 0

    def predict(self, pi: np.ndarray) -> np.ndarray:
        mass = np.zeros(self.rank)
        for i in range(self.X):
            mass[self.group_of[i]] += pi[i]
        self.multiplies += self.rank * self.X
        return mass @ self.rows


@dataclass
class SandwichStep:
    lower: np.ndarray
    exact: np.ndarray
    upper: np.ndarray
    lower_mean: float
    exact_mean: float
    upper_mean: float
    lower_map: int
    exact_map: int
    upper_map: int


@dataclass
class SandwichRun:
    steps: list
    lower_multiplies: int
    exact_multiplies: int

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out)
        w.writerow(["k", "map_lower", "map_exact", "map_upper",
                    "mean_lower", "mean_exact", "mean_upper"])
        for k, s in enumerate(self.steps):
            w.writerow([k + 1, s.lower_map, s.exact_map, s.upper_map,
                        f"{s.lower_mean:.12g}", f"{s.exact_mean:.12g}",
                        f"{s.upper_mean:.12g}"])
        return out.getvalue()


def sandwich_filter(P_lower, P, P_upper, B, observations, pi0,
                    check: bool = True) -> SandwichRun:
    """Run the three filters in lockstep and verify the MLR sandwich.

    At every step the lower/upper posteriors must MLR-bracket the exact
    one, their conditional means (state levels 1..X) must bracket the
    exact mean and the MAP estimates must be ordered; a violation means
    the copositive-order preconditions did not actually hold and raises
    :class:`OrderingViolation`.
    """
    P = np.asarray(P, dtype=float)
    B = np.asarray(B, dtype=float)
    pi0 = np.asarray(pi0, dtype=float)
    X = P.shape[0]
    levels = np.arange(1, X + 1, dtype=float)
    lo_pred = CountingPredictor(P_lower)
    hi_pred = CountingPredictor(P_upper)
    exact_pred = CountingPredictor(P)
    pis = {"lo": pi0.copy(), "ex": pi0.copy(), "hi": pi0.copy()}
    steps = []
    for k, y in enumerate(observations):
        col = B[:, int(y) - 1]
        for key, pred in (("lo", lo_pred), ("ex", exact_pred),
                          ("hi", hi_pred)):
            unnorm = col * pred.predict(pis[key])
            total = unnorm.sum()
            if total <= 0:
                raise OrderingViolation(k + 1, "zero-likelihood observation")
            pis[key] = unnorm / total
        lo, ex, hi = pis["lo"], pis["ex"], pis["hi"]
        if check:
            if mlr_compare(lo, ex) not in (Comparison.LE, Comparison.EQ):
                raise OrderingViolation(k + 1, "lower filter not MLR below")
            if mlr_compare(ex, hi) not in (Comparison.LE, Comparison.EQ):
                raise OrderingViolation(k + 1, "upper filter not MLR above")
        means = (float(levels @ lo), float(levels @ ex), float(levels @ hi))
        if check and not (means[0] <= means[1] + 1e-9
                          and means[1] <= means[2] + 1e-9):
            raise OrderingViolation(k + 1, "conditional means out of order")
        maps = (int(np.argmax(lo)) + 1, int(np.argmax(ex)) + 1,
                int(np.argmax(hi)) + 1)
        if check and not maps[0] <= maps[1] <= maps[2]:
            raise OrderingViolation(k + 1, "MAP estimates out of order")
        steps.append(SandwichStep(lo.copy(), ex.copy(), hi.copy(),
                                  *means, *maps))
    return SandwichRun(steps, lo_pred.multiplies, exact_pred.multiplies)
