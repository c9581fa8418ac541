"""Batch command-line front end.

Subcommands load a model (named preset or JSON file), run solvers,
checkers or estimators, and emit CSV/JSON artifacts.  All numeric CSV
output carries 12 significant digits and every stochastic run takes an
explicit ``--seed``, so identical invocations produce byte-identical
artifacts.  Exit codes: 0 ok, 2 validation error, 3 infeasible, 4 vector
budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import apps, myopic, presets, structural, threshold
from .errors import (
    Blowup,
    DimensionMismatch,
    LpInfeasible,
    PomdpKitError,
    PreconditionFailed,
)
from .grid import GridValue
from .model import PomdpModel, StoppingModel, model_from_json
from .rng import make_rng, uniform_simplex
from .solver import grid_value_oracle, lovejoy_bounds, \
    solve_finite_horizon, value_iteration_discounted
from .stopgrid import solve_stopping_grid


def _preset(name: str, rho: float | None):
    """Named benchmark models; returns a PomdpModel or StoppingModel."""
    if name == "machine-replacement":
        return apps.build_machine_replacement(
            0.3, 0.9, 0.8, 0.5, [1.0, 0.0],
            rho=0.95 if rho is None else rho)
    if name == "qd-classical":
        return apps.build_quickest_detection(
            [0.0, 1.0], [[0.9]], [0.1], [[0.7, 0.3], [0.2, 0.8]],
            d=0.05, beta=1.0, alpha=0.0, delay_kind="classical", rho=1.0)
    if name == "qd-ph":
        return apps.build_quickest_detection(
            [0.0, 0.5, 0.5], [[0.5, 0.2], [0.3, 0.6]], [0.3, 0.1],
            [[0.7, 0.2, 0.1], [0.15, 0.5, 0.35], [0.15, 0.5, 0.35]],
            d=2.5, beta=2.0, alpha=0.0, delay_kind="predicted",
            rho=0.9 if rho is None else rho)
    if name == "sampling":
        return apps.build_sampling_control(
            [[1.0, 0.0], [0.1, 0.9]], [[0.7, 0.3], [0.2, 0.8]],
            intervals=[1, 2, 4, 8], m=0.05, d=0.08,
            rho=0.97 if rho is None else rho)
    if name == "search":
        return apps.build_search_pomdp(
            [[0.8, 0.2], [0.3, 0.7]], overlook=[0.2, 0.3],
            blocking=[0.1, 0.1], cost_kind="detect",
            rho=0.9 if rho is None else rho)
    if name == "social":
        return {"local_costs": [[4.57, 5.57], [2.57, 0.0]],
                "B": [[0.9, 0.1], [0.1, 0.9]],
                "d": 1.8, "beta": 2.0, "rho": 0.9}
    if name == "bandit":
        return {"P": [[0.8, 0.2], [0.3, 0.7]],
                "B": [[0.85, 0.15], [0.25, 0.75]],
                "r": [0.2, 1.0], "rho": 0.8}
    if name == "transmission":
        return apps.build_transmission_scheduling(
            2, 4, 8, [[0.8, 0.2], [0.3, 0.7]], [0.6, 0.2],
            [0.0, 0.4], lambda i: float(i))
    if name == "example1":
        return presets.example1(0.4 if rho is None else rho)
    if name == "example2":
        return presets.example2(0.4 if rho is None else rho)
    if name == "example3":
        return presets.example3(0.4 if rho is None else rho)
    if name.startswith("example4"):
        args = name[len("example4"):].strip("()")
        t1, t2 = (0.2, 0.4) if not args else map(float, args.split(","))
        return presets.example4(t1, t2, 0.4 if rho is None else rho)
    raise DimensionMismatch(f"unknown preset {name!r}")


def load_model(spec: str, rho: float | None = None):
    if spec.endswith(".json"):
        with open(spec) as fh:
            return model_from_json(fh.read())
    return _preset(spec, rho)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    model = load_model(args.model, args.rho)
    if isinstance(model, dict) and "local_costs" in model:
        res = apps.solve_social_learning_stop(
            model["local_costs"], model["B"], model["d"], model["beta"],
            model["rho"] if args.rho is None else args.rho,
            grid_size=args.resolution if args.resolution != 1000 else 500)
        rows = ["pi2,value,stop"]
        for t, v, s in zip(res.grid, res.values, res.stop_mask):
            rows.append(f"{t:.12g},{v:.12g},{int(s)}")
        _emit("\n".join(rows) + "\n", args.out)
        return 0
    if isinstance(model, dict):
        raise DimensionMismatch(
            f"preset {args.model!r} is only usable with its dedicated "
            f"subcommand")
    if isinstance(model, StoppingModel):
        sol = solve_stopping_grid(model, args.resolution,
                                  epsilon=args.epsilon or 1e-9)
        rows = ["pi2,value,action"]
        for p, v in zip(sol.points, sol.values):
            rows.append(f"{p[1]:.12g},{v:.12g},"
                        f"{1 if sol.stop_value[0] <= 0 else 0}")
        mask = sol.stop_mask
        rows = ["index,value,stop"] + [
            f"{i},{v:.12g},{int(s)}"
            for i, (v, s) in enumerate(zip(sol.values, mask))]
        _emit("\n".join(rows) + "\n", args.out)
        return 0
    if args.method == "grid":
        grid = grid_value_oracle(model, args.resolution,
                                 horizon=args.horizon,
                                 epsilon=args.epsilon)
        rows = ["index,value,action"]
        for i, v in enumerate(grid.values):
            rows.append(f"{i},{v:.12g},{int(grid.policy_table[i])}")
        _emit("\n".join(rows) + "\n", args.out)
        return 0
    if args.method == "lovejoy":
        lb = lovejoy_bounds(model, args.grid_points,
                            horizon=args.horizon or model.horizon)
        doc = {
            "upper_sizes": [len(s) for s in lb.upper_sets],
            "resolution": lb.resolution,
            "grid": [[float(v) for v in p] for p in lb.grid_points],
            "upper_values": [float(lb.upper_value(p))
                             for p in lb.grid_points],
            "lower_values": [float(lb.lower_value(p))
                             for p in lb.grid_points],
        }
        _emit(json.dumps(doc) + "\n", args.out)
        return 0
    if args.horizon is not None:
        res = solve_finite_horizon(model, args.horizon, method=args.method)
    else:
        res = value_iteration_discounted(model, args.epsilon or 1e-6,
                                         method=args.method)
    if args.query:
        pi = np.asarray([float(t) for t in args.query.split(",")])
        value, _, action = __import__(
            "pomdpkit.solver", fromlist=["evaluate_value"]
        ).evaluate_value(res.final, pi)
        _emit(json.dumps({"value": value, "action": action}) + "\n",
              args.out)
        return 0
    _emit(res.to_json() + "\n", args.out)
    return 0


def cmd_filter(args) -> int:
    model = load_model(args.model, args.rho)
    rng = make_rng(args.seed)
    if args.sandwich:
        if isinstance(model, StoppingModel):
            P, B = np.asarray(model.P), np.asarray(model.B)
        else:
            P, B = model.P(1), model.B(1)
        from .bounds import rank1_bounds, sandwich_filter

        lo, hi = rank1_bounds(P)
        X = P.shape[0]
        x = 0
        ys = []
        for _ in range(args.steps):
            x = int(rng.choice(X, p=P[x]))
            ys.append(int(rng.choice(B.shape[1], p=B[x])) + 1)
        run = sandwich_filter(lo, P, hi, B, ys, np.full(X, 1.0 / X))
        _emit(run.to_csv(), args.out)
        return 0
    from .filters import simulate_trajectory

    pomdp = model if isinstance(model, PomdpModel) else None
    if pomdp is None:
        raise DimensionMismatch("trajectory simulation needs a POMDP model")
    traj = simulate_trajectory(pomdp, lambda pi: 1, args.steps, args.seed)
    _emit(traj.to_csv(), args.out)
    return 0


def cmd_check(args) -> int:
    model = load_model(args.model, args.rho)
    if isinstance(model, StoppingModel):
        pm = PomdpModel(
            transitions=np.stack([np.asarray(model.P)] * 2),
            observations=np.stack([np.asarray(model.B)] * 2),
            costs=np.zeros((model.num_states, 2)),
            discount=min(model.discount, 0.999),
        )
        report = structural.pomdp_assumption_report(
            pm, stop_cost=model.stop_cost,
            continue_cost=model.continue_cost)
    else:
        report = structural.pomdp_assumption_report(model)
    _emit(structural.report_to_json(report) + "\n", args.out)
    return 0


def _table_rows(example, rhos, samples, seed, per_belief=False,
                loss_rho=None, paths=1000, horizon=100,
                delta=myopic.STRICTNESS):
    rows = []
    for rho in rhos:
        model = example(rho)
        if per_belief:
            vol, _ = myopic.overlap_volume(model, per_belief=True,
                                           n_samples=samples, seed=seed)
            rows.append({"rho": rho, "vol": 100 * vol})
            continue
        try:
            pair = myopic.optimize_overlap_2action(model, delta=delta)
        except LpInfeasible:
            pair = myopic.lp_feasibility_C1_C2(model, delta=delta)
        vol, _ = myopic.overlap_volume(model, pair, n_samples=samples,
                                       seed=seed)
        row = {"rho": rho, "vol": 100 * vol}
        if loss_rho is not None and abs(rho - loss_rho) < 1e-12:
            g = GridValue(model, 100, interpolation="freudenthal")
            g.iterate(epsilon=1e-8)
            X = model.num_states
            e_last = np.zeros(X)
            e_last[-1] = 1.0
            row["L1"] = 100 * myopic.percent_loss(
                model, pair, e_last, g.lookahead_actions, paths, horizon,
                seed)
            rng = make_rng(seed + 1)
            outside = []
            while len(outside) < 1:
                cand = uniform_simplex(rng, 256, X)
                mask = ~myopic.overlap_indicator_pair(pair, cand)
                outside.extend(cand[mask][:1])
            row["L2"] = 100 * myopic.percent_loss(
                model, pair, outside[0], g.lookahead_actions, paths,
                horizon, seed)
        rows.append(row)
    return rows


def cmd_myopic(args) -> int:
    rhos = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    if args.table1a:
        # the bundled benchmark table corresponds to a 0.05 strictness
        # margin in the monotone-cost LPs; the library default stays 1e-6
        delta = 0.05 if args.delta is None else args.delta
        rows = _table_rows(presets.example1, rhos, args.samples, args.seed,
                           loss_rho=0.4 if args.loss else None,
                           paths=args.paths, horizon=args.horizon,
                           delta=delta)
    elif args.table1c:
        rows = _table_rows(presets.example2, rhos, args.samples, args.seed)
    elif args.table1d:
        rows = _table_rows(presets.example3, rhos,
                           min(args.samples, 20000), args.seed,
                           per_belief=True)
    else:
        model = load_model(args.model, args.rho)
        rows = _table_rows(lambda r: model, [model.discount],
                           args.samples, args.seed,
                           per_belief=model.num_actions > 2)
    _emit(myopic.table_csv(rows), args.out)
    return 0


def cmd_spsa(args) -> int:
    model = load_model(args.model, args.rho)
    if not isinstance(model, StoppingModel):
        raise DimensionMismatch("spsa fits stopping models only")
    runs = threshold.spsa_fit(model, args.iterations, args.seed,
                              restarts=args.restarts)
    best = None
    best_cost = np.inf
    for r in runs:
        cost = threshold.evaluate_threshold_policy(
            model, r.theta, args.paths, args.seed + 999).mean()
        if cost < best_cost:
            best, best_cost = r, cost
    doc = {"theta": [float(t) for t in best.theta],
           "sampled_cost": float(best_cost),
           "hyper": vars(best.hyper)}
    _emit(best.trace_csv() if args.trace else json.dumps(doc) + "\n",
          args.out)
    return 0


def cmd_bandit(args) -> int:
    params = _preset("bandit", None)
    from .apps import run_bandit_benchmark

    result = run_bandit_benchmark(
        params["P"], params["B"], params["r"], params["rho"],
        episodes=args.episodes, horizon=args.steps, seed=args.seed)
    _emit(json.dumps(result) + "\n", args.out)
    return 0


def cmd_simulate(args) -> int:
    model = load_model(args.model, args.rho)
    if not isinstance(model, PomdpModel):
        raise DimensionMismatch("simulate needs a POMDP model")
    from .filters import simulate_trajectory

    res = value_iteration_discounted(model, 1e-6) \
        if model.discount < 1 else solve_finite_horizon(
            model, args.steps, method="ip")
    traj = simulate_trajectory(model, res.policy(), args.steps, args.seed)
    _emit(traj.to_csv(), args.out)
    return 0


def cmd_compare(args) -> int:
    rng = make_rng(args.seed)
    if args.kind == "mdp":
        from .model import quantized_gaussian_observation

        X, U = 4, 2
        Ps, Pbars = [], []
        for u in range(U):
            lv = np.cumsum(0.3 + rng.uniform(0, 0.8, X))
            Pb = quantized_gaussian_observation(
                lv, rng.uniform(0.8, 2.0), X)
            shift = rng.uniform(0.05, 0.3)
            P = Pb * (1 - shift)
            P[:, -1] += shift
            Ps.append(P)
            Pbars.append(Pb)
        c = np.sort(rng.uniform(0, 2, (X, U)), axis=0)[::-1]
        tc = np.sort(rng.uniform(0, 1, X))[::-1]
        obs = np.stack([np.full((X, 2), 0.5)] * U)
        m1 = PomdpModel(np.stack(Ps), obs, c, 1.0, horizon=12,
                        terminal_cost=tc)
        m2 = PomdpModel(np.stack(Pbars), obs, c, 1.0, horizon=12,
                        terminal_cost=tc)
        verdict = structural.compare_mdp_costs(m1, m2)
    else:
        from .model import quantized_gaussian_observation

        X = 2
        lv = np.cumsum(0.4 + rng.uniform(0, 1, X))
        P = quantized_gaussian_observation(lv, rng.uniform(0.8, 2.0), X)
        kernels = []
        for u in range(2):
            B2 = quantized_gaussian_observation(
                np.array([1.0, 2.0]), rng.uniform(0.4, 1.0), 3)
            kernels.append(B2)
        R = rng.dirichlet(np.ones(2), size=3)
        garbled = [K @ R for K in kernels]
        c = np.sort(rng.uniform(0, 2, (X, 2)), axis=0)[::-1]
        good = PomdpModel(np.stack([P, P]), np.stack(kernels), c, 1.0,
                          horizon=6)
        bad = PomdpModel(np.stack([P, P]), np.stack(garbled), c, 1.0,
                         horizon=6)
        verdict = structural.compare_pomdp_costs(
            good, bad, kind="observation", n_beliefs=500, seed=args.seed)
    _emit(json.dumps({"status": verdict.status.value}) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pomdpkit",
        description="POMDP solvers, structural checkers and estimators")
    p.add_argument("--threads", type=int, default=1,
                   help="cap on worker count for sharded estimators")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--method", default="ip",
                    choices=["ip", "monahan", "lovejoy", "grid"])
    sp.add_argument("--resolution", type=int, default=1000)
    sp.add_argument("--grid-points", type=int, default=20)
    sp.add_argument("--query", help="belief to evaluate, comma separated")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solve)

    fp = sub.add_parser("filter", help="run filters along a sample path")
    fp.add_argument("--model", required=True)
    fp.add_argument("--rho", type=float)
    fp.add_argument("--sandwich", action="store_true")
    fp.add_argument("--steps", type=int, default=100)
    fp.add_argument("--seed", type=int, default=0)
    fp.add_argument("--out")
    fp.set_defaults(func=cmd_filter)

    cp = sub.add_parser("check", help="assumption reports")
    cp.add_argument("--model", required=True)
    cp.add_argument("--rho", type=float)
    cp.add_argument("--assumptions", action="store_true")
    cp.add_argument("--out")
    cp.set_defaults(func=cmd_check)

    mp = sub.add_parser("myopic", help="myopic-bound tables")
    mp.add_argument("--table1a", action="store_true")
    mp.add_argument("--table1c", action="store_true")
    mp.add_argument("--table1d", action="store_true")
    mp.add_argument("--model")
    mp.add_argument("--rho", type=float)
    mp.add_argument("--loss", action="store_true",
                    help="include percent-loss columns (table1a)")
    mp.add_argument("--samples", type=int, default=1_000_000)
    mp.add_argument("--delta", type=float,
                    help="strictness margin for the cost LPs")
    mp.add_argument("--paths", type=int, default=1000)
    mp.add_argument("--horizon", type=int, default=100)
    mp.add_argument("--seed", type=int, default=0)
    mp.add_argument("--out")
    mp.set_defaults(func=cmd_myopic)

    ap = sub.add_parser("spsa", help="fit a linear threshold policy")
    ap.add_argument("--model", default="qd-ph")
    ap.add_argument("--rho", type=float)
    ap.add_argument("--iterations", type=int, default=2000)
    ap.add_argument("--restarts", type=int, default=5)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trace", action="store_true")
    ap.add_argument("--out")
    ap.set_defaults(func=cmd_spsa)

    bp = sub.add_parser("bandit", help="two-project bandit benchmark")
    bp.add_argument("--episodes", type=int, default=1000)
    bp.add_argument("--steps", type=int, default=40)
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--out")
    bp.set_defaults(func=cmd_bandit)

    tp = sub.add_parser("simulate", help="simulate a greedy trajectory")
    tp.add_argument("--model", required=True)
    tp.add_argument("--rho", type=float)
    tp.add_argument("--steps", type=int, default=100)
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--out")
    tp.set_defaults(func=cmd_simulate)

    gp = sub.add_parser("compare", help="cost-dominance demonstrations")
    gp.add_argument("--kind", choices=["mdp", "blackwell"], required=True)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out")
    gp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Blowup as exc:
        sys.stderr.write(json.dumps({"error": "blowup",
                                     "detail": str(exc)}) + "\n")
        return 4
    except (LpInfeasible, PreconditionFailed) as exc:
        sys.stderr.write(json.dumps({"error": "infeasible",
                                     "detail": str(exc)}) + "\n")
        return 3
    except PomdpKitError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__,
                                     "detail": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
