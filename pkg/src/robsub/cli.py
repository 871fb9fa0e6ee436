"""Experiment runner.

One command, configured by a JSON file:

    robsub --config cfg.json [--seed S] [--out DIR] [--threads N] [--cap-override C]

The config's "kind" selects the experiment: icm-sim, equator-bench,
dosim-run, arisen-bench, rascal-bench, or backend-bench. Each run writes

    results.csv   deterministic rows (byte-identical for identical config+seed)
    timings.csv   wall-clock sidecar (inherently nondeterministic)
    manifest.json config echo, version, backend, per-phase times, file digests

Wall times live in the sidecar so results.csv stays reproducible.
"""

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .backend import HAVE_NUMBA, backend_name
from .cascade import EXACT_SPREAD_CAP, exact_spread, expected_spread
from .domains import (budget_family, make_adversarial_instance,
                      make_random_instance)
from .dosim import InfluenceGame, IntervalUncertainty, dosim_solve
from .equator import (EquatorConfig, MixedStrategy, double_oracle_solve,
                      equator_solve, worst_case_value)
from .errors import RobsubError
from .explore import ArisenConfig, arisen_select, change_sample
from .graphs import (CascadeConfig, EdgeParams, Graph, SbmParams, generate_sbm,
                     load_edge_list)
from .imax import greedy_influence, sample_coins, saa_greedy, saa_spread
from .rascal import (BoxPolytope, BudgetSimplex, CvarConfig, ScenarioSet,
                     SmoothnessParams, StochasticObjective, cvar_alpha,
                     rascal_solve)
from .submod import CardinalityConstraint, greedy_maximize
from .util import derive_seed


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def sha256_file(path):
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def build_graph(spec, default_seed=0):
    """Graph spec: {"path": ...} | {"n":, "edges": [[u,v],...]} | {"sbm": {...}}."""
    if "path" in spec:
        g, p = load_edge_list(spec["path"], n=spec.get("n"))
        return g, p
    if "edges" in spec:
        return Graph(spec["n"], [tuple(e) for e in spec["edges"]]), None
    if "sbm" in spec:
        s = spec["sbm"]
        params = SbmParams(tuple(s["sizes"]), s["p_within"], s["p_between"])
        return generate_sbm(params, spec.get("rng_seed", default_seed)), None
    raise RobsubError(f"unrecognized graph spec: {sorted(spec)}")


def build_edge_params(graph, spec, loaded=None):
    if spec is None:
        if loaded is None:
            raise RobsubError("no edge probabilities given and none in the file")
        return loaded
    if isinstance(spec, (int, float)):
        return EdgeParams.uniform(graph, float(spec))
    return EdgeParams(graph, np.asarray(spec, dtype=np.float64))


def _family_from_spec(spec, seed):
    if "path" in spec:
        spec = json.loads(Path(spec["path"]).read_text())
    kind = spec["type"]
    if kind == "budget-random":
        inst, unc = make_random_instance(
            spec["channels"], spec["customers"], spec.get("density", 0.3),
            spec["budget"], spec.get("members", 5),
            spec.get("rng_seed", seed), p_max=spec.get("p_max", 0.4))
        return budget_family(inst, unc), inst.budget
    if kind == "budget-adversarial":
        inst, unc = make_adversarial_instance(
            spec["groups"], spec.get("customers_per_group", 1),
            budget=spec.get("budget"), p=spec.get("p", 1.0))
        return budget_family(inst, unc), inst.budget
    raise RobsubError(f"unknown family type {kind!r}")


# ------------------------------------------------------------ experiments

def run_icm_sim(cfg, seed, cap):
    rows = []
    timing = []
    for idx, inst in enumerate(cfg["instances"]):
        iid = inst["id"]
        t0 = time.perf_counter()
        g, loaded = build_graph(inst["graph"], default_seed=seed)
        p = build_edge_params(g, inst.get("p"), loaded)
        ccfg = CascadeConfig.single(inst["seeds"], inst["horizon"])
        est, stderr = expected_spread(g, p, ccfg, inst.get("samples", 1000),
                                      derive_seed(seed, 3, idx))
        exact = ""
        if g.m * ccfg.horizon <= cap:
            exact = exact_spread(g, p, ccfg, cap=cap)
        rows.append([iid, g.n, g.m, ccfg.horizon, inst.get("samples", 1000),
                     est, stderr, exact, seed])
        timing.append([iid, (time.perf_counter() - t0) * 1000.0])
    header = ["instance_id", "n", "m", "horizon", "samples", "estimate",
              "stderr", "exact", "seed"]
    return header, rows, [["instance_id", "wall_time_ms"]] + timing


def compare_algorithms(family, k, seed, equator_params=None, do_params=None,
                       eval_samples=400):
    """Run EQUATOR / double oracle / non-robust greedy on one instance.

    Returns {algorithm: (worst_case_value, wall_time_ms, status)}; failures
    are recorded per-algorithm so the comparison keeps going.
    """
    constraint = CardinalityConstraint(k)
    out = {}

    def _timed(name, fn):
        t0 = time.perf_counter()
        try:
            val = fn()
            out[name] = (val, (time.perf_counter() - t0) * 1000.0, "ok")
        except Exception as exc:  # recorded, not fatal
            out[name] = ("", (time.perf_counter() - t0) * 1000.0,
                         f"error:{type(exc).__name__}")

    def _equator():
        ecfg = EquatorConfig(**(equator_params or {}))
        _, strategy = equator_solve(family, constraint, ecfg,
                                    derive_seed(seed, 61))
        sparse = strategy.to_sparse(ecfg.strategy_samples, derive_seed(seed, 67))
        return worst_case_value(sparse, family)

    def _do():
        params = dict(do_params or {})
        res = double_oracle_solve(family, constraint,
                                  tol=params.get("tol", 1e-6),
                                  max_iters=params.get("max_iters", 100),
                                  rng_seed=derive_seed(seed, 71),
                                  time_cap=params.get("time_cap"))
        if not res.converged:
            raise RobsubError("double oracle hit its iteration/time cap")
        return worst_case_value(res.strategy, family)

    def _greedy():
        S = greedy_maximize(family.mean_objective(), constraint)
        return worst_case_value(MixedStrategy.pure(S), family)

    _timed("equator", _equator)
    _timed("double-oracle", _do)
    _timed("greedy", _greedy)
    return out


def run_equator_bench(cfg, seed, cap):
    rows, timing = [], []
    algos = cfg.get("algorithms", ["equator", "double-oracle", "greedy"])
    for idx, inst in enumerate(cfg["instances"]):
        iid = inst["id"]
        family, k = _family_from_spec(inst["family"], seed)
        k = inst.get("k", k)
        res = compare_algorithms(family, k, derive_seed(seed, 5, idx),
                                 equator_params=cfg.get("equator"),
                                 do_params=cfg.get("double_oracle"),
                                 eval_samples=cfg.get("eval_samples", 400))
        for algo in algos:
            val, ms, status = res[algo]
            rows.append([iid, algo, family.n, k, family.m, val, status, seed])
            timing.append([iid, algo, ms])
    header = ["instance_id", "algorithm", "n", "k", "m", "worst_case_value",
              "status", "seed"]
    return header, rows, [["instance_id", "algorithm", "wall_time_ms"]] + timing


def run_dosim(cfg, seed, cap):
    rows, timing = [], []
    for idx, inst in enumerate(cfg["instances"]):
        iid = inst["id"]
        t0 = time.perf_counter()
        g, loaded = build_graph(inst["graph"], default_seed=seed)
        iv = inst["interval"]
        intervals = IntervalUncertainty(g, iv[0], iv[1])
        game = InfluenceGame(g, intervals, inst["k"], inst["horizon"],
                             payoff=inst.get("payoff", "ratio"))
        res = dosim_solve(game, inst["delta"], tol=inst.get("tol", 1e-3),
                          max_iters=inst.get("max_iters", 60),
                          samples=inst.get("samples"),
                          rng_seed=derive_seed(seed, 7, idx),
                          opt_mode=inst.get("opt_mode", "exact"),
                          shared=inst.get("shared", True))
        for it, (val, sup) in enumerate(zip(res.value_trace, res.support_trace),
                                        start=1):
            rows.append([iid, it, val, sup[0], sup[1], int(res.converged),
                         int(res.warning), int(res.approx_opt), seed])
        timing.append([iid, (time.perf_counter() - t0) * 1000.0])
    header = ["instance_id", "iteration", "game_value", "support_sets",
              "support_grid", "converged", "warning", "approx_opt", "seed"]
    return header, rows, [["instance_id", "wall_time_ms"]] + timing


def run_arisen_bench(cfg, seed, cap):
    rows, timing = [], []
    sbm = cfg["sbm"]
    params = SbmParams(tuple(sbm["sizes"]), sbm["p_within"], sbm["p_between"])
    k = cfg["k"]
    horizon = cfg["horizon"]
    p_val = cfg["p"]
    trials = cfg.get("trials", 50)
    n_graphs = cfg.get("graphs", 1)
    protocols = cfg.get("protocols", ["arisen"])
    acfg = ArisenConfig(**cfg.get("arisen", {}))
    greedy_reps = cfg.get("greedy_replicates", 100)
    eval_reps = cfg.get("eval_replicates", 200)
    trial_id = 0
    for gi in range(n_graphs):
        t0 = time.perf_counter()
        g = generate_sbm(params, derive_seed(seed, 73, gi))
        ep = EdgeParams.uniform(g, p_val)
        greedy_seeds, _ = greedy_influence(g, ep, horizon, k, greedy_reps,
                                           derive_seed(seed, 79, gi))
        eval_coins = sample_coins(g, ep, horizon, eval_reps,
                                  derive_seed(seed, 83, gi))
        greedy_spread = saa_spread(g, eval_coins, horizon, greedy_seeds)
        per_graph = trials // n_graphs + (1 if gi < trials % n_graphs else 0)
        for t in range(per_graph):
            for proto in protocols:
                if proto == "arisen":
                    seeds, stats = arisen_select(g, k, params, acfg,
                                                 derive_seed(seed, 89, gi, t))
                    qu, frac = stats.queries_used, stats.fraction_queried
                elif proto == "change":
                    observed, ch = change_sample(g, cfg.get("change_fraction", 0.18),
                                                 derive_seed(seed, 97, gi, t))
                    ocoins = sample_coins(observed, EdgeParams.uniform(observed, p_val),
                                          horizon, greedy_reps,
                                          derive_seed(seed, 101, gi, t))
                    seeds, _ = saa_greedy(observed, ocoins, horizon, k)
                    qu, frac = ch.charged, ch.fraction_queried
                else:
                    raise RobsubError(f"unknown protocol {proto!r}")
                spread = saa_spread(g, eval_coins, horizon, seeds)
                hit = ""
                if g.labels is not None:
                    hit = len({int(g.labels[v]) for v in seeds})
                rows.append([trial_id, proto, qu, frac, spread, greedy_spread,
                             spread / greedy_spread, hit, seed])
            trial_id += 1
        timing.append([f"graph-{gi}", (time.perf_counter() - t0) * 1000.0])
    header = ["trial", "protocol", "queries_used", "fraction_queried",
              "spread", "greedy_full_spread", "ratio", "communities_hit",
              "seed"]
    return header, rows, [["phase", "wall_time_ms"]] + timing


def _objective_from_spec(spec):
    kind = spec["type"]
    if kind == "modular-scenarios":
        W = np.asarray(spec["weights"], dtype=np.float64)
        n = W.shape[1]
        sm = SmoothnessParams(l1=float(np.linalg.norm(W, axis=1).max()),
                              l2=1.0,
                              grad_bound=float(np.linalg.norm(W, axis=1).max()),
                              value_bound=float(W.sum(axis=1).max()))
        obj = StochasticObjective(
            n, np.ones(n),
            value_fn=lambda x, y: float(W[y] @ x),
            grad_fn=lambda x, y: W[y],
            sampler_fn=lambda rng: int(rng.integers(W.shape[0])),
            smoothness=sm, name="modular-scenarios")
        scen = ScenarioSet.uniform(list(range(W.shape[0])))
        return obj, scen
    if kind == "saturating":
        A = np.asarray(spec["rates"], dtype=np.float64)
        n = A.shape[1]
        sm = SmoothnessParams(l1=float(np.linalg.norm(A, axis=1).max()),
                              l2=float(A.max()),
                              grad_bound=float(np.linalg.norm(A, axis=1).max()),
                              value_bound=float(A.sum(axis=1).max()))
        obj = StochasticObjective(
            n, np.ones(n),
            value_fn=lambda x, y: float(A[y] @ (1.0 - np.exp(-x))),
            grad_fn=lambda x, y: A[y] * np.exp(-x),
            sampler_fn=lambda rng: int(rng.integers(A.shape[0])),
            smoothness=sm, name="saturating")
        scen = ScenarioSet.uniform(list(range(A.shape[0])))
        return obj, scen
    raise RobsubError(f"unknown objective type {kind!r}")


def _polytope_from_spec(spec):
    kind = spec["type"]
    if kind == "box":
        return BoxPolytope(np.asarray(spec["upper"], dtype=np.float64))
    if kind == "simplex":
        return BudgetSimplex(spec["n"], spec["budget"], spec.get("upper", 1.0))
    raise RobsubError(f"unknown polytope type {kind!r}")


def run_rascal_bench(cfg, seed, cap):
    rows, timing = [], []
    for idx, inst in enumerate(cfg["instances"]):
        iid = inst["id"]
        t0 = time.perf_counter()
        obj, scen = _objective_from_spec(inst["objective"])
        poly = _polytope_from_spec(inst["polytope"])
        ccfg = CvarConfig(alpha=inst["alpha"],
                          iterations=inst.get("iterations", 100),
                          scenario_samples=inst.get("scenario_samples", 64),
                          epsilon=inst.get("epsilon", 0.02))
        trace = []
        x = rascal_solve(obj, poly, ccfg, derive_seed(seed, 9, idx),
                         scenarios=scen if inst.get("fixed_scenarios", True) else None,
                         trace=trace)
        for it, (tau, cv) in enumerate(trace, start=1):
            rows.append([iid, it, tau, cv, seed])
        final = cvar_alpha(obj, x, scen, ccfg.alpha)
        rows.append([iid, "final", "", final, seed])
        timing.append([iid, (time.perf_counter() - t0) * 1000.0])
    header = ["instance_id", "iteration", "tau", "cvar_estimate", "seed"]
    return header, rows, [["instance_id", "wall_time_ms"]] + timing


def run_backend_bench(cfg, seed, cap):
    from .bench import backend_benchmark
    rows, timing = backend_benchmark(
        sizes=cfg.get("sizes", [400, 800]),
        horizon=cfg.get("horizon", 4),
        replicates=cfg.get("replicates", 64),
        p=cfg.get("p", 0.08),
        rng_seed=seed,
        repeats=cfg.get("repeats", 3),
    )
    header = ["workload", "n", "m", "replicates", "backend", "checksum",
              "seed"]
    return header, rows, timing


RUNNERS = {
    "icm-sim": run_icm_sim,
    "equator-bench": run_equator_bench,
    "dosim-run": run_dosim,
    "arisen-bench": run_arisen_bench,
    "rascal-bench": run_rascal_bench,
    "backend-bench": run_backend_bench,
}


def run_experiment(config, seed=None, out_dir=".", threads=None, cap_override=None):
    """Execute one configured experiment; returns the manifest dict."""
    kind = config.get("kind")
    if kind not in RUNNERS:
        raise RobsubError(f"unknown experiment kind {kind!r}")
    seed = config.get("seed") if seed is None else seed
    if seed is None:
        raise RobsubError("a seed is mandatory (config 'seed' or --seed)")
    seed = int(seed)
    cap = int(cap_override) if cap_override else EXACT_SPREAD_CAP
    if threads and HAVE_NUMBA:
        import numba
        numba.set_num_threads(max(1, int(threads)))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    header, rows, timing_rows = RUNNERS[kind](config, seed, cap)
    run_ms = (time.perf_counter() - t0) * 1000.0
    results_path = out / "results.csv"
    timings_path = out / "timings.csv"
    write_csv(results_path, header, rows)
    write_csv(timings_path, timing_rows[0], timing_rows[1:])
    manifest = {
        "kind": kind,
        "seed": seed,
        "version": __version__,
        "backend": backend_name(),
        "cap": cap,
        "config": config,
        "phases": {"run_ms": run_ms},
        "digests": {
            "results.csv": sha256_file(results_path),
            "timings.csv": sha256_file(timings_path),
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def main(argv=None):
    ap = argparse.ArgumentParser(prog="robsub",
                                 description="Benchmark runner for robust/"
                                             "risk-averse submodular optimization")
    ap.add_argument("--config", required=True, help="experiment config (JSON)")
    ap.add_argument("--seed", type=int, default=None,
                    help="override the config seed")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--cap-override", type=int, default=None,
                    help="raise enumeration caps (use with care)")
    args = ap.parse_args(argv)
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        manifest = run_experiment(config, seed=args.seed, out_dir=args.out,
                                  threads=args.threads,
                                  cap_override=args.cap_override)
    except (RobsubError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"kind": manifest["kind"],
                      "results": str(Path(args.out) / "results.csv"),
                      "run_ms": manifest["phases"]["run_ms"]}, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
