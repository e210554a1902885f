"""Command-line interface: ``signedqubo {generate,detect,benchmark,export}``.

Defaults can be supplied as a JSON object in a config file given by
``--config`` or the ``SIGNEDQUBO_CONFIG`` environment variable. Its keys are
option names with dashes replaced by underscores (``bcd_h``, ``solver``, ...),
plus ``solver_params`` holding solver parameter overrides.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bcd import BcdConfig, run_bcd
from .datasets import generate_planted, load_graph, save_graph
from .experiment import (PRESET_ITERATIONS, PRESET_RUNS, PRESET_SOLVER, PRESETS,
                         preset_graph, run_benchmark)
from .formulations import METRICS, PenaltyPolicy, build
from .qubo import InfeasibleConfigurationError, decode_assignment, one_hot_violations
from .signed_graph import badness
from .solvers import SOLVERS, SolverSpec

CONFIG_ENV = "SIGNEDQUBO_CONFIG"
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


class CliError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _problem_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="dataset with its preset settings")
    p.add_argument("--metric", choices=METRICS, default="frustration")
    p.add_argument("--k", type=int, help="maximum number of communities (>= 2)")
    p.add_argument("--penalty", help="'degree' or 'uniform:M'")


def _solve_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=sorted(SOLVERS))
    p.add_argument("--sweeps", type=int, help="inner solver sweep budget")
    p.add_argument("--bcd-h", dest="bcd_h", type=int, help="number of node blocks")
    p.add_argument("--iterations", type=int, help="BCD iterations")
    p.add_argument("--partition", choices=("random_per_iteration", "fixed"),
                   default="random_per_iteration")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signedqubo",
                                     description="Signed-graph community detection via QUBO.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help=f"JSON defaults file (or ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a planted-cluster signed graph")
    g.add_argument("--clusters", type=_int_list, required=True, help="e.g. 8,12,12")
    g.add_argument("--prob", type=float, default=0.2, help="intra-cluster edge probability")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-repair", action="store_true", help="skip connectivity repair")
    g.add_argument("--out", help="output file (default stdout)")

    d = sub.add_parser("detect", help="find communities with BCD")
    _problem_options(d)
    _solve_options(d)
    d.add_argument("--strict", action="store_true", help="exit nonzero on infeasible result")
    d.add_argument("--out", help="result JSON file (default stdout)")

    b = sub.add_parser("benchmark", help="repeated seeded BCD runs with statistics")
    _problem_options(b)
    _solve_options(b)
    b.add_argument("--runs", type=int)
    b.add_argument("--reference-badness", dest="reference_badness", type=int)
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.add_argument("--out-dir", help="write report.json, runs.csv and traces/ here")

    e = sub.add_parser("export", help="write the QUBO as JSON")
    _problem_options(e)
    e.add_argument("--out", help="output file (default stdout)")
    return parser


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise CliError(f"config {path} must hold a JSON object")
    return cfg


def _setting(args, cfg, name, preset_value=None, fallback=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if preset_value is not None:
        return preset_value
    return cfg.get(name, fallback)


def _resolve_problem(args, cfg):
    preset = PRESETS.get(args.preset) if args.preset else None
    if preset:
        g = preset_graph(args.preset)
        name = args.preset
    else:
        path = args.graph or cfg.get("graph")
        if not path:
            raise CliError("one of --graph or --preset is required")
        g = load_graph(path)
        name = Path(path).stem
    k = _setting(args, cfg, "k", preset and preset["k"])
    if k is None:
        raise CliError("--k is required")
    if k < 2:
        raise CliError(f"--k must be >= 2 for community detection, got {k}")
    pen = _setting(args, cfg, "penalty", preset and f"uniform:{preset['penalty']:g}", "degree")
    try:
        penalty = PenaltyPolicy.parse(pen)
    except ValueError as exc:
        raise CliError(str(exc))
    return g, name, k, penalty, preset


def _resolve_bcd(args, cfg, g, preset) -> BcdConfig:
    name = _setting(args, cfg, "solver", fallback=None)
    sweeps = _setting(args, cfg, "sweeps")
    params = cfg.get("solver_params")
    if name is None and params is None and preset:
        spec = PRESET_SOLVER
        if sweeps is not None:
            spec = SolverSpec(spec.name, sweeps, spec.params)
    else:
        name = name or "pticm"
        if params is None:
            params = PRESET_SOLVER.params if name == "pticm" else {}
        spec = SolverSpec(name, sweeps or PRESET_SOLVER.sweeps, params)
    h = _setting(args, cfg, "bcd_h", preset and preset["h"][args.metric], 1)
    iterations = _setting(args, cfg, "iterations",
                          preset and PRESET_ITERATIONS, PRESET_ITERATIONS)
    if not 1 <= h <= g.n:
        raise CliError(f"--bcd-h must lie in [1, {g.n}], got {h}")
    return BcdConfig(h, iterations, args.partition, spec, args.seed)


def _dump(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args, cfg) -> int:
    try:
        g = generate_planted(args.clusters, args.prob, args.seed, repair=not args.no_repair)
    except ValueError as exc:
        raise CliError(str(exc))
    if args.out:
        save_graph(g, args.out)
    else:
        sys.stdout.write(g.to_edge_list())
    print(f"n={g.n} m_p={g.m_p} m_n={g.m_n}", file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_detect(args, cfg) -> int:
    g, name, k, penalty, preset = _resolve_problem(args, cfg)
    bcd_cfg = _resolve_bcd(args, cfg, g, preset)
    q, enc, desc = build(g, args.metric, k, penalty)
    tr = run_bcd(q, enc, bcd_cfg)
    x = tr.final_configuration
    out = {"dataset": name, "formulation": desc.to_dict(), "bcd": bcd_cfg.to_dict(),
           "final_energy": tr.final_energy, "objective": q.sign * tr.final_energy,
           "energy_trace": tr.energies}
    try:
        a = decode_assignment(x, enc)
    except InfeasibleConfigurationError:
        out |= {"feasible": False, "violations": {str(i): c for i, c in
                                                  sorted(one_hot_violations(x, enc).items())}}
        _dump(out, args.out)
        if args.strict:
            print("error: final configuration violates one-hot constraints", file=sys.stderr)
            return EXIT_INFEASIBLE
        return 0
    communities = [[g.node_ids[i] for i in c] for c in a.communities()]
    out |= {"feasible": True, "communities": communities, "k_prime": a.k_prime,
            "badness": badness(g, a),
            "labels": {g.node_ids[i]: int(c) for i, c in enumerate(a.canonical())}}
    _dump(out, args.out)
    return 0


def cmd_benchmark(args, cfg) -> int:
    g, name, k, penalty, preset = _resolve_problem(args, cfg)
    bcd_cfg = _resolve_bcd(args, cfg, g, preset)
    runs = _setting(args, cfg, "runs", preset and PRESET_RUNS, PRESET_RUNS)
    ref = args.reference_badness
    if ref is None:
        ref = preset["reference_badness"] if preset else cfg.get("reference_badness")
    if ref is None:
        raise CliError("--reference-badness is required without --preset")
    jobs = args.jobs if args.jobs != 1 else cfg.get("jobs", 1)
    report = run_benchmark(g, args.metric, k, penalty, bcd_cfg, runs, ref,
                           dataset=name, jobs=jobs)
    if args.out_dir:
        root = Path(args.out_dir)
        (root / "traces").mkdir(parents=True, exist_ok=True)
        (root / "report.json").write_text(report.to_json())
        (root / "runs.csv").write_text(report.runs_csv())
        for r in report.records:
            (root / "traces" / f"run_{r.run:03d}.csv").write_text(report.trace_csv(r.run))
        agg = report.aggregates()
        print(f"P={agg['success_probability']:g} B_best={agg['badness_best']} "
              f"B_mean={agg['badness_mean']} B_worst={agg['badness_worst']}")
    else:
        sys.stdout.write(report.to_json())
    return 0


def cmd_export(args, cfg) -> int:
    g, name, k, penalty, _ = _resolve_problem(args, cfg)
    q, enc, desc = build(g, args.metric, k, penalty)
    _dump({"dataset": name, "formulation": desc.to_dict(), "qubo": q.to_dict()}, args.out)
    return 0


COMMANDS = {"generate": cmd_generate, "detect": cmd_detect,
            "benchmark": cmd_benchmark, "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
