"""Repeated BCD runs with badness statistics and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .bcd import BcdConfig, run_bcd
from .formulations import PenaltyPolicy, build
from .qubo import InfeasibleConfigurationError, decode_assignment
from .signed_graph import Assignment, SignedGraph, badness
from .solvers import SolverSpec

SCHEMA_VERSION = 1

# Inner solver used by the presets: a cold ladder relative to the penalty
# scale plus community-swap moves, so a node can change community without
# passing through an infeasible state.
PRESET_SOLVER = SolverSpec("pticm", 40, {"num_temperatures": 8, "t_min": 0.005,
                                         "t_max": 0.5, "swap_fraction": 0.5})

PRESETS = {
    "d1": {"clusters": (8, 12, 12), "prob": 0.2, "graph_seed": 7, "k": 4, "penalty": 50.0,
           "h": {"frustration": 4, "modularity": 2}, "reference_badness": 0},
    "d2": {"clusters": (18, 22, 24), "prob": 0.2, "graph_seed": 7, "k": 4, "penalty": 10.0,
           "h": {"frustration": 4, "modularity": 4}, "reference_badness": 0},
    "d3": {"k": 5, "penalty": 50.0,
           "h": {"frustration": 4, "modularity": 5}, "reference_badness": 2},
}
PRESET_ITERATIONS = 200
PRESET_RUNS = 20


def preset_graph(name: str) -> SignedGraph:
    from .datasets import generate_planted, load_bundled_d3

    p = PRESETS[name]
    if name == "d3":
        return load_bundled_d3()
    return generate_planted(p["clusters"], p["prob"], p["graph_seed"])


def optimal_community_count(a: Assignment) -> int:
    return a.k_prime


@dataclass
class RunRecord:
    run: int
    seed: int
    final_energy: float
    feasible: bool
    badness: float
    k_prime: int
    success: bool
    labels: list | None
    trace: list = field(repr=False)

    def to_dict(self) -> dict:
        return {"run": self.run, "seed": self.seed, "final_energy": self.final_energy,
                "feasible": self.feasible,
                "badness": None if math.isinf(self.badness) else int(self.badness),
                "k_prime": self.k_prime, "success": self.success, "labels": self.labels,
                "trace": self.trace}


@dataclass
class BenchmarkReport:
    """Aggregates over runs. Energies are minimization-form, so best <= mean <= worst."""

    dataset: str
    metric: str
    k: int
    h: int
    penalty: str
    runs: int
    iterations: int
    reference_badness: int
    bcd: dict
    records: list
    graph_fingerprint: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.final_energy for r in self.records])

    @property
    def badnesses(self) -> np.ndarray:
        return np.array([r.badness for r in self.records if r.feasible], dtype=float)

    @property
    def success_probability(self) -> float:
        return sum(r.success for r in self.records) / self.runs

    def aggregates(self) -> dict:
        e = self.energies
        b = self.badnesses
        out = {"energy_best": float(e.min()), "energy_mean": float(e.mean()),
               "energy_worst": float(e.max()), "success_probability": self.success_probability,
               "infeasible_runs": sum(not r.feasible for r in self.records)}
        if b.size:
            out |= {"badness_best": float(b.min()), "badness_mean": float(b.mean()),
                    "badness_worst": float(b.max())}
        else:
            out |= {"badness_best": None, "badness_mean": None, "badness_worst": None}
        return out

    def to_dict(self, include_metadata: bool = True) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "dataset": self.dataset,
             "metric": self.metric, "k": self.k, "h": self.h, "penalty": self.penalty,
             "runs": self.runs, "iterations": self.iterations,
             "reference_badness": self.reference_badness, "bcd": self.bcd,
             "graph_fingerprint": self.graph_fingerprint,
             "aggregates": self.aggregates(),
             "records": [r.to_dict() for r in self.records]}
        if include_metadata:
            d["metadata"] = self.metadata
        return d

    def to_json(self, include_metadata: bool = True) -> str:
        return json.dumps(self.to_dict(include_metadata), sort_keys=True, indent=2) + "\n"

    def runs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run", "seed", "final_energy", "feasible", "badness", "k_prime", "success"])
        for r in self.records:
            w.writerow([r.run, r.seed, repr(r.final_energy), int(r.feasible),
                        "inf" if math.isinf(r.badness) else int(r.badness),
                        r.k_prime, int(r.success)])
        return buf.getvalue()

    def trace_csv(self, run: int) -> str:
        return trace_csv(self.records[run].trace)


def trace_csv(energies) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "energy"])
    for i, e in enumerate(energies, start=1):
        w.writerow([i, repr(float(e))])
    return buf.getvalue()


def _one_run(args):
    g, metric, k, penalty, cfg, run, reference = args
    q, enc, _ = build(g, metric, k, penalty)
    tr = run_bcd(q, enc, cfg)
    try:
        a = decode_assignment(tr.final_configuration, enc)
    except InfeasibleConfigurationError:
        return RunRecord(run, cfg.seed, tr.final_energy, False, math.inf, 0, False, None,
                         [float(e) for e in tr.energies])
    b = badness(g, a)
    return RunRecord(run, cfg.seed, tr.final_energy, True, float(b), a.k_prime,
                     b == reference, [int(v) for v in a.labels],
                     [float(e) for e in tr.energies])


def run_benchmark(g: SignedGraph, metric: str, k: int, penalty: PenaltyPolicy,
                  bcd_cfg: BcdConfig, runs: int, reference_badness: int, *,
                  dataset: str = "custom", jobs: int = 1) -> BenchmarkReport:
    """``runs`` independent BCD runs seeded ``bcd_cfg.seed + run_index``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    tasks = [(g, metric, k, penalty,
              BcdConfig(bcd_cfg.h, bcd_cfg.iterations, bcd_cfg.partition_strategy,
                        bcd_cfg.solver, bcd_cfg.seed + r), r, reference_badness)
             for r in range(runs)]
    if jobs == 1:
        records = [_one_run(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_one_run, tasks))
    return BenchmarkReport(
        dataset=dataset, metric=metric, k=k, h=bcd_cfg.h, penalty=str(penalty), runs=runs,
        iterations=bcd_cfg.iterations, reference_badness=int(reference_badness),
        bcd=bcd_cfg.to_dict(), records=records, graph_fingerprint=g.fingerprint(),
        metadata={"created": datetime.now(timezone.utc).isoformat(timespec="seconds")})
