"""Acceptance checks. Each test records one PASS/FAIL line; see ``RESULTS``.

Run ``pytest tests/test_acceptance.py`` (lines are printed in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

import itertools
import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))
import oracles  # noqa: E402
from signedqubo.bcd import BcdConfig  # noqa: E402
from signedqubo.datasets import generate_planted, load_bundled_d3, planted_assignment  # noqa: E402
from signedqubo.experiment import (PRESET_ITERATIONS, PRESET_RUNS, PRESET_SOLVER,  # noqa: E402
                                   PRESETS, preset_graph, run_benchmark)
from signedqubo.formulations import (FRUSTRATION, MODULARITY, PenaltyPolicy, build,  # noqa: E402
                                     build_frustration_two, build_modularity_two)
from signedqubo.qubo import (Encoding, decode_assignment, encode_assignment,  # noqa: E402
                             evaluate_many, is_feasible)
from signedqubo.signed_graph import Assignment, SignedGraph, badness, minimum_badness  # noqa: E402
from signedqubo.solvers import PticmParams, solve_brute_force, solve_pticm  # noqa: E402

RESULTS: dict[int, str] = {}


def record(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:>2}: {detail}"
    RESULTS[num] = RESULTS[num] + "\n" + line if num in RESULTS else line
    print(line)
    return ok


def instance_set(count, seed, max_n=6):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, max_n + 1))
        dens = rng.uniform(0.3, 1.0)
        edges = [(i, j, 1 if rng.random() < 0.5 else -1)
                 for i, j in itertools.combinations(range(n), 2) if rng.random() < dens]
        out.append((n, edges))
    return out


def labelings(n, k):
    return np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64)


def onehot_matrix(L, k):
    n = L.shape[1]
    X = np.zeros((L.shape[0], n * k), dtype=np.int8)
    rows = np.arange(L.shape[0])[:, None]
    X[rows, np.arange(n) * k + L] = 1
    return X


def all_bits(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)


INSTANCES = instance_set(200, 2024)


def test_criterion_01_oracle_equivalence():
    t0 = time.perf_counter()
    mismatches = []
    checks = 0
    for idx, (n, edges) in enumerate(INSTANCES):
        g = SignedGraph.from_edges(n, edges)
        for k in (2, 3):
            q, enc, _ = build(g, FRUSTRATION, k, PenaltyPolicy.degree_scaled())
            x = solve_brute_force(q).best_configuration
            expect = oracles.min_badness(n, edges, k)
            got = badness(g, decode_assignment(x, enc)) if is_feasible(x, enc) else None
            checks += 1
            if got != expect:
                mismatches.append((idx, k, got, expect))
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 60
    record(1, ok, f"{checks} QUBO optima on {len(INSTANCES)} graphs vs badness enumeration, "
                  f"{len(mismatches)} mismatches, {dt:.1f}s (limit 60s)")
    assert ok, mismatches[:5]


def test_criterion_02_frustration_identities():
    bad = 0
    configs = 0
    for n, edges in INSTANCES:
        g = SignedGraph.from_edges(n, edges)
        L2 = labelings(n, 2)
        q2 = build_frustration_two(g)
        e2 = evaluate_many(q2, L2.astype(np.int8))
        b2 = np.array([oracles.badness(edges, lab) for lab in L2.tolist()])
        bad += int(np.count_nonzero(e2 != 4 * b2 - 4 * g.m_n))
        configs += L2.shape[0]
        for k in (2, 3):
            L = labelings(n, k)
            qk, _, _ = build(g, FRUSTRATION, k, PenaltyPolicy.degree_scaled())
            ek = evaluate_many(qk, onehot_matrix(L, k))
            bk = np.array([oracles.badness(edges, lab) for lab in L.tolist()])
            bad += int(np.count_nonzero(ek != 2 * bk - 2 * g.m_n))
            configs += L.shape[0]
    ok = bad == 0
    record(2, ok, f"{configs} feasible configurations, {bad} identity violations (exact)")
    assert ok


def _argmax_set(values, partitions, tol=1e-9):
    top = values.max()
    return {oracles.canonical(p) for v, p in zip(values, partitions) if v >= top - tol}


def test_criterion_03_modularity_consistency():
    failures = []
    graphs = instance_set(100, 77)
    for idx, (n, edges) in enumerate(graphs):
        g = SignedGraph.from_edges(n, edges)
        spin_q = build_modularity_two(g)
        X = all_bits(n)
        spin_best = _argmax_set(evaluate_many(spin_q, X), X.tolist())
        oh_q, enc, _ = build(g, MODULARITY, 2, PenaltyPolicy.degree_scaled())
        Y = all_bits(2 * n)
        vals = evaluate_many(oh_q, Y)
        top = vals.max()
        winners = Y[vals >= top - 1e-9]
        feasible = all(is_feasible(y, enc) for y in winners)
        oh_best = {oracles.canonical(decode_assignment(y, enc).labels.tolist())
                   for y in winners} if feasible else None
        solved = decode_assignment(solve_brute_force(oh_q).best_configuration, enc)
        if not (feasible and oh_best == spin_best
                and oracles.canonical(solved.labels.tolist()) in spin_best):
            failures.append(idx)
    ok = not failures
    record(3, ok, f"{len(graphs)} graphs, argmax sets of spin and one-hot forms "
                  f"{'identical' if ok else f'differ on {len(failures)}'}")
    assert ok, failures[:5]


def test_criterion_04_penalty_guarantee():
    t0 = time.perf_counter()
    graphs = 0
    violations = 0
    for n in range(1, 5):
        pairs = list(itertools.combinations(range(n), 2))
        X = all_bits(2 * n)
        enc = Encoding(n, 2)
        feas = np.array([is_feasible(x, enc) for x in X])
        for signs in itertools.product((0, 1, -1), repeat=len(pairs)):
            edges = [(i, j, s) for (i, j), s in zip(pairs, signs) if s]
            g = SignedGraph.from_edges(n, edges)
            q, _, _ = build(g, FRUSTRATION, 2, PenaltyPolicy.degree_scaled())
            e = evaluate_many(q, X)
            if not e[~feas].min() > e[feas].min():
                violations += 1
            graphs += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 300
    record(4, ok, f"{graphs} graphs (all sign patterns, n<=4), {violations} with an "
                  f"infeasible configuration at or below the feasible optimum, {dt:.1f}s")
    assert ok


def test_criterion_05_community_count():
    wrong = []
    cases = []
    rng = np.random.default_rng(5)
    for i in range(30):
        sizes = tuple(int(s) for s in rng.integers(2, 5, 2))
        cases.append((sizes, 3, 2, i))
    for i in range(30):
        sizes = tuple(int(s) for s in rng.permutation([1, 2, 3] if i % 2 else [2, 2, 2]))
        cases.append((sizes, 4, 3, 100 + i))
    for sizes, k, expect, seed in cases:
        g = generate_planted(sizes, float(rng.uniform(0.3, 1.0)), seed)
        q, enc, _ = build(g, FRUSTRATION, k, PenaltyPolicy.degree_scaled())
        a = decode_assignment(solve_brute_force(q).best_configuration, enc)
        fewer = minimum_badness(g, expect - 1)[0]
        if a.k_prime != expect or badness(g, a) != 0 or fewer <= 0:
            wrong.append((sizes, seed, a.k_prime))
    ok = not wrong
    record(5, ok, f"{len(cases)} planted instances (2 clusters with k=3, 3 clusters with "
                  f"k=4, n<=8): {len(cases) - len(wrong)} optima with k' equal to the "
                  f"planted count")
    assert ok, wrong[:5]


_REPORTS = {}


def _preset_report(name, metric):
    key = (name, metric)
    if key not in _REPORTS:
        p = PRESETS[name]
        g = preset_graph(name)
        cfg = BcdConfig(h=p["h"][metric], iterations=PRESET_ITERATIONS,
                        solver=PRESET_SOLVER, seed=0)
        t0 = time.perf_counter()
        rep = run_benchmark(g, metric, p["k"], PenaltyPolicy.uniform(p["penalty"]), cfg,
                            PRESET_RUNS, p["reference_badness"], dataset=name)
        _REPORTS[key] = (rep, time.perf_counter() - t0)
    return _REPORTS[key]


@pytest.mark.slow
def test_criterion_06_planted_family_reproduction():
    total = 0.0
    outcomes = []
    for name in ("d1", "d2"):
        for metric in (FRUSTRATION, MODULARITY):
            rep, dt = _preset_report(name, metric)
            total += dt
            best = min(rep.records, key=lambda r: (r.badness, r.final_energy))
            ok = best.badness == 0 and best.k_prime == 3
            outcomes.append(ok)
            record(6, ok, f"{name} {metric}: best-of-{rep.runs} badness {best.badness:g}, "
                          f"k'={best.k_prime}, P={rep.success_probability:.2f}, {dt:.0f}s")
    ok = all(outcomes) and total < 600
    record(6, total < 600, f"total runtime {total:.0f}s (limit 600s)")
    assert ok


@pytest.mark.slow
def test_criterion_07_tribes_reproduction():
    g = load_bundled_d3()
    b3, a3 = minimum_badness(g, 3)
    b5, _ = minimum_badness(g, 5)
    ref_ok = b3 == b5 == 2 and a3.k_prime == 3
    record(7, ref_ok, f"exact search: minimum badness {b3} (k<=3), {b5} (k<=5)")
    total = 0.0
    outcomes = [ref_ok]
    for metric in (FRUSTRATION, MODULARITY):
        rep, dt = _preset_report("d3", metric)
        total += dt
        reached = sum(r.badness == 2 for r in rep.records)
        outcomes.append(reached == rep.runs)
        record(7, reached == rep.runs,
               f"d3 {metric}: {reached}/{rep.runs} runs at badness 2, {dt:.0f}s")
    outcomes.append(total < 120)
    record(7, total < 120, f"total runtime {total:.0f}s (limit 120s)")
    assert all(outcomes)


@pytest.mark.slow
def test_criterion_08_monotone_traces():
    for name, metric in itertools.product(("d1", "d2", "d3"), (FRUSTRATION, MODULARITY)):
        _preset_report(name, metric)
    traces = [r.trace for rep, _ in _REPORTS.values() for r in rep.records]
    bad = sum(any(b > a for a, b in zip(t, t[1:])) for t in traces)
    ok = bad == 0 and len(traces) > 0
    record(8, ok, f"{len(traces)} benchmark traces, {bad} with an increase")
    assert ok


_C9 = {"moves": 0, "worst": 0.0, "runs": 0}


@settings(max_examples=40, deadline=None, database=None)
@given(st.integers(0, 2**31), st.integers(2, 8), st.sampled_from([FRUSTRATION, MODULARITY]),
       st.sampled_from([0.0, 0.5]))
def _cluster_property(seed, n, metric, swap):
    rng = np.random.default_rng(seed)
    edges = [(i, j, 1 if rng.random() < 0.5 else -1)
             for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.6]
    g = SignedGraph.from_edges(n, edges)
    q, _, _ = build(g, metric, 3, PenaltyPolicy.degree_scaled())
    params = PticmParams(num_temperatures=6, swap_fraction=swap, block_size=3)
    res = solve_pticm(q, seed=seed, sweeps=25, params=params, check=True)
    log = res.stats["cluster_log"]
    gap = float(np.abs(log[:, 0] - log[:, 1]).max()) if log.size else 0.0
    _C9["moves"] += res.stats["cluster_moves"]
    _C9["runs"] += 1
    _C9["worst"] = max(_C9["worst"], gap)
    assert gap <= 1e-9


def test_criterion_09_isoenergetic_cluster_moves():
    _C9.update(moves=0, worst=0.0, runs=0)
    try:
        _cluster_property()
        ok = _C9["moves"] > 0
    except AssertionError:
        ok = False
    record(9, ok, f"{_C9['runs']} instrumented runs, {_C9['moves']} cluster moves, "
                  f"largest pair-energy change {_C9['worst']:.2e} (limit 1e-9)")
    assert ok


def _cli(args, cwd):
    proc = subprocess.run([sys.executable, "-m", "signedqubo", *args], cwd=cwd,
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_criterion_10_cli_determinism(tmp_path):
    graph = tmp_path / "g.txt"
    _cli(["generate", "--clusters", "4,4,4", "--prob", "0.5", "--seed", "3",
          "--out", str(graph)], tmp_path)
    commands = {
        "generate": ["generate", "--clusters", "8,12,12", "--prob", "0.2", "--seed", "7"],
        "detect": ["detect", "--graph", str(graph), "--k", "4", "--bcd-h", "3",
                   "--iterations", "20", "--seed", "5"],
        "detect-sa": ["detect", "--graph", str(graph), "--k", "4", "--solver", "sa",
                      "--bcd-h", "2", "--iterations", "10", "--seed", "5",
                      "--metric", "modularity"],
        "benchmark": ["benchmark", "--graph", str(graph), "--k", "4", "--bcd-h", "3",
                      "--iterations", "10", "--runs", "3", "--reference-badness", "0",
                      "--seed", "1"],
        "export": ["export", "--preset", "d3", "--metric", "modularity"],
    }
    differing = []
    for name, args in commands.items():
        a, b = _cli(args, tmp_path), _cli(args, tmp_path)
        if name == "benchmark":
            a, b = (json.loads(s) for s in (a, b))
            a.pop("metadata")
            b.pop("metadata")
        if a != b:
            differing.append(name)
    ok = not differing
    record(10, ok, f"{len(commands)} CLI commands run twice, "
                   f"{'byte-identical' if ok else 'differ: ' + ', '.join(differing)} "
                   f"(metadata excluded)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
