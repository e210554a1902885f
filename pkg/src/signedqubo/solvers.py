"""QUBO solvers sharing one result contract.

Solvers always minimize ``problem.minimization_form()``. ``best_energy`` is
reported in that form (lower is better, for either sense) and
``best_objective`` in the problem's own sense.

Available solvers:

* ``brute`` - exhaustive enumeration, the verification oracle.
* ``sa`` - single-flip simulated annealing on a geometric schedule.
* ``pticm`` - parallel tempering with isoenergetic (Houdayer) cluster moves
  between the two replicas held at each temperature.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import kernels
from .qubo import QuboProblem, evaluate

BRUTE_FORCE_MAX_VARS = 26
_CHUNK_FLOATS = 1 << 21


class SolverError(RuntimeError):
    pass


@dataclass
class SolverResult:
    best_configuration: np.ndarray
    best_energy: float
    best_objective: float
    energy_trace: list = field(default_factory=list)
    seed: int | None = None
    solver: str = ""
    params: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "seed": self.seed,
            "params": self.params,
            "best_energy": self.best_energy,
            "best_objective": self.best_objective,
            "best_configuration": [int(v) for v in self.best_configuration],
            "energy_trace": [[int(s), float(e)] for s, e in self.energy_trace],
        }


@dataclass(frozen=True)
class SAParams:
    """Geometric cooling from ``t_start`` to ``t_end``.

    ``None`` temperatures default to ``2 * max|coef|`` and
    ``0.05 * min nonzero |coef|`` of the problem being solved.
    """

    t_start: float | None = None
    t_end: float | None = None
    swap_fraction: float = 0.0
    block_size: int = 0

    def __post_init__(self):
        if self.t_start is not None and self.t_end is not None:
            if not self.t_start > self.t_end > 0:
                raise ValueError("schedule needs t_start > t_end > 0")
        elif any(t is not None and not t > 0 for t in (self.t_start, self.t_end)):
            raise ValueError("temperatures must be positive")
        _check_swap(self.swap_fraction, self.block_size)


@dataclass(frozen=True)
class PticmParams:
    """Parallel tempering ladder and move schedule.

    Temperatures are geometric between ``t_min`` and ``t_max``; with
    ``relative`` they are multiplied by the problem's largest absolute
    coefficient. ``betas`` overrides the ladder with explicit inverse
    temperatures (strictly increasing or decreasing).
    """

    num_temperatures: int = 16
    t_min: float = 0.1
    t_max: float = 10.0
    relative: bool = True
    betas: tuple | None = None
    sweeps_per_exchange: int = 1
    cluster_move_period: int = 1
    replicas_per_temperature: int = 2
    swap_fraction: float = 0.0
    block_size: int = 0

    def __post_init__(self):
        if self.betas is not None:
            b = np.asarray(self.betas, dtype=float)
            d = np.diff(b)
            if b.size < 2 or np.any(b <= 0) or not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("explicit betas must be positive and strictly monotone")
            object.__setattr__(self, "betas", tuple(float(v) for v in b))
        else:
            if self.num_temperatures < 2:
                raise ValueError("num_temperatures must be >= 2")
            if not 0 < self.t_min < self.t_max:
                raise ValueError("ladder needs 0 < t_min < t_max")
        if self.sweeps_per_exchange < 1 or self.cluster_move_period < 1:
            raise ValueError("sweeps_per_exchange and cluster_move_period must be >= 1")
        if self.replicas_per_temperature != 2:
            raise ValueError("replicas_per_temperature is fixed at 2")
        _check_swap(self.swap_fraction, self.block_size)

    def ladder(self, scale: float) -> np.ndarray:
        """Inverse temperatures, coldest first."""
        if self.betas is not None:
            return np.sort(np.asarray(self.betas))[::-1].copy()
        s = scale if self.relative else 1.0
        temps = np.geomspace(self.t_min, self.t_max, self.num_temperatures) * s
        return 1.0 / temps


def _check_swap(fraction, block_size):
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("swap_fraction must lie in [0, 1]")
    if fraction > 0 and block_size < 2:
        raise ValueError("community-swap moves need block_size (k) >= 2")


def params_from_dict(cls, d: dict | None):
    """Build a params dataclass from a (possibly partial) mapping."""
    d = dict(d or {})
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    if d.get("betas") is not None:
        d["betas"] = tuple(d["betas"])
    return cls(**d)


def _echo(params) -> dict:
    d = asdict(params)
    if d.get("betas") is not None:
        d["betas"] = list(d["betas"])
    return d


def _check_blocks(q: QuboProblem, params) -> None:
    if params.swap_fraction > 0 and q.num_vars % params.block_size:
        raise ValueError(f"community-swap moves need num_vars ({q.num_vars}) "
                         f"divisible by block_size ({params.block_size})")


def _energy_scale(q: QuboProblem) -> float:
    s = q.max_abs_coefficient()
    return s if s > 0 else 1.0


def _min_nonzero(q: QuboProblem) -> float:
    vals = np.concatenate([np.abs(q.linear), np.abs(q.values)])
    vals = vals[vals > 1e-12]
    return float(vals.min()) if vals.size else 1.0


def _initial_bits(q: QuboProblem, initial) -> np.ndarray | None:
    if initial is None:
        return None
    x = np.asarray(initial)
    if x.shape != (q.num_vars,):
        raise ValueError(f"initial configuration must have length {q.num_vars}")
    if np.any((x != 0) & (x != 1)):
        raise ValueError("initial configuration must be binary")
    return x.astype(np.int8)


def _finish(q, qmin, best_x, trace, seed, name, params, stats=None) -> SolverResult:
    best_x = best_x.astype(np.int8)
    e = evaluate(qmin, best_x)
    return SolverResult(best_x, e, evaluate(q, best_x), trace, seed, name, params,
                        stats or {})


def _compress_trace(values: np.ndarray, start_sweep: int, start_best: float):
    trace = [(0, float(start_best))]
    last = start_best
    for s, v in enumerate(values, start=start_sweep):
        if v < last:
            trace.append((s, float(v)))
            last = v
    return trace


def solve_brute_force(problem: QuboProblem, *, max_vars: int = BRUTE_FORCE_MAX_VARS,
                      tol: float = 1e-9, **_ignored) -> SolverResult:
    """Exact optimum; ties go to the lexicographically smallest configuration."""
    if problem.num_vars > max_vars:
        raise SolverError(f"brute force capped at {max_vars} variables, "
                          f"problem has {problem.num_vars}")
    qmin = problem.minimization_form()
    indptr, indices, data = qmin.csr_arrays()
    x = kernels.exhaustive_minimum(indptr, indices, data, qmin.linear, qmin.offset,
                                   qmin.dense(), tol)
    res = _finish(problem, qmin, x, [], None, "brute", {"max_vars": max_vars})
    res.energy_trace = [(0, res.best_energy)]
    return res


def solve_sa(problem: QuboProblem, *, seed: int = 0, sweeps: int = 1000,
             params: SAParams | None = None, initial=None) -> SolverResult:
    """Simulated annealing; returns the best configuration visited."""
    params = params or SAParams()
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    _check_blocks(problem, params)
    qmin = problem.minimization_form()
    n = qmin.num_vars
    t_start = params.t_start if params.t_start is not None else 2.0 * _energy_scale(qmin)
    t_end = params.t_end if params.t_end is not None else 0.05 * _min_nonzero(qmin)
    if not t_start > t_end:
        t_end = 0.5 * t_start
    rng = np.random.default_rng(seed)
    x = _initial_bits(qmin, initial)
    if x is None:
        x = rng.integers(0, 2, n, dtype=np.int8)
    x = x.copy()
    indptr, indices, data = qmin.csr_arrays()
    f = kernels.local_fields(indptr, indices, data, qmin.linear, x)
    e = kernels.energy(indptr, indices, data, qmin.linear, qmin.offset, x)
    best_x = x.copy()
    best_e = e
    start_best = e
    temps = np.geomspace(t_start, t_end, sweeps) if sweeps > 1 else np.array([t_end])
    betas_all = 1.0 / temps
    use_swap = params.swap_fraction > 0
    chunk = max(1, _CHUNK_FLOATS // (n * (3 if use_swap else 1)))
    trace_vals = np.empty(sweeps)
    for s0 in range(0, sweeps, chunk):
        betas = betas_all[s0:s0 + chunk]
        m = betas.size
        u_acc = rng.random((m, n))
        if use_swap:
            u_kind = rng.random((m, n))
            u_pick = rng.random((m, n))
        else:
            u_kind = u_pick = u_acc
        e, best_e = kernels.anneal(x, f, e, betas, u_acc, u_kind, u_pick,
                                   params.swap_fraction, params.block_size,
                                   indptr, indices, data, best_x, best_e,
                                   trace_vals[s0:s0 + m])
        # resync against drift
        e = kernels.energy(indptr, indices, data, qmin.linear, qmin.offset, x)
        f = kernels.local_fields(indptr, indices, data, qmin.linear, x)
    echo = _echo(params) | {"t_start_abs": t_start, "t_end_abs": t_end, "sweeps": sweeps}
    trace = _compress_trace(trace_vals, 1, start_best)
    return _finish(problem, qmin, best_x, trace, seed, "sa", echo)


def solve_pticm(problem: QuboProblem, *, seed: int = 0, sweeps: int = 1000,
                params: PticmParams | None = None, initial=None,
                check: bool = False) -> SolverResult:
    """Parallel tempering with isoenergetic cluster moves.

    ``sweeps`` counts Metropolis sweeps per replica. Per period every replica
    gets ``sweeps_per_exchange`` sweeps; every ``cluster_move_period``-th
    period the two replicas at each temperature undergo one Houdayer cluster
    exchange; then neighbouring temperatures attempt replica exchange.

    With ``check=True`` every cluster move is bracketed by from-scratch pair
    energies (``stats['cluster_log']``) and incremental energies are compared
    with full re-evaluation after every period; drift above 1e-9 raises.
    """
    params = params or PticmParams()
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    _check_blocks(problem, params)
    qmin = problem.minimization_form()
    n = qmin.num_vars
    betas = params.ladder(_energy_scale(qmin))
    T = betas.size
    R = params.replicas_per_temperature
    spe = params.sweeps_per_exchange
    periods = math.ceil(sweeps / spe)
    rng = np.random.default_rng(seed)
    x0 = _initial_bits(qmin, initial)
    X = rng.integers(0, 2, (R, T, n), dtype=np.int8)
    if x0 is not None:
        X[0, :, :] = x0
    indptr, indices, data = qmin.csr_arrays()
    lin, off = qmin.linear, qmin.offset

    def resync():
        for r in range(R):
            for t in range(T):
                F[r, t] = kernels.local_fields(indptr, indices, data, lin, X[r, t])
                E[r, t] = kernels.energy(indptr, indices, data, lin, off, X[r, t])

    F = np.empty((R, T, n))
    E = np.empty((R, T))
    resync()
    r0, t0 = np.unravel_index(np.argmin(E), E.shape)
    best_x = X[r0, t0].copy()
    best_e = float(E[r0, t0])
    start_best = best_e

    use_swap = params.swap_fraction > 0
    per_period = spe * R * T * n * (3 if use_swap else 1)
    chunk = max(1, _CHUNK_FLOATS // per_period)
    trace_vals = np.empty((periods, spe))
    log_cap = periods * T if check else 0
    log_before = np.empty(log_cap)
    log_after = np.empty(log_cap)
    log_count = 0
    max_drift = 0.0
    empty = np.empty((0, 0, 0, 0, 0))
    for p0 in range(0, periods, chunk):
        m = min(chunk, periods - p0)
        u_sweep = rng.random((m, spe, R, T, n))
        if use_swap:
            u_kind = rng.random((m, spe, R, T, n))
            u_pick = rng.random((m, spe, R, T, n))
        else:
            u_kind = u_pick = empty
        u_swap = rng.random((m, R, T - 1))
        u_cluster = rng.random((m, T))
        cluster_on = ((np.arange(p0, p0 + m) + 1) % params.cluster_move_period) == 0
        best_e, log_count, max_drift = kernels.tempering_periods(
            X, F, E, betas, indptr, indices, data, lin, off,
            u_sweep, u_kind, u_pick, params.swap_fraction, params.block_size,
            u_swap, u_cluster, cluster_on, best_x, best_e,
            trace_vals[p0:p0 + m], check, log_before, log_after, log_count, max_drift)
        resync()
    if check and max_drift > 1e-9:
        raise AssertionError(f"incremental energy drifted by {max_drift:.3g}")
    trace = _compress_trace(trace_vals.ravel()[:sweeps], 1, start_best)
    echo = _echo(params) | {"sweeps": sweeps,
                            "betas_abs": [float(b) for b in betas]}
    stats = {}
    if check:
        k = min(log_count, log_cap)
        stats = {"cluster_log": np.column_stack([log_before[:k], log_after[:k]]),
                 "cluster_moves": int(log_count), "max_drift": float(max_drift)}
    return _finish(problem, qmin, best_x, trace, seed, "pticm", echo, stats)


SOLVERS = {"brute": solve_brute_force, "sa": solve_sa, "pticm": solve_pticm}
PARAM_TYPES = {"sa": SAParams, "pticm": PticmParams}


@dataclass(frozen=True)
class SolverSpec:
    """Serializable solver choice: name, sweep budget and parameter overrides."""

    name: str = "pticm"
    sweeps: int = 100
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in SOLVERS:
            raise ValueError(f"solver must be one of {sorted(SOLVERS)}, got {self.name!r}")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        # block_size is supplied at run time; validate with the smallest legal value
        self.build_params(block_size=2)

    def build_params(self, block_size: int = 0):
        if self.name not in PARAM_TYPES:
            return None
        d = dict(self.params)
        if d.get("swap_fraction", 0) > 0:
            d.setdefault("block_size", block_size)
        return params_from_dict(PARAM_TYPES[self.name], d)

    def run(self, problem: QuboProblem, seed: int, initial=None, block_size: int = 0):
        if self.name == "brute":
            return solve_brute_force(problem)
        fn = SOLVERS[self.name]
        return fn(problem, seed=seed, sweeps=self.sweeps,
                  params=self.build_params(block_size), initial=initial)

    def to_dict(self) -> dict:
        return {"name": self.name, "sweeps": self.sweeps, "params": dict(self.params)}
