"""QUBO problems, one-hot encoding and clamping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from . import kernels
from .signed_graph import Assignment

MINIMIZE = "minimize"
MAXIMIZE = "maximize"


class InfeasibleConfigurationError(ValueError):
    """A configuration violates the one-hot constraint.

    ``violations`` maps node index to the number of bits set in its block.
    """

    def __init__(self, violations: dict[int, int]):
        self.violations = dict(violations)
        shown = ", ".join(f"node {i}: {c} bits" for i, c in list(self.violations.items())[:10])
        super().__init__(f"{len(self.violations)} node(s) not one-hot ({shown})")


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """``E(x) = x^T Q x + linear . x + offset`` over binary ``x``.

    ``Q`` is symmetric with zero diagonal and stored as its strict upper
    triangle: ``rows < cols``, each pair once, value ``Q_ij``. A stored pair
    therefore contributes ``2 Q_ij x_i x_j`` to the energy. ``sense`` only
    tells solvers which direction is better.
    """

    linear: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    offset: float = 0.0
    sense: str = MINIMIZE
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        linear = np.array(self.linear, dtype=np.float64).ravel()
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        n = linear.size
        if n < 1:
            raise ValueError("num_vars must be >= 1")
        if not (rows.size == cols.size == values.size):
            raise ValueError("rows, cols and values must have equal length")
        if rows.size and (np.any(rows >= cols) or rows.min() < 0 or cols.max() >= n):
            raise ValueError("quadratic entries must satisfy 0 <= i < j < num_vars")
        if self.sense not in (MINIMIZE, MAXIMIZE):
            raise ValueError(f"sense must be {MINIMIZE!r} or {MAXIMIZE!r}")
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size > 1 and np.any((np.diff(rows) == 0) & (np.diff(cols) == 0)):
            raise ValueError("duplicate quadratic entry")
        keep = values != 0.0
        for arr in (linear, rows, cols, values):
            arr.setflags(write=False)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "rows", rows[keep])
        object.__setattr__(self, "cols", cols[keep])
        object.__setattr__(self, "values", values[keep])
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_dense(cls, quadratic, linear=None, offset: float = 0.0,
                   sense: str = MINIMIZE) -> "QuboProblem":
        """Build from any square matrix ``M`` meaning ``x^T M x``.

        ``M`` is symmetrized and its diagonal folded into the linear term.
        """
        M = np.asarray(quadratic, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("quadratic must be a square matrix")
        n = M.shape[0]
        lin = np.zeros(n) if linear is None else np.array(linear, dtype=np.float64)
        if lin.shape != (n,):
            raise ValueError("linear length does not match quadratic")
        S = 0.5 * (M + M.T)
        lin = lin + np.diag(S)
        r, c = np.nonzero(np.triu(S, 1))
        return cls(lin, r, c, S[r, c], offset, sense)

    @property
    def num_vars(self) -> int:
        return int(self.linear.size)

    def dense(self) -> np.ndarray:
        """Symmetric ``Q`` with zero diagonal."""
        if "dense" not in self._cache:
            Q = np.zeros((self.num_vars, self.num_vars))
            Q[self.rows, self.cols] = self.values
            Q[self.cols, self.rows] = self.values
            Q.setflags(write=False)
            self._cache["dense"] = Q
        return self._cache["dense"]

    def sparse(self) -> sp.csr_matrix:
        """Symmetric ``Q`` as CSR, both triangles stored."""
        if "csr" not in self._cache:
            n = self.num_vars
            r = np.concatenate([self.rows, self.cols])
            c = np.concatenate([self.cols, self.rows])
            v = np.concatenate([self.values, self.values])
            Q = sp.csr_matrix((v, (r, c)), shape=(n, n))
            Q.sort_indices()
            self._cache["csr"] = Q
        return self._cache["csr"]

    def csr_arrays(self):
        """``(indptr, indices, data)`` in the dtypes the kernels expect."""
        if "arrays" not in self._cache:
            Q = self.sparse()
            self._cache["arrays"] = (Q.indptr.astype(np.int64), Q.indices.astype(np.int64),
                                     Q.data.astype(np.float64))
        return self._cache["arrays"]

    @property
    def sign(self) -> float:
        """+1 for minimize, -1 for maximize: ``energy = sign * objective``."""
        return 1.0 if self.sense == MINIMIZE else -1.0

    def negated(self) -> "QuboProblem":
        flipped = MAXIMIZE if self.sense == MINIMIZE else MINIMIZE
        return QuboProblem(-self.linear, self.rows, self.cols, -self.values,
                           -self.offset, flipped)

    def minimization_form(self) -> "QuboProblem":
        """The problem solvers actually minimize (negated if maximize-sense)."""
        if self.sense == MINIMIZE:
            return self
        if "minform" not in self._cache:
            self._cache["minform"] = self.negated()
        return self._cache["minform"]

    def max_abs_coefficient(self) -> float:
        vals = [np.abs(self.linear).max(initial=0.0), np.abs(self.values).max(initial=0.0)]
        return float(max(vals))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "sense": self.sense,
            "offset": self.offset,
            "linear": self.linear.tolist(),
            "quadratic": [[int(i), int(j), float(v)]
                          for i, j, v in zip(self.rows, self.cols, self.values)],
        }

    @classmethod
    def from_json(cls, text: str) -> "QuboProblem":
        d = json.loads(text)
        quad = np.array(d["quadratic"], dtype=np.float64).reshape(-1, 3)
        if len(d["linear"]) != d["num_vars"]:
            raise ValueError("linear length does not match num_vars")
        return cls(np.array(d["linear"], dtype=np.float64), quad[:, 0].astype(np.int64),
                   quad[:, 1].astype(np.int64), quad[:, 2], d["offset"], d["sense"])

    def __eq__(self, other):
        if not isinstance(other, QuboProblem):
            return NotImplemented
        return (self.sense == other.sense and self.offset == other.offset
                and np.array_equal(self.linear, other.linear)
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.values, other.values))

    __hash__ = None


def _bits(q: QuboProblem, x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.size != q.num_vars:
        raise ValueError(f"configuration length {x.size} != num_vars {q.num_vars}")
    if np.any((x != 0) & (x != 1)):
        raise ValueError("configuration entries must be 0 or 1")
    return x.astype(np.int8)


def evaluate(q: QuboProblem, x) -> float:
    """Exact energy of ``x``, independent of ``q.sense``."""
    x = _bits(q, x)
    indptr, indices, data = q.csr_arrays()
    return float(kernels.energy(indptr, indices, data, q.linear, q.offset, x))


def evaluate_many(q: QuboProblem, X) -> np.ndarray:
    """Energies of the rows of ``X`` (vectorized)."""
    X = np.asarray(X, dtype=np.float64)
    return q.offset + X @ q.linear + np.einsum("ij,ij->i", np.asarray(q.sparse() @ X.T).T, X)


def energy(q: QuboProblem, x) -> float:
    """Minimization-form energy: ``evaluate`` for minimize, its negative otherwise."""
    return q.sign * evaluate(q, x)


def ising_to_qubo(h, J, offset: float = 0.0, sense: str = MINIMIZE) -> QuboProblem:
    """Convert ``s^T J s + h . s + offset`` over spins to binary via ``s = 2x - 1``.

    ``J`` is summed over ordered pairs and must have a zero diagonal.
    """
    J = np.asarray(J, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64).ravel()
    n = h.size
    if J.shape != (n, n):
        raise ValueError("J must be n x n")
    if np.any(np.diag(J) != 0):
        raise ValueError("J must have a zero diagonal")
    Js = 0.5 * (J + J.T)
    linear = 2.0 * h - 4.0 * Js.sum(axis=1)
    const = offset + Js.sum() - h.sum()
    return QuboProblem.from_dense(4.0 * Js, linear, const, sense)


def ising_energy(h, J, offset, s) -> float:
    s = np.asarray(s, dtype=np.float64)
    return float(s @ np.asarray(J, dtype=np.float64) @ s + np.asarray(h) @ s + offset)


def clamp(q: QuboProblem, fixed: Mapping[int, int]) -> tuple[QuboProblem, np.ndarray]:
    """Fix some variables and return the problem over the rest.

    The second return value lists the original index of every free variable,
    in order. Energies match exactly:
    ``E_reduced(x_free) == E_full(merge(x_free, fixed))``.
    """
    n = q.num_vars
    keys = np.fromiter(fixed.keys(), dtype=np.int64, count=len(fixed))
    vals = np.fromiter(fixed.values(), dtype=np.float64, count=len(fixed))
    if keys.size and (keys.min() < 0 or keys.max() >= n):
        raise IndexError("fixed index out of range")
    if np.any((vals != 0) & (vals != 1)):
        raise ValueError("fixed values must be 0 or 1")
    is_fixed = np.zeros(n, dtype=bool)
    is_fixed[keys] = True
    free = np.flatnonzero(~is_fixed)
    if free.size == 0:
        raise ValueError("clamp would fix every variable")
    xf = np.zeros(n)
    xf[keys] = vals
    return _clamp_to(q, free, xf), free


def clamp_free(q: QuboProblem, free: np.ndarray, x: np.ndarray) -> QuboProblem:
    """Clamp every variable outside ``free`` to its value in ``x``."""
    free = np.asarray(free, dtype=np.int64)
    if free.size == 0:
        raise ValueError("clamp would fix every variable")
    xf = np.asarray(x, dtype=np.float64).copy()
    xf[free] = 0.0
    return _clamp_to(q, free, xf)


def _clamp_to(q: QuboProblem, free: np.ndarray, xf: np.ndarray) -> QuboProblem:
    # xf holds fixed values and zeros on free positions
    Q = q.sparse()
    Qx = Q @ xf
    offset = q.offset + float(q.linear @ xf) + float(xf @ Qx)
    linear = q.linear[free] + 2.0 * Qx[free]
    sub = Q[free][:, free].tocoo()
    upper = sub.row < sub.col
    return QuboProblem(linear, sub.row[upper], sub.col[upper], sub.data[upper],
                       offset, q.sense)


@dataclass(frozen=True)
class Encoding:
    """Node-major one-hot layout: variable ``i * k + c`` means node i in community c."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be >= 1")

    @property
    def num_vars(self) -> int:
        return self.n * self.k

    def var(self, i: int, c: int) -> int:
        if not (0 <= i < self.n and 0 <= c < self.k):
            raise IndexError(f"(node {i}, community {c}) out of range")
        return i * self.k + c

    def node_community(self, v: int) -> tuple[int, int]:
        if not 0 <= v < self.num_vars:
            raise IndexError(f"variable {v} out of range")
        return divmod(v, self.k)

    def node_vars(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=np.int64)
        return (nodes[:, None] * self.k + np.arange(self.k)).ravel()


def one_hot_violations(x, enc: Encoding) -> dict[int, int]:
    x = np.asarray(x)
    if x.size != enc.num_vars:
        raise ValueError(f"configuration length {x.size} != {enc.num_vars}")
    counts = x.reshape(enc.n, enc.k).astype(np.int64).sum(axis=1)
    bad = np.flatnonzero(counts != 1)
    return {int(i): int(counts[i]) for i in bad}


def is_feasible(x, enc: Encoding) -> bool:
    return not one_hot_violations(x, enc)


def decode_assignment(x, enc: Encoding) -> Assignment:
    """Labels from a one-hot configuration.

    Raises :class:`InfeasibleConfigurationError` listing every node whose
    block does not have exactly one bit set.
    """
    bad = one_hot_violations(x, enc)
    if bad:
        raise InfeasibleConfigurationError(bad)
    labels = np.asarray(x).reshape(enc.n, enc.k).argmax(axis=1)
    return Assignment(labels, enc.k)


def encode_assignment(a: Assignment, enc: Encoding) -> np.ndarray:
    labels = a.labels if isinstance(a, Assignment) else np.asarray(a, dtype=np.int64)
    if labels.shape != (enc.n,):
        raise ValueError(f"expected {enc.n} labels")
    if labels.size and (labels.min() < 0 or labels.max() >= enc.k):
        raise ValueError(f"labels must lie in [0, {enc.k})")
    x = np.zeros(enc.num_vars, dtype=np.int8)
    x[np.arange(enc.n) * enc.k + labels] = 1
    return x
