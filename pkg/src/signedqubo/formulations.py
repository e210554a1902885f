"""Compile signed graphs into frustration and modularity QUBOs.

All sums run over ordered node pairs, as in the textbook matrix forms, and
every constant is kept in the offset so energies equal the objective values
rather than just sharing their minimizers. For feasible configurations:

* two-community frustration energy  = 4 * badness - 4 * m_n
* k-community frustration energy    = 2 * badness - 2 * m_n
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qubo import MAXIMIZE, MINIMIZE, Encoding, QuboProblem, ising_to_qubo
from .signed_graph import SignedGraph

FRUSTRATION = "frustration"
MODULARITY = "modularity"
METRICS = (FRUSTRATION, MODULARITY)


@dataclass(frozen=True)
class PenaltyPolicy:
    """One-hot penalty coefficients.

    ``uniform`` uses the same ``value`` for every node; ``degree`` uses
    ``2 * d_j * k`` per node (``2 * k`` for isolated nodes).
    """

    kind: str = "degree"
    value: float | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            if self.value is None or not self.value > 0:
                raise ValueError("uniform penalty needs a positive value")
        elif self.kind == "degree":
            if self.value is not None:
                raise ValueError("degree penalty takes no value")
        else:
            raise ValueError(f"unknown penalty kind {self.kind!r}")

    @classmethod
    def uniform(cls, value: float) -> "PenaltyPolicy":
        return cls("uniform", float(value))

    @classmethod
    def degree_scaled(cls) -> "PenaltyPolicy":
        return cls("degree")

    @classmethod
    def parse(cls, text: str) -> "PenaltyPolicy":
        """``"degree"`` or ``"uniform:M"``."""
        text = text.strip()
        if text == "degree":
            return cls.degree_scaled()
        kind, _, val = text.partition(":")
        if kind == "uniform" and val:
            try:
                return cls.uniform(float(val))
            except ValueError as exc:
                raise ValueError(f"bad penalty {text!r}: {exc}") from None
        raise ValueError(f"penalty must be 'degree' or 'uniform:M', got {text!r}")

    def __str__(self):
        return "degree" if self.kind == "degree" else f"uniform:{self.value:g}"

    def vector(self, g: SignedGraph, k: int) -> np.ndarray:
        if self.kind == "uniform":
            return np.full(g.n, float(self.value))
        return penalty_vector(g, k)


@dataclass(frozen=True)
class FormulationDescriptor:
    metric: str
    k: int
    penalty: str
    graph_fingerprint: str
    num_vars: int
    sense: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def penalty_vector(g: SignedGraph, k: int) -> np.ndarray:
    """``M_j = 2 d_j k``; isolated nodes get ``2 k`` so the constraint still binds."""
    if k < 1:
        raise ValueError("k must be >= 1")
    d = g.degree.astype(np.float64)
    return 2.0 * np.maximum(d, 1.0) * k


def build_frustration_two(g: SignedGraph) -> QuboProblem:
    """``sum_ij A_ij - s A s^T`` over spins, as a binary QUBO (x = 1 means s = +1)."""
    if g.n < 2:
        raise ValueError("two-community frustration needs n >= 2")
    A = g.adjacency().astype(np.float64)
    return ising_to_qubo(np.zeros(g.n), -A, A.sum(), MINIMIZE)


def _one_hot_penalty(Q, linear, M, k, sign):
    # sign * M_i (1 - sum_c x_ic)^2 with x^2 = x
    n = M.size
    offset = 0.0
    for i in range(n):
        block = slice(i * k, (i + 1) * k)
        Q[block, block] += sign * M[i] * (1.0 - np.eye(k))
        linear[block] -= sign * M[i]
        offset += sign * M[i]
    return offset


def build_frustration_k(g: SignedGraph, k: int, penalty: PenaltyPolicy) -> QuboProblem:
    """Penalized k-community frustration over ``n * k`` one-hot variables.

    ``sum_ij A_ij (1 - s_i . s_j) + sum_i M_i (1 - |s_i|)^2``, minimized.
    """
    if k < 2:
        raise ValueError("k-community frustration needs k >= 2")
    A = g.adjacency().astype(np.float64)
    Q = np.kron(-A, np.eye(k))
    linear = np.zeros(g.n * k)
    offset = A.sum() + _one_hot_penalty(Q, linear, penalty.vector(g, k), k, +1.0)
    return QuboProblem.from_dense(Q, linear, offset, MINIMIZE)


def build_modularity_matrix_unsigned(g: SignedGraph) -> np.ndarray:
    """``B^u_ij = A_ij - d_i d_j / 2m`` for a graph with only positive edges."""
    if g.m_n:
        raise ValueError("unsigned modularity matrix requires all edges positive")
    if g.m == 0:
        raise ValueError("modularity undefined for a graph without edges")
    d = g.degree.astype(np.float64)
    return g.adjacency() - np.outer(d, d) / (2.0 * g.m)


def build_modularity_matrix_signed(g: SignedGraph) -> np.ndarray:
    """``B_ij = A_ij + n_i n_j / 2m_n - p_i p_j / 2m_p``.

    A null-model term whose edge class is empty is taken as zero.
    """
    B = g.adjacency().astype(np.float64)
    p = g.positive_degree.astype(np.float64)
    q = g.negative_degree.astype(np.float64)
    if g.m_n:
        B = B + np.outer(q, q) / (2.0 * g.m_n)
    if g.m_p:
        B = B - np.outer(p, p) / (2.0 * g.m_p)
    return B


def build_modularity_two(g: SignedGraph) -> QuboProblem:
    """``s B s^T`` over spins as a maximize-sense binary QUBO."""
    if g.n < 2:
        raise ValueError("two-community modularity needs n >= 2")
    B = build_modularity_matrix_signed(g)
    J = B - np.diag(np.diag(B))
    return ising_to_qubo(np.zeros(g.n), J, float(np.trace(B)), MAXIMIZE)


def build_modularity_k(g: SignedGraph, k: int, penalty: PenaltyPolicy) -> QuboProblem:
    """Penalized k-community modularity, maximize-sense.

    ``sum_ij B_ij s_i . s_j - sum_i M_i (1 - |s_i|)^2``; diagonal terms
    ``i = j`` are included.
    """
    if k < 2:
        raise ValueError("k-community modularity needs k >= 2")
    B = build_modularity_matrix_signed(g)
    Q = np.kron(B, np.eye(k))
    linear = np.zeros(g.n * k)
    offset = _one_hot_penalty(Q, linear, penalty.vector(g, k), k, -1.0)
    return QuboProblem.from_dense(Q, linear, offset, MAXIMIZE)


def build(g: SignedGraph, metric: str, k: int, penalty: PenaltyPolicy):
    """Problem, encoding and descriptor for a k-community detection run."""
    if metric == FRUSTRATION:
        q = build_frustration_k(g, k, penalty)
    elif metric == MODULARITY:
        q = build_modularity_k(g, k, penalty)
    else:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    desc = FormulationDescriptor(metric, k, str(penalty), g.fingerprint(),
                                 q.num_vars, q.sense)
    return q, Encoding(g.n, k), desc


def frustration_k_value(g: SignedGraph, labels) -> float:
    """Unpenalized k-community frustration of a labeling (ordered pairs)."""
    labels = np.asarray(labels)
    A = g.adjacency()
    same = labels[:, None] == labels[None, :]
    return float(A.sum() - A[same].sum())


def modularity_k_value(g: SignedGraph, labels) -> float:
    """Unpenalized k-community modularity of a labeling, diagonal included."""
    labels = np.asarray(labels)
    B = build_modularity_matrix_signed(g)
    same = labels[:, None] == labels[None, :]
    return float(B[same].sum())
