"""Signed graphs, community assignments and frustration metrics."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels


class GraphFormatError(ValueError):
    """Raised for malformed or inconsistent edge-list input."""


_SIGNS = {"+1": 1, "1": 1, "-1": -1}


@dataclass(frozen=True, eq=False)
class SignedGraph:
    """Undirected graph with +1/-1 edges.

    Edges are stored once as rows ``(i, j, sign)`` with ``i < j``, sorted.
    Matrix quantities sum over ordered pairs, so each edge appears twice there.
    """

    node_ids: tuple[str, ...]
    edges: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 3)
        n = len(self.node_ids)
        if n < 1:
            raise GraphFormatError("graph needs at least one node")
        if len(set(self.node_ids)) != n:
            raise GraphFormatError("duplicate node identifiers")
        if edges.size:
            i, j, s = edges[:, 0], edges[:, 1], edges[:, 2]
            if np.any(i == j):
                raise GraphFormatError(f"self-loop on node {self.node_ids[int(i[i == j][0])]}")
            if np.any((i < 0) | (j < 0) | (i >= n) | (j >= n)):
                raise GraphFormatError("edge endpoint out of range")
            if not np.all(np.isin(s, (-1, 1))):
                raise GraphFormatError("edge signs must be +1 or -1")
            lo, hi = np.minimum(i, j), np.maximum(i, j)
            edges = np.column_stack([lo, hi, s])
            edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
            pairs = edges[:, 0] * n + edges[:, 1]
            dup = np.flatnonzero(np.diff(pairs) == 0)
            if dup.size:
                a, b = edges[dup[0], :2]
                raise GraphFormatError(
                    f"duplicate edge {self.node_ids[a]} {self.node_ids[b]}")
        edges.setflags(write=False)
        object.__setattr__(self, "node_ids", tuple(str(v) for v in self.node_ids))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]],
                   node_ids: Sequence[str] | None = None) -> "SignedGraph":
        if node_ids is None:
            node_ids = [str(i) for i in range(n)]
        elif len(node_ids) != n:
            raise GraphFormatError("node_ids length does not match n")
        return cls(tuple(node_ids), np.array(list(edges), dtype=np.int64).reshape(-1, 3))

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    n = node_count

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @property
    def m_p(self) -> int:
        return int(np.count_nonzero(self.edges[:, 2] > 0))

    @property
    def m_n(self) -> int:
        return int(np.count_nonzero(self.edges[:, 2] < 0))

    def adjacency(self) -> np.ndarray:
        """Dense signed adjacency A (entries -1, 0, +1)."""
        if "A" not in self._cache:
            A = np.zeros((self.n, self.n), dtype=np.int64)
            i, j, s = self.edges.T
            A[i, j] = s
            A[j, i] = s
            A.setflags(write=False)
            self._cache["A"] = A
        return self._cache["A"]

    def abs_adjacency(self) -> np.ndarray:
        return np.abs(self.adjacency())

    @property
    def positive_degree(self) -> np.ndarray:
        return np.count_nonzero(self.adjacency() > 0, axis=1)

    @property
    def negative_degree(self) -> np.ndarray:
        return np.count_nonzero(self.adjacency() < 0, axis=1)

    @property
    def degree(self) -> np.ndarray:
        return np.count_nonzero(self.adjacency(), axis=1)

    def index_of(self, node_id: str) -> int:
        if "index" not in self._cache:
            self._cache["index"] = {v: i for i, v in enumerate(self.node_ids)}
        return self._cache["index"][node_id]

    def neighbor_csr(self):
        """(indptr, indices, signs) over both edge directions."""
        if "csr" not in self._cache:
            i, j, s = self.edges.T
            src = np.concatenate([i, j])
            dst = np.concatenate([j, i])
            sg = np.concatenate([s, s])
            order = np.lexsort((dst, src))
            src, dst, sg = src[order], dst[order], sg[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            self._cache["csr"] = (np.cumsum(indptr), dst.copy(), sg.copy())
        return self._cache["csr"]

    def to_edge_list(self) -> str:
        return to_edge_list(self)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical edge-list serialization."""
        return hashlib.sha256(self.to_edge_list().encode("utf-8")).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, SignedGraph):
            return NotImplemented
        return self.node_ids == other.node_ids and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.node_ids, self.edges.tobytes()))

    def __repr__(self):
        return f"SignedGraph(n={self.n}, m_p={self.m_p}, m_n={self.m_n})"


@dataclass(frozen=True, eq=False)
class Assignment:
    """Community label per node, labels in ``[0, k)``."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError(f"labels must lie in [0, {self.k})")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def k_prime(self) -> int:
        """Number of non-empty communities."""
        return int(np.unique(self.labels).size)

    def communities(self) -> list[list[int]]:
        """Node indices of every non-empty community, ordered by first member."""
        groups: dict[int, list[int]] = {}
        for i, c in enumerate(self.labels):
            groups.setdefault(int(c), []).append(i)
        return list(groups.values())

    def canonical(self) -> tuple[int, ...]:
        """Labels renumbered by first appearance (relabeling-invariant key)."""
        remap: dict[int, int] = {}
        return tuple(remap.setdefault(int(c), len(remap)) for c in self.labels)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.k, self.labels.tobytes()))


class TriadCensus(NamedTuple):
    """Closed triangles counted by their number of negative edges."""

    c0: int
    c1: int
    c2: int
    c3: int

    @property
    def total(self) -> int:
        return self.c0 + self.c1 + self.c2 + self.c3

    @property
    def stable(self) -> int:
        return self.c0 + self.c2

    @property
    def unstable(self) -> int:
        return self.c1 + self.c3


def from_edge_list(text: str) -> SignedGraph:
    """Parse ``src dst sign`` lines.

    ``#`` starts a comment line and blank lines are skipped. A line holding a
    single token declares a node (used for isolated nodes and to pin index
    order). Node indices follow first appearance.
    """
    index: dict[str, int] = {}
    edges: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 1:
            index.setdefault(parts[0], len(index))
            continue
        if len(parts) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'src dst sign', got {raw!r}")
        src, dst, sign = parts
        if sign not in _SIGNS:
            raise GraphFormatError(f"line {lineno}: sign must be +1 or -1, got {sign!r}")
        if src == dst:
            raise GraphFormatError(f"line {lineno}: self-loop on {src}")
        a = index.setdefault(src, len(index))
        b = index.setdefault(dst, len(index))
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphFormatError(f"line {lineno}: duplicate edge {src} {dst}")
        seen.add(key)
        edges.append((key[0], key[1], _SIGNS[sign]))
    if not index:
        raise GraphFormatError("edge list contains no nodes")
    ids = [None] * len(index)
    for name, i in index.items():
        ids[i] = name
    return SignedGraph(tuple(ids), np.array(edges, dtype=np.int64).reshape(-1, 3))


def to_edge_list(g: SignedGraph) -> str:
    """Canonical text form: node declarations in index order, then sorted edges."""
    lines = list(g.node_ids)
    for i, j, s in g.edges:
        lines.append(f"{g.node_ids[i]} {g.node_ids[j]} {'+1' if s > 0 else '-1'}")
    return "\n".join(lines) + "\n"


def pn_matrices(g: SignedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Positive and negative indicator matrices, ``P = (A + |A|)/2``, ``N = (|A| - A)/2``."""
    A = g.adjacency()
    Ap = np.abs(A)
    return (A + Ap) // 2, (Ap - A) // 2


def _labels_of(g: SignedGraph, a) -> np.ndarray:
    labels = a.labels if isinstance(a, Assignment) else np.asarray(a, dtype=np.int64)
    if labels.shape != (g.n,):
        raise ValueError(f"expected {g.n} labels, got {labels.shape[0] if labels.ndim else 0}")
    return labels


def badness(g: SignedGraph, a) -> int:
    """Negative edges inside communities plus positive edges across them.

    Each undirected edge is counted once.
    """
    labels = _labels_of(g, a)
    if g.m == 0:
        return 0
    i, j, s = g.edges.T
    same = labels[i] == labels[j]
    return int(np.count_nonzero(same & (s < 0)) + np.count_nonzero(~same & (s > 0)))


def triad_census(g: SignedGraph) -> TriadCensus:
    counts = [0, 0, 0, 0]
    A = g.adjacency()
    nbrs = [set(np.flatnonzero(A[i])) for i in range(g.n)]
    for i in range(g.n):
        for j in nbrs[i]:
            if j <= i:
                continue
            for k in nbrs[i] & nbrs[j]:
                if k <= j:
                    continue
                neg = int(A[i, j] < 0) + int(A[i, k] < 0) + int(A[j, k] < 0)
                counts[neg] += 1
    return TriadCensus(*counts)


def minimum_badness(g: SignedGraph, k: int) -> tuple[int, Assignment]:
    """Exact minimum badness over all partitions into at most ``k`` communities.

    Branch and bound over canonical labelings, nodes visited by decreasing
    degree. Practical for a few dozen nodes on sparse graphs.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    indptr, indices, signs = g.neighbor_csr()
    order = np.argsort(-g.degree, kind="stable").astype(np.int64)
    best, labels = kernels.min_badness_search(
        g.n, indices, indptr, signs, order, k, g.m_n)
    return int(best), Assignment(labels, k)
