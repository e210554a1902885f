"""Planted-cluster signed graphs and the bundled 16-node tribal network."""

from __future__ import annotations

import hashlib
from importlib import resources
from pathlib import Path

import numpy as np

from .signed_graph import Assignment, SignedGraph, from_edge_list, to_edge_list

TRIBES_FILE = "gahuku_gama.txt"
TRIBES_SHA256 = "744fcb5901ac7b30f11efeda8559f3c45c42ad3f02abe495f56328683040ec58"


class CorruptBundleError(RuntimeError):
    pass


def _designated(sizes) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)


def planted_assignment(sizes) -> Assignment:
    sizes = [int(s) for s in sizes]
    return Assignment(np.repeat(np.arange(len(sizes)), sizes), len(sizes))


def generate_planted(sizes, p: float, seed: int = 0, repair: bool = True) -> SignedGraph:
    """Random positive clusters joined by negative edges between their first nodes.

    Each intra-cluster pair is a positive edge with probability ``p``. The
    lowest-index node of every cluster is linked negatively to the lowest-index
    node of every other cluster. With ``repair`` on, each intra-cluster
    component that does not contain the cluster's first node gets one positive
    edge from its smallest node to that first node. The planted partition has
    badness 0 regardless.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2:
        raise ValueError("need at least two clusters")
    if any(s < 1 for s in sizes):
        raise ValueError(f"cluster sizes must be positive, got {sizes}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"intra-cluster probability must be in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    heads = _designated(sizes)
    edges = []
    for head, size in zip(heads, sizes):
        iu, ju = np.triu_indices(size, 1)
        keep = rng.random(iu.size) < p
        local = list(zip(iu[keep].tolist(), ju[keep].tolist()))
        if repair and size > 1:
            local += _connect_to_root(size, local)
        edges += [(head + i, head + j, 1) for i, j in local]
    for a in range(len(heads)):
        for b in range(a + 1, len(heads)):
            edges.append((int(heads[a]), int(heads[b]), -1))
    return SignedGraph.from_edges(sum(sizes), edges)


def _connect_to_root(size: int, local) -> list[tuple[int, int]]:
    parent = list(range(size))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for i, j in local:
        parent[find(i)] = find(j)
    added = []
    seen = {find(0)}
    for u in range(1, size):
        r = find(u)
        if r not in seen:
            seen.add(r)
            added.append((0, u))
    return added


def save_graph(g: SignedGraph, path) -> None:
    Path(path).write_text(to_edge_list(g))


def load_graph(path) -> SignedGraph:
    return from_edge_list(Path(path).read_text())


def load_bundled_d3() -> SignedGraph:
    """The bundled 16-node tribal network, checked against its sha256."""
    raw = resources.files(__package__).joinpath("data", TRIBES_FILE).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != TRIBES_SHA256:
        raise CorruptBundleError(f"{TRIBES_FILE}: sha256 {digest} != {TRIBES_SHA256}")
    return from_edge_list(raw.decode("utf-8"))
