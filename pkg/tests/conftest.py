import itertools
import os

import numpy as np
from hypothesis import HealthCheck, settings, strategies as st

from signedqubo.signed_graph import SignedGraph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def signed_graphs(draw, min_n=1, max_n=6, min_m=0):
    """(n, edges) with each pair absent, positive or negative."""
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    signs = draw(st.lists(st.sampled_from((0, 1, -1)), min_size=len(pairs),
                          max_size=len(pairs)))
    edges = [(i, j, s) for (i, j), s in zip(pairs, signs) if s]
    if len(edges) < min_m:
        edges = [(i, j, 1) for i, j in pairs[:min_m]]
    return n, edges


def to_graph(n, edges):
    return SignedGraph.from_edges(n, edges)


def random_graph(rng: np.random.Generator, n: int, density: float = 0.6):
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < density:
            edges.append((i, j, 1 if rng.random() < 0.5 else -1))
    return edges


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        for line in mod.RESULTS[num].splitlines():
            terminalreporter.write_line(line)
