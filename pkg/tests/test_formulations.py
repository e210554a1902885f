import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import signed_graphs, to_graph
from signedqubo.formulations import (FRUSTRATION, MODULARITY, PenaltyPolicy, build,
                                     build_frustration_k, build_frustration_two,
                                     build_modularity_k, build_modularity_matrix_signed,
                                     build_modularity_matrix_unsigned, build_modularity_two,
                                     frustration_k_value, modularity_k_value, penalty_vector)
from signedqubo.qubo import MAXIMIZE, MINIMIZE, encode_assignment, evaluate
from signedqubo.signed_graph import Assignment, SignedGraph, badness


def all_bits(n):
    return [np.array(x, dtype=np.int8) for x in itertools.product((0, 1), repeat=n)]


def test_penalty_policy_parse():
    assert PenaltyPolicy.parse("degree") == PenaltyPolicy.degree_scaled()
    assert PenaltyPolicy.parse("uniform:50") == PenaltyPolicy.uniform(50)
    assert str(PenaltyPolicy.uniform(10)) == "uniform:10"
    for bad in ("uniform", "uniform:-1", "uniform:x", "max"):
        with pytest.raises(ValueError):
            PenaltyPolicy.parse(bad)


def test_penalty_vector_scales_with_degree():
    g = SignedGraph.from_edges(4, [(0, 1, 1), (0, 2, -1), (0, 3, 1)])
    assert penalty_vector(g, 3).tolist() == [18, 6, 6, 6]
    iso = SignedGraph.from_edges(2, [])
    assert penalty_vector(iso, 2).tolist() == [4, 4]


@given(signed_graphs(min_n=2, max_n=5))
def test_two_community_energy_matches_spin_oracle(ge):
    n, edges = ge
    q = build_frustration_two(to_graph(n, edges))
    assert q.sense == MINIMIZE
    for x in all_bits(n):
        s = [2 * v - 1 for v in x.tolist()]
        assert evaluate(q, x) == oracles.frustration_two_spin(n, edges, s)


@given(signed_graphs(min_n=1, max_n=3), st.sampled_from([2, 3]))
def test_k_community_energy_matches_onehot_oracle(ge, k):
    n, edges = ge
    g = to_graph(n, edges)
    M = oracles.degree_penalties(n, edges, k)
    q = build_frustration_k(g, k, PenaltyPolicy.degree_scaled())
    for x in all_bits(n * k):
        assert evaluate(q, x) == oracles.frustration_k_onehot(n, edges, k, M, x.tolist())


@given(signed_graphs(max_n=6), st.sampled_from([2, 3]), st.data())
def test_k_energy_identity_on_feasible(ge, k, data):
    n, edges = ge
    g = to_graph(n, edges)
    labels = data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    q, enc, _ = build(g, FRUSTRATION, k, PenaltyPolicy.degree_scaled())
    x = encode_assignment(Assignment(np.array(labels), k), enc)
    b = badness(g, labels)
    assert evaluate(q, x) == 2 * b - 2 * g.m_n
    assert frustration_k_value(g, labels) == 2 * b - 2 * g.m_n


def test_unsigned_modularity_matrix():
    g = SignedGraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
    B = build_modularity_matrix_unsigned(g)
    d = np.array([1, 2, 1])
    np.testing.assert_allclose(B, g.adjacency() - np.outer(d, d) / 4)
    np.testing.assert_allclose(B.sum(axis=1), 0, atol=1e-12)
    with pytest.raises(ValueError):
        build_modularity_matrix_unsigned(SignedGraph.from_edges(2, [(0, 1, -1)]))


@given(signed_graphs(max_n=6))
def test_signed_modularity_matrix_matches_oracle(ge):
    n, edges = ge
    B = build_modularity_matrix_signed(to_graph(n, edges))
    np.testing.assert_allclose(B, oracles.signed_modularity_matrix(n, edges), atol=1e-12)
    np.testing.assert_allclose(B, B.T)
    np.testing.assert_allclose(B.sum(axis=1), 0, atol=1e-9)


@given(signed_graphs(min_n=2, max_n=5))
def test_two_community_modularity_matches_spin_oracle(ge):
    n, edges = ge
    q = build_modularity_two(to_graph(n, edges))
    assert q.sense == MAXIMIZE
    B = oracles.signed_modularity_matrix(n, edges)
    for x in all_bits(n):
        s = [2 * v - 1 for v in x.tolist()]
        assert evaluate(q, x) == pytest.approx(oracles.modularity_spin(B, s), abs=1e-9)


@given(signed_graphs(max_n=5), st.sampled_from([2, 3]), st.data())
def test_k_modularity_on_feasible_matches_oracle(ge, k, data):
    n, edges = ge
    g = to_graph(n, edges)
    labels = data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    q, enc, _ = build(g, MODULARITY, k, PenaltyPolicy.uniform(5))
    x = encode_assignment(Assignment(np.array(labels), k), enc)
    expect = oracles.modularity_labels(oracles.signed_modularity_matrix(n, edges), labels)
    assert evaluate(q, x) == pytest.approx(expect, abs=1e-9)
    assert modularity_k_value(g, labels) == pytest.approx(expect, abs=1e-9)


@given(signed_graphs(min_n=1, max_n=3), st.sampled_from([2, 3]))
def test_k_modularity_energy_matches_onehot_oracle(ge, k):
    n, edges = ge
    B = oracles.signed_modularity_matrix(n, edges)
    q = build_modularity_k(to_graph(n, edges), k, PenaltyPolicy.uniform(7))
    for x in all_bits(n * k):
        assert evaluate(q, x) == pytest.approx(
            oracles.modularity_k_onehot(B, k, [7] * n, x.tolist()), abs=1e-9)


def test_build_rejects_bad_arguments():
    g = SignedGraph.from_edges(2, [(0, 1, 1)])
    with pytest.raises(ValueError):
        build(g, "cut", 2, PenaltyPolicy.degree_scaled())
    with pytest.raises(ValueError):
        build_frustration_k(g, 1, PenaltyPolicy.degree_scaled())
    with pytest.raises(ValueError):
        build_frustration_two(SignedGraph.from_edges(1, []))


def test_descriptor_records_formulation():
    g = SignedGraph.from_edges(3, [(0, 1, 1), (1, 2, -1)])
    q, enc, desc = build(g, MODULARITY, 3, PenaltyPolicy.uniform(2))
    assert desc.to_dict() == {"metric": "modularity", "k": 3, "penalty": "uniform:2",
                              "graph_fingerprint": g.fingerprint(), "num_vars": 9,
                              "sense": "maximize"}
    assert enc.num_vars == q.num_vars == 9
