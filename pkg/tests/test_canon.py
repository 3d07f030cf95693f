from __future__ import annotations

from itertools import combinations, permutations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_canonical, brute_isomorphism
from planarprop.canon import (EMPTY_FORM, CanonicalForm, canonical_form, rooted_tree_code,
                              tree_from_code, unrooted_tree_code)
from planarprop.graph import Graph, random_relabel


def g_of(n, edges):
    return Graph.from_edges(n, edges, d=max(1, n - 1))


def test_triangle_labelings_agree():
    tri = [(0, 1), (1, 2), (0, 2)]
    forms = {canonical_form(g_of(3, [(p[a], p[b]) for a, b in tri]))
             for p in permutations(range(3))}
    assert len(forms) == 1


def test_path_and_star_on_three_vertices_match():
    assert canonical_form(g_of(3, [(0, 1), (1, 2)])) == canonical_form(g_of(3, [(1, 0), (0, 2)]))


def test_empty_graph_form():
    assert canonical_form(Graph.empty()) == EMPTY_FORM
    assert EMPTY_FORM.n == 0


def test_hex_round_trip_and_decode():
    g = g_of(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    f = canonical_form(g)
    assert CanonicalForm.fromhex(f.hex()) == f
    assert canonical_form(f.to_graph()) == f
    assert f.hex() == f.hex().lower()


def test_all_graphs_on_five_vertices():
    # 34 classes; classes from the brute-force minimum over all 120 relabelings
    pairs = list(combinations(range(5), 2))
    ours, theirs = {}, {}
    for mask in range(1 << len(pairs)):
        edges = [p for k, p in enumerate(pairs) if mask >> k & 1]
        ours.setdefault(canonical_form(g_of(5, edges)), set()).add(mask)
        theirs.setdefault(brute_canonical(5, edges), set()).add(mask)
    assert len(ours) == len(theirs) == 34
    assert sorted(map(sorted, ours.values())) == sorted(map(sorted, theirs.values()))


@st.composite
def graph_pairs(draw):
    n = draw(st.integers(1, 8))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    e1 = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    if draw(st.booleans()):
        perm = draw(st.permutations(range(n)))
        e2 = [(perm[a], perm[b]) for a, b in e1]
    else:
        e2 = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return n, e1, e2


@settings(max_examples=150, deadline=None)
@given(graph_pairs())
def test_forms_agree_with_bijection_search(case):
    n, e1, e2 = case
    a, b = g_of(n, e1), g_of(n, e2)
    same = brute_isomorphism(a.adjacency(), b.adjacency()) is not None
    assert (canonical_form(a) == canonical_form(b)) == same


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_forms_survive_relabeling_of_larger_graphs(seed):
    G = nx.random_regular_graph(3, 14, seed=seed % 1000)
    g = Graph.from_edges(14, list(G.edges()), d=3)
    assert canonical_form(g) == canonical_form(random_relabel(g, seed))


def test_strongly_regular_graphs_are_separated():
    # Shrikhande vs 4x4 rook graph: same parameters, not isomorphic
    rook = nx.cartesian_product(nx.complete_graph(4), nx.complete_graph(4))
    rook = nx.convert_node_labels_to_integers(rook)
    shr = nx.Graph()
    for i in range(4):
        for j in range(4):
            for di, dj in [(0, 1), (1, 0), (1, 1)]:
                shr.add_edge(i * 4 + j, ((i + di) % 4) * 4 + (j + dj) % 4)
    a = Graph.from_edges(16, list(rook.edges()), d=6)
    b = Graph.from_edges(16, list(shr.edges()), d=6)
    assert canonical_form(a) != canonical_form(b)
    assert canonical_form(a) == canonical_form(random_relabel(a, 5))


def test_rooted_tree_codes():
    path = [[1], [0, 2], [1]]
    assert rooted_tree_code(path, 0) == "((()))"
    assert rooted_tree_code(path, 1) == "(()())"
    assert unrooted_tree_code(path) == "(()())"
    assert tree_from_code("(()())") == [[1, 2], [0], [0]]
    with pytest.raises(ValueError):
        tree_from_code("(x)")


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**31 - 1))
def test_unrooted_code_matches_networkx_isomorphism(n, seed):
    rng = np.random.default_rng(seed)
    T1 = nx.random_labeled_tree(n, seed=int(rng.integers(1 << 30)))
    T2 = nx.random_labeled_tree(n, seed=int(rng.integers(1 << 30)))
    adj = lambda T: [sorted(T.neighbors(v)) for v in range(n)]
    assert (unrooted_tree_code(adj(T1)) == unrooted_tree_code(adj(T2))) == nx.is_isomorphic(T1, T2)
