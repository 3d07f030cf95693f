from __future__ import annotations

from math import comb

import numpy as np
import pytest

from oracles import base_edge_count, brute_isomorphism
from planarprop._validation import ConstructionError, UsageError
from planarprop.canon import canonical_form
from planarprop.edit_distance import edit_distance
from planarprop.graph import Graph
from planarprop.grids import (DiagonalCode, GridParams, all_codes, build_base_graph,
                              build_diagonal_graph, corner_signature, corners, dihedral_code_maps,
                              hamming, hamming_ball_bound, is_three_connected, make_pool,
                              orbit_hamming, orbit_minimum, pairwise_hamming, scoop,
                              transform_codes)

P12 = GridParams(12)


def test_base_graph_sizes():
    g = build_base_graph(P12)
    assert g.n == 144
    assert g.n_edges == base_edge_count(12) == 272


def test_corner_gadget_neighbors():
    g = build_base_graph(P12)
    assert set(g.neighbors(P12.vid(0, 0)).tolist()) == {P12.vid(0, 1), P12.vid(1, 0),
                                                        P12.vid(0, 2), P12.vid(2, 0)}


def test_gadget_reach_along_boundaries():
    g = build_base_graph(P12)
    s = 12
    for reach, (i, j) in corners(s).items():
        v = P12.vid(i, j)
        extra = set(g.neighbors(v).tolist()) - {
            P12.vid(a, b) for a, b in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
            if 0 <= a < s and 0 <= b < s}
        hops = sorted(abs(u // s - i) + abs(u % s - j) for u in extra)
        assert hops == [reach, reach]


def test_small_sides_need_gadgetless_mode():
    with pytest.raises(ConstructionError):
        GridParams(11)
    assert GridParams(4, gadgets=False).n_cells == 9


def test_all_zero_code_adds_up_diagonals():
    p = GridParams(4, gadgets=False)
    g = build_diagonal_graph(p, np.zeros(9, dtype=np.uint8))
    assert g.n_edges == 24 + 9
    assert {(i * 4 + j, (i + 1) * 4 + j + 1) for i in range(3) for j in range(3)} <= g.edge_set()


def test_code_length_is_checked():
    with pytest.raises(UsageError):
        build_diagonal_graph(P12, np.zeros(5, dtype=np.uint8))
    with pytest.raises(UsageError):
        DiagonalCode.from_string("012")


def test_max_degree_at_most_eight():
    rng = np.random.default_rng(0)
    codes = [np.zeros(121, np.uint8), np.ones(121, np.uint8)] + \
            [rng.integers(0, 2, 121, dtype=np.uint8) for _ in range(30)]
    # the bound is attained when every cell around a vertex points at it
    checker = np.indices((11, 11)).sum(axis=0).ravel() % 2
    codes.append(checker.astype(np.uint8))
    assert max(int(build_diagonal_graph(P12, c).degrees.max()) for c in codes) == 8


def test_one_bit_flip_is_two_edits_apart():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 2, 121, dtype=np.uint8)
    b = a.copy()
    b[60] ^= 1
    ga, gb = build_diagonal_graph(P12, a), build_diagonal_graph(P12, b)
    assert len(ga.edge_set() ^ gb.edge_set()) == 2  # witness under the identity
    lb = edit_distance(ga, gb, "lower_bound", budget=200)
    assert lb.edits >= 2


def test_dihedral_maps_are_graph_isomorphisms():
    for s in (3, 4, 5):
        p = GridParams(s, gadgets=False)
        codes = np.random.default_rng(s).integers(0, 2, (6, p.n_cells), dtype=np.uint8)
        maps = dihedral_code_maps(s)
        assert len({(tuple(t), tuple(f)) for t, f in maps}) == 8
        for target, flip in maps:
            img = transform_codes(codes, target, flip)
            for c, d in zip(codes, img):
                assert canonical_form(build_diagonal_graph(p, c)) == \
                    canonical_form(build_diagonal_graph(p, d))


def test_s4_classes_are_the_symmetry_orbits():
    p = GridParams(4, gadgets=False)
    codes = all_codes(9)
    forms = [canonical_form(build_diagonal_graph(p, c)) for c in codes]
    reps = orbit_minimum(codes, 4)
    same_form = {}
    for rep, f in zip(map(bytes, reps), forms):
        assert same_form.setdefault(rep, f) == f
    assert len(set(forms)) == len(same_form) == 84


def test_scoop_single_code_pool():
    assert len(scoop(np.zeros((1, 9), np.uint8), 2)) == 1
    with pytest.raises(UsageError):
        scoop(np.zeros((0, 9), np.uint8), 2)
    with pytest.raises(UsageError):
        scoop(np.zeros((1, 9), np.uint8), 0)


@pytest.mark.parametrize("s,radius", [(3, 1), (4, 1), (4, 2), (4, 3), (5, 4)])
def test_scoop_is_pairwise_far_and_beats_the_ball_bound(s, radius):
    p = GridParams(s, gadgets=False)
    pool = make_pool(p)
    assert pool.mode == "exhaustive" and len(pool.codes) == 2 ** p.n_cells
    idx = scoop(pool.codes, radius)
    d = pairwise_hamming(pool.codes[idx])
    assert d[~np.eye(len(idx), dtype=bool)].min(initial=99) > radius
    ball = sum(comb(p.n_cells, i) for i in range(radius + 1))
    assert len(idx) >= 2 ** p.n_cells / ball == pytest.approx(hamming_ball_bound(p.n_cells, radius))


def test_s4_radius2_ball_bound_value():
    assert hamming_ball_bound(9, 2) == pytest.approx(512 / 46)
    assert len(scoop(make_pool(GridParams(4, gadgets=False)).codes, 2)) >= 12


def test_scoop_is_maximal():
    pool = make_pool(GridParams(4, gadgets=False)).codes
    chosen = pool[scoop(pool, 2)]
    for c in pool:
        assert np.count_nonzero(chosen != c, axis=1).min() <= 2


def test_dihedral_scoop_is_far_under_every_symmetry():
    p = GridParams(4, gadgets=False)
    pool = make_pool(p, symmetry="dihedral")
    assert len(pool.codes) == 84
    chosen = pool.codes[scoop(pool.codes, 2, s=4, symmetry="dihedral")]
    for a in range(len(chosen)):
        for b in range(a + 1, len(chosen)):
            for target, flip in dihedral_code_maps(4):
                img = transform_codes(chosen[b:b + 1], target, flip)[0]
                assert hamming(chosen[a], img) > 2


def test_orbit_hamming_bounds_exact_distance_at_s3():
    # plain Hamming does not bound edit distance (mirror images are isomorphic);
    # the symmetry-reduced version does on every pair at s=3
    p = GridParams(3, gadgets=False)
    codes = all_codes(4)
    plain_violations = 0
    for a in range(16):
        for b in range(a + 1, 16):
            ex = edit_distance(build_diagonal_graph(p, codes[a]), build_diagonal_graph(p, codes[b])).edits
            assert ex >= int(orbit_hamming(codes[a], codes[b:b + 1], 3)[0])
            plain_violations += ex < hamming(codes[a], codes[b])
    assert plain_violations > 0


def test_sampled_pool_for_large_sides():
    pool = make_pool(P12, budget=256, seed=3)
    assert pool.mode == "sampled" and pool.codes.shape[1] == 121
    assert np.array_equal(pool.codes, make_pool(P12, budget=256, seed=3).codes)


def test_base_graph_rigidity():
    g = build_base_graph(P12)
    sigs = {r: corner_signature(g, P12.vid(*c)) for r, c in corners(12).items()}
    assert sigs == {2: (2, 2, 2, 2), 3: (3, 3, 3, 3), 4: (3, 3, 4, 4), 5: (3, 3, 5, 5)}


def test_three_connectivity_checker():
    cyc = Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)], d=2)
    assert not is_three_connected(cyc)
    k4 = Graph.from_edges(4, [(a, b) for a in range(4) for b in range(a + 1, 4)], d=3)
    assert is_three_connected(k4)
    plain = GridParams(5, gadgets=False)
    assert not is_three_connected(build_base_graph(plain))  # grid corners have degree 2
