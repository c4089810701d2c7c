import itertools
import math

import numpy as np
import pytest

from conftest import random_weighted, weighted
from seamqec._validation import ValidationError
from seamqec.decoder import MatchingDecoder, decode, defect_distances
from seamqec.lattice import Axis, LatticeSpec, build_graph
from seamqec.noise import assign_edge_probabilities, sample_error_batch, syndrome_batch, syndrome_of
from seamqec.oracle import certify_decoder


def _edge(g, a, b):
    a, b = min(a, b), max(a, b)
    return next(k for k in range(g.n_edges) if (g.u[k], g.v[k]) == (a, b))


def test_single_edge_distance_and_path(uniform_l3):
    g = uniform_l3
    v = g.vertex_index
    dg = defect_distances(g, [v(0, 0), v(1, 0)])
    w = g.weight[0]
    assert dg.distance[0, 1] == pytest.approx(w)
    assert dg.path(0, v(1, 0)) == [_edge(g, v(0, 0), v(1, 0))]


def test_manhattan_distance_on_uniform_grid():
    g = weighted(6)
    v = g.vertex_index
    w = g.weight[0]
    dg = defect_distances(g, [v(0, 2), v(3, 2), v(1, 1), v(4, 3)])
    assert dg.distance[0, 1] == pytest.approx(3 * w)
    assert dg.distance[0, 2] == pytest.approx(2 * w)
    # a long pair is cheaper through the boundary vertex than directly
    assert dg.distance[2, 3] == pytest.approx(4 * w)
    # nearest rough boundary: rows 0 and L - 1
    assert dg.boundary_distance.tolist() == pytest.approx([3 * w, 3 * w, 2 * w, 2 * w])


def _simple_paths(g, s, t):
    adj = {}
    for k in range(g.n_edges):
        if np.isfinite(g.weight[k]):
            a, b = int(g.u[k]), int(g.v[k])
            adj.setdefault(a, []).append((b, k))
            adj.setdefault(b, []).append((a, k))
    best = math.inf
    stack = [(s, {s}, 0.0)]
    while stack:
        node, seen, w = stack.pop()
        if w >= best:
            continue
        if node == t:
            best = w
            continue
        for nxt, k in adj[node]:
            if nxt not in seen:
                stack.append((nxt, seen | {nxt}, w + g.weight[k]))
    return best


def test_shortest_path_detours_onto_cheap_seam():
    g = weighted(4, 0, (2,), p_bulk=0.01, p_seam=0.3)
    v = g.vertex_index
    dg = defect_distances(g, [v(1, 1)])
    # to reach the boundary it is cheaper to step onto the seam column first
    path = dg.path(1, v(1, 1))
    assert sum(g.axis[k] == Axis.HORIZONTAL for k in path) == 1
    assert dg.boundary_distance[0] == pytest.approx(g.weight[path].sum())
    assert dg.boundary_distance[0] < 2 * g.weight[_edge(g, v(1, 0), v(1, 1))]
    for a, b in itertools.combinations(range(g.n_real), 2):
        if (a * 7 + b) % 5:
            continue
        d = defect_distances(g, [a, b])
        assert d.distance[0, 1] == pytest.approx(_simple_paths(g, a, b))


def test_decode_examples(uniform_l3):
    g = uniform_l3
    dec = MatchingDecoder().fit(g)
    empty = dec.decode([])
    assert empty.edges.size == 0 and empty.weight == 0
    v = g.vertex_index
    k = _edge(g, v(0, 0), v(1, 0))
    corr = dec.decode(syndrome_of(g, [k]))
    assert corr.edges.tolist() == [k]


@pytest.mark.parametrize("engine", ["blossom", "pymatching"])
def test_full_syndrome_space_l3(engine):
    for seed in range(3):
        g = random_weighted(3, 0, seed)
        assert certify_decoder(g, MatchingDecoder(engine).fit(g)) == 64


def test_full_syndrome_space_with_rounds():
    g = random_weighted(2, 2, 11)
    assert certify_decoder(g, MatchingDecoder("blossom").fit(g)) == 2**6


@pytest.mark.parametrize("L, T", [(4, 0), (5, 2)])
def test_engines_agree_on_weight(L, T):
    g = random_weighted(L, T, 5, high=0.15)
    flips = sample_error_batch(g, 3, 0, 60)
    syn = syndrome_batch(g, flips)
    a, b = MatchingDecoder("blossom").fit(g), MatchingDecoder("pymatching").fit(g)
    for row in syn:
        d = np.flatnonzero(row)
        ca, cb = a.decode(d), b.decode(d)
        assert ca.weight == pytest.approx(cb.weight, rel=1e-9)
        assert np.array_equal(syndrome_of(g, ca.edges).vertices, d)
        assert np.array_equal(syndrome_of(g, cb.edges).vertices, d)


def test_matching_cost_equals_correction_weight():
    g = random_weighted(5, 1, 8, high=0.2)
    from seamqec.decoder import blossom_match

    dec = MatchingDecoder("blossom", memoize=False).fit(g)
    for row in syndrome_batch(g, sample_error_batch(g, 4, 0, 30)):
        d = np.flatnonzero(row)
        dg = defect_distances(g, d)
        costs = dg.costs()
        pairs = blossom_match(dg)
        # paths of different pairs may overlap and cancel, never increasing the weight
        assert dec.decode(d).weight <= math.fsum(costs[p] for p in pairs) + 1e-9


def test_predict_shapes_and_determinism():
    g = weighted(4, 2, (2,), 0.01, 0.08)
    syn = syndrome_batch(g, sample_error_batch(g, 1, 0, 40))
    for engine in ("blossom", "pymatching"):
        dec = MatchingDecoder(engine).fit(g)
        out = dec.predict(syn)
        assert out.shape == (40, g.n_edges) and out.dtype == bool
        assert np.array_equal(out, MatchingDecoder(engine).fit(g).predict(syn))
        assert np.array_equal(syndrome_batch(g, out), syn)
    assert MatchingDecoder(engine="pymatching").get_params() == {"engine": "pymatching", "memoize": True}


def test_decoder_rejections():
    g = build_graph(LatticeSpec(3))
    with pytest.raises(ValidationError):
        MatchingDecoder().fit(g)
    gw = weighted(3)
    with pytest.raises(ValidationError):
        MatchingDecoder(engine="greedy").fit(gw)
    dec = MatchingDecoder().fit(gw)
    with pytest.raises(ValidationError):
        dec.decode([99])
    with pytest.raises(ValidationError):
        dec.predict(np.zeros((2, 5), bool))


def test_defect_graph_dump():
    g = weighted(3)
    dg = defect_distances(g, [0, 4])
    lines = dg.dumps(g).splitlines()
    assert len(lines) == len(dg.costs()) == 4
    assert lines[0].startswith("0 0,0,0 1,1,0 bulk space")


def test_one_shot_wrapper():
    g = weighted(3)
    assert decode(g, [0, 1]).edges.tolist() == [1]


def test_infinite_edges_are_impassable():
    g = build_graph(LatticeSpec(3))
    p = np.full(g.n_edges, 0.1)
    p[g.axis == Axis.HORIZONTAL] = 0.0
    g = assign_edge_probabilities(g, p)
    v = g.vertex_index
    dg = defect_distances(g, [v(0, 0), v(1, 0)])
    w = g.weight[0]
    assert dg.distance[0, 1] == pytest.approx(2 * w)  # through the boundary vertex
    assert all(g.axis[k] != Axis.HORIZONTAL for k in dg.path(0, v(1, 0)))
