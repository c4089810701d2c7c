"""Minimum-weight perfect-matching decoder.

Two engines share one contract (exact MWPM over log-odds weights):

``"blossom"``
    Shortest paths between defects (Dijkstra), boundary images with
    zero-cost image pairs, then :func:`seamqec.blossom.min_cost_perfect_matching`.
    Slow but fully in-package; used for certification and small graphs.
``"pymatching"``
    Sparse blossom from the ``pymatching`` package, used for Monte Carlo
    campaigns on realistic sizes.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import ValidationError
from .blossom import MatchingError, min_cost_perfect_matching
from .noise import DefectSet

ENGINES = ("blossom", "pymatching")


@dataclass(frozen=True)
class Correction:
    edges: np.ndarray  # sorted edge indices of {R}
    weight: float

    def mask(self, n_edges):
        out = np.zeros(n_edges, dtype=bool)
        out[self.edges] = True
        return out


@dataclass
class DefectGraph:
    """Defects plus one boundary image each.

    Node ``i < k`` is defect ``defects[i]``; node ``k + i`` is its image.
    """

    defects: np.ndarray
    distance: np.ndarray  # (k, k) shortest-path weights between defects
    boundary_distance: np.ndarray  # (k,)
    predecessors: np.ndarray  # (k + 1, n_vertices); last row rooted at the boundary
    edge_lookup: dict

    @property
    def n_defects(self):
        return len(self.defects)

    @property
    def n_nodes(self):
        return 2 * len(self.defects)

    def costs(self):
        """Admissible node pairs and their costs; infinite distances are omitted."""
        k = self.n_defects
        out = {}
        for i in range(k):
            for j in range(i + 1, k):
                d = self.distance[i, j]
                if np.isfinite(d):
                    out[(i, j)] = float(d)
            if np.isfinite(self.boundary_distance[i]):
                out[(i, k + i)] = float(self.boundary_distance[i])
            for j in range(i + 1, k):
                out[(k + i, k + j)] = 0.0
        return out

    def path(self, source_row, target):
        """Edge indices along the stored shortest path tree ``source_row``."""
        pred = self.predecessors[source_row]
        edges = []
        node = target
        while pred[node] >= 0:
            prev = pred[node]
            edges.append(self.edge_lookup[(min(prev, node), max(prev, node))])
            node = prev
        return edges

    def dumps(self, graph):
        """Defect-graph dump in the matching-graph line format."""
        k = self.n_defects
        labels = [graph.vertex_label(d) for d in self.defects] + [
            f"img({graph.vertex_label(d)})" for d in self.defects
        ]
        lines = []
        for idx, ((i, j), c) in enumerate(sorted(self.costs().items())):
            kind = "boundary" if j >= k else "space"
            lines.append(f"{idx} {labels[i]} {labels[j]} bulk {kind} {c!r}")
        return "\n".join(lines) + ("\n" if lines else "")


def _edge_lookup(graph):
    """Cheapest edge for every vertex pair (lowest index on ties)."""
    lookup = {}
    for k in np.argsort(graph.weight, kind="stable"):
        w = graph.weight[k]
        if not np.isfinite(w):
            continue
        key = (int(graph.u[k]), int(graph.v[k]))
        if key not in lookup:
            lookup[key] = int(k)
    return lookup


def _csgraph(graph, lookup):
    keys = sorted(lookup)
    rows = np.array([a for a, _ in keys], dtype=np.int64)
    cols = np.array([b for _, b in keys], dtype=np.int64)
    data = graph.weight[[lookup[key] for key in keys]]
    n = graph.n_vertices
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def defect_distances(graph, defects, _cache=None):
    """Shortest-path costs among defects and from each defect to the boundary."""
    if not graph.is_weighted:
        raise ValidationError("graph", "weights not assigned")
    if np.any(graph.weight[np.isfinite(graph.weight)] <= 0):
        raise ValidationError("graph", "finite edge weights must be positive")
    verts = defects.vertices if isinstance(defects, DefectSet) else np.asarray(defects, dtype=np.int64)
    verts = np.asarray(verts, dtype=np.int64)
    if _cache is None:
        lookup = _edge_lookup(graph)
        adj = _csgraph(graph, lookup)
    else:
        lookup, adj = _cache
    k = len(verts)
    if k == 0:
        return DefectGraph(verts, np.zeros((0, 0)), np.zeros(0), np.zeros((1, graph.n_vertices), int), lookup)
    sources = np.concatenate([verts, [graph.boundary]])
    dist, pred = dijkstra(adj, directed=False, indices=sources, return_predecessors=True)
    return DefectGraph(
        defects=verts,
        distance=dist[:k][:, verts],
        boundary_distance=dist[k, verts],
        predecessors=pred,
        edge_lookup=lookup,
    )


def blossom_match(defect_graph):
    """Exact minimum-cost perfect matching of a :class:`DefectGraph`."""
    return min_cost_perfect_matching(defect_graph.n_nodes, defect_graph.costs())


def _paths_to_correction(graph, dg, pairs):
    k = dg.n_defects
    flips = np.zeros(graph.n_edges, dtype=bool)
    for i, j in pairs:
        if j < k:
            path = dg.path(i, dg.defects[j])
        elif j == k + i:
            path = dg.path(k, dg.defects[i])
        else:
            continue  # image-image pair
        flips[path] ^= True
    edges = np.flatnonzero(flips)
    return Correction(edges=edges, weight=math.fsum(graph.weight[edges]))


class MatchingDecoder(BaseEstimator):
    """Exact MWPM decoder for a weighted :class:`~seamqec.lattice.MatchingGraph`.

    ``fit(graph)`` prepares the engine; ``predict(syndromes)`` maps a
    boolean ``(shots, n_real)`` syndrome matrix to a ``(shots, n_edges)``
    correction matrix.  With ``memoize`` the blossom engine caches
    corrections per distinct syndrome.
    """

    def __init__(self, engine="blossom", memoize=True):
        self.engine = engine
        self.memoize = memoize

    def fit(self, graph, y=None):
        if self.engine not in ENGINES:
            raise ValidationError("engine", f"must be one of {ENGINES}, got {self.engine!r}")
        if not graph.is_weighted:
            raise ValidationError("graph", "weights not assigned")
        self.graph_ = graph
        self.n_features_in_ = graph.n_real
        self._memo = {}
        if self.engine == "blossom":
            lookup = _edge_lookup(graph)
            self._sp_cache = (lookup, _csgraph(graph, lookup))
        else:
            self._matching = _pymatching_from_graph(graph)
        return self

    def decode(self, syndrome):
        """Decode one :class:`DefectSet` (or vertex index array) to a :class:`Correction`."""
        check_is_fitted(self, "graph_")
        graph = self.graph_
        verts = syndrome.vertices if isinstance(syndrome, DefectSet) else np.asarray(syndrome, dtype=np.int64)
        verts = np.unique(np.asarray(verts, dtype=np.int64))
        if verts.size and (verts[0] < 0 or verts[-1] >= graph.n_real):
            raise ValidationError("syndrome", "vertex index out of range")
        if self.engine == "pymatching":
            det = np.zeros(graph.n_real, dtype=np.uint8)
            det[verts] = 1
            flips = self._pymatching_batch(det[None, :])[0]
            edges = np.flatnonzero(flips)
            return Correction(edges=edges, weight=math.fsum(graph.weight[edges]))
        key = verts.tobytes()
        if self.memoize and key in self._memo:
            return self._memo[key]
        dg = defect_distances(graph, verts, _cache=self._sp_cache)
        try:
            pairs = blossom_match(dg)
        except MatchingError as exc:
            raise MatchingError(f"decoder invariant violated: {exc}") from exc
        corr = _paths_to_correction(graph, dg, pairs)
        if self.memoize:
            self._memo[key] = corr
        return corr

    def predict(self, X):
        check_is_fitted(self, "graph_")
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features_in_:
            raise ValidationError("syndromes", f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        X = X.astype(bool)
        if self.engine == "pymatching":
            return self._pymatching_batch(X.astype(np.uint8))
        out = np.zeros((len(X), self.graph_.n_edges), dtype=bool)
        for s, row in enumerate(X):
            out[s, self.decode(np.flatnonzero(row)).edges] = True
        return out

    def _pymatching_batch(self, det):
        m = self._matching
        n_det = m.num_detectors
        if det.shape[1] > n_det:
            if det[:, n_det:].any():
                raise MatchingError("defect on a vertex with no admissible edges")
            det = det[:, :n_det]
        elif det.shape[1] < n_det:
            det = np.pad(det, ((0, 0), (0, n_det - det.shape[1])))
        pred = np.asarray(m.decode_batch(det), dtype=bool)
        n_edges = self.graph_.n_edges
        if pred.shape[1] < n_edges:
            pred = np.pad(pred, ((0, 0), (0, n_edges - pred.shape[1])))
        return pred[:, :n_edges]


def _pymatching_from_graph(graph):
    import pymatching

    m = pymatching.Matching()
    B = graph.boundary
    for k in range(graph.n_edges):
        w = graph.weight[k]
        if not np.isfinite(w):
            continue
        a, b = int(graph.u[k]), int(graph.v[k])
        kw = dict(fault_ids={k}, weight=float(w), error_probability=float(graph.probability[k]),
                  merge_strategy="smallest-weight")
        if b == B:
            m.add_boundary_edge(a, **kw)
        else:
            m.add_edge(a, b, **kw)
    return m


def decode(graph, syndrome, engine="blossom"):
    """One-shot convenience wrapper around :class:`MatchingDecoder`."""
    return MatchingDecoder(engine=engine, memoize=False).fit(graph).decode(syndrome)
