"""Phenomenological noise: per-edge flip probabilities, log-odds weights and
counter-based sampling of error patterns.

Every uniform variate is a hash of ``(seed, shot, edge)``, so a shot's error
pattern does not depend on how shots are batched or spread over workers.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import ValidationError, check_edge_mask, check_int, check_probability
from .lattice import Axis, Region

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_EDGE_MUL = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseParams:
    """User-facing noise: error per local gate and per Bell pair.

    Bulk data and syndrome edges flip with ``p_b = q_b = 4 * p_bulk``; seam
    edges with ``p_s = q_s = p_seam``.
    """

    p_bulk: float = 0.0
    p_seam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p_bulk", check_probability(self.p_bulk, "p_bulk", upper=0.125))
        object.__setattr__(self, "p_seam", check_probability(self.p_seam, "p_seam", upper=0.5))

    @classmethod
    def from_edge_rates(cls, p_b, p_s=0.0):
        return cls(p_bulk=p_b / 4.0, p_seam=p_s)

    @property
    def p_b(self):
        return 4.0 * self.p_bulk

    @property
    def q_b(self):
        return self.p_b

    @property
    def p_s(self):
        return self.p_seam

    @property
    def q_s(self):
        return self.p_s

    def to_dict(self):
        return {"p_bulk": self.p_bulk, "p_seam": self.p_seam}


@dataclass(frozen=True)
class ErrorPattern:
    edges: np.ndarray  # sorted flipped edge indices
    seed: int
    shot: int

    def mask(self, n_edges):
        out = np.zeros(n_edges, dtype=bool)
        out[self.edges] = True
        return out


@dataclass(frozen=True)
class DefectSet:
    vertices: np.ndarray  # sorted real vertex indices with odd parity

    def __len__(self):
        return len(self.vertices)

    def mask(self, n_real):
        out = np.zeros(n_real, dtype=bool)
        out[self.vertices] = True
        return out


def log_odds_weight(p):
    """``ln((1 - p) / p)``; zero-probability edges get ``+inf``."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(p > 0, np.log1p(-p) - np.log(np.where(p > 0, p, 1.0)), np.inf)


def edge_probabilities(graph, params):
    p = np.empty(graph.n_edges)
    seam = graph.region == Region.SEAM
    time = graph.axis == Axis.TIME
    p[~seam & ~time] = params.p_b
    p[~seam & time] = params.q_b
    p[seam & ~time] = params.p_s
    p[seam & time] = params.q_s
    return p


def assign_probabilities(graph, params):
    """Return a copy of ``graph`` carrying per-edge probabilities and weights."""
    for name in ("p_b", "q_b", "p_s", "q_s"):
        value = getattr(params, name)
        if not 0.0 <= value < 0.5:
            raise ValidationError(name, f"edge probability must lie in [0, 0.5), got {value}")
    p = edge_probabilities(graph, params)
    return graph.with_noise(p, log_odds_weight(p))


def assign_edge_probabilities(graph, probability):
    """Like :func:`assign_probabilities` with an explicit per-edge vector."""
    p = np.asarray(probability, dtype=float)
    if p.shape != (graph.n_edges,):
        raise ValidationError("probability", f"expected shape ({graph.n_edges},)")
    if np.any(p < 0) or np.any(p >= 0.5):
        raise ValidationError("probability", "edge probabilities must lie in [0, 0.5)")
    return graph.with_noise(p, log_odds_weight(p))


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _seed_key(seed):
    seed = check_int(seed, "seed", minimum=0)
    return _mix64(np.array([seed & _MASK64], dtype=np.uint64) + _GOLDEN)[0]


def uniforms(seed, shots, n_edges):
    """Uniform variates in [0, 1) for the given shot indices and all edges.

    Row ``i`` is a pure function of ``(seed, shots[i], edge)``.
    """
    shots = np.asarray(shots, dtype=np.uint64).reshape(-1, 1)
    edges = np.arange(n_edges, dtype=np.uint64).reshape(1, -1)
    with np.errstate(over="ignore"):
        h = _mix64(_seed_key(seed) ^ (shots * _GOLDEN + np.uint64(1)))
        h = _mix64(h + (edges + np.uint64(1)) * _EDGE_MUL)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def sample_error_batch(graph, seed, start, count):
    """Boolean flip matrix of shape ``(count, n_edges)`` for shots
    ``start, ..., start + count - 1``."""
    if graph.probability is None:
        raise ValidationError("graph", "probabilities not assigned")
    shots = np.arange(start, start + count, dtype=np.uint64)
    return uniforms(seed, shots, graph.n_edges) < graph.probability


def sample_errors(graph, seed, shot_index):
    flips = sample_error_batch(graph, seed, shot_index, 1)[0]
    return ErrorPattern(edges=np.flatnonzero(flips), seed=int(seed), shot=int(shot_index))


def syndrome_batch(graph, flips):
    """Odd-parity real vertices for each row of a ``(shots, n_edges)`` flip matrix."""
    flips = np.asarray(flips, dtype=np.uint8)
    if flips.ndim == 1:
        flips = flips[None, :]
    H = graph.incidence()
    return ((H @ flips.T).T & 1).astype(bool)


def syndrome_of(graph, errors):
    """Defects of an error pattern (mask, index iterable or :class:`ErrorPattern`)."""
    if isinstance(errors, ErrorPattern):
        mask = errors.mask(graph.n_edges)
    else:
        mask = check_edge_mask(errors, graph.n_edges, "errors")
    parity = np.zeros(graph.n_vertices, dtype=np.int64)
    np.add.at(parity, graph.u[mask], 1)
    np.add.at(parity, graph.v[mask], 1)
    odd = np.flatnonzero(parity[: graph.n_real] & 1)
    return DefectSet(vertices=odd)
