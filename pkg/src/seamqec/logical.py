"""Combine errors and recovery; decide whether a shot failed."""

from dataclasses import dataclass

import numpy as np

from ._validation import ValidationError, check_edge_mask
from .decoder import Correction
from .lattice import logical_cut_parity
from .noise import ErrorPattern, syndrome_batch


@dataclass(frozen=True)
class ShotOutcome:
    failed: bool
    residual_weight: int  # number of edges in {E + R}
    seed: int = None
    shot: int = None


def _as_mask(obj, n_edges, field):
    if isinstance(obj, (ErrorPattern, Correction)):
        return obj.mask(n_edges)
    return check_edge_mask(obj, n_edges, field)


def residual(errors, correction, n_edges):
    """Symmetric difference ``{E + R}`` as a boolean edge mask."""
    return _as_mask(errors, n_edges, "errors") ^ _as_mask(correction, n_edges, "correction")


def judge(graph, errors, correction):
    """Logical outcome of one shot.

    Raises if ``correction`` does not reproduce the syndrome of ``errors``.
    """
    res = residual(errors, correction, graph.n_edges)
    if syndrome_batch(graph, res)[0].any():
        raise ValidationError("correction", "correction does not match the error syndrome")
    seed = getattr(errors, "seed", None)
    shot = getattr(errors, "shot", None)
    return ShotOutcome(
        failed=bool(logical_cut_parity(graph, res)),
        residual_weight=int(res.sum()),
        seed=seed,
        shot=shot,
    )


def failures_batch(graph, flips, corrections, check=True):
    """Vectorised failure flags for ``(shots, n_edges)`` error and correction matrices."""
    res = np.asarray(flips, dtype=bool) ^ np.asarray(corrections, dtype=bool)
    if check and syndrome_batch(graph, res).any():
        raise ValidationError("correction", "correction does not match the error syndrome")
    return (res[:, graph.logical_cut].sum(axis=1) & 1).astype(bool)
