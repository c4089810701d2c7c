"""Small argument checkers shared by the estimators and the CLI."""

import numbers

import numpy as np


class ValidationError(ValueError):
    """A user-supplied value violates a precondition.

    ``field`` names the offending parameter so front ends can report it.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


def check_int(value, field, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(field, f"expected an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValidationError(field, f"must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ValidationError(field, f"must be <= {maximum}, got {value}")
    return value


def check_probability(value, field, upper=0.5, inclusive_upper=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(field, f"expected a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value < 0.0:
        raise ValidationError(field, f"must be a finite value >= 0, got {value}")
    if value > upper or (value == upper and not inclusive_upper):
        bound = "<=" if inclusive_upper else "<"
        raise ValidationError(field, f"must be {bound} {upper}, got {value}")
    return value


def check_edge_mask(flips, n_edges, field="flips"):
    """Coerce an edge subset to a boolean mask of length ``n_edges``.

    Accepts a boolean mask or any iterable of edge indices.
    """
    arr = np.asarray(flips)
    if arr.dtype == bool:
        if arr.shape != (n_edges,):
            raise ValidationError(field, f"mask must have shape ({n_edges},), got {arr.shape}")
        return arr.copy()
    idx = np.asarray(list(flips) if not isinstance(flips, np.ndarray) else flips, dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n_edges):
        raise ValidationError(field, "edge index out of range")
    mask = np.zeros(n_edges, dtype=bool)
    # repeated indices toggle, matching set-of-flips semantics over GF(2)
    np.logical_xor.at(mask, idx, True)
    return mask
