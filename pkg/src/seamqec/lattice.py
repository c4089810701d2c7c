"""Matching graph of the bit-flip decoder for an unrotated planar code.

Geometry (distance ``L``, ``T`` noisy rounds):

* Check vertices sit at ``(x, y, t)`` with ``0 <= x < L``, ``0 <= y < L - 1``
  and ``0 <= t <= T``.  Slice ``T`` is the closing perfect round, so the 2D
  (perfect syndrome) graph is simply ``T = 0``.
* Vertical space edges ``(x, r)`` with ``0 <= r < L`` join check ``(x, r-1)``
  to ``(x, r)``.  Rows ``r = 0`` and ``r = L - 1`` end on the rough top and
  bottom boundaries, represented by one shared virtual vertex ``B``.
* Horizontal space edges join ``(x, y)`` to ``(x + 1, y)``.
* Time edges join ``(x, y, t)`` to ``(x, y, t + 1)`` for ``t < T``.

A seam at column ``c`` claims the vertical edges of column ``c`` in every
slice, plus the time edges of the checks in column ``c``.

Edges are indexed in the order of the key ``(t, r, x, kind)`` with kinds
ordered vertical, horizontal, time.  The logical cut is row ``r = 0`` of
vertical edges in every slice.
"""

from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from ._validation import ValidationError, check_int

BOUNDARY = "B"


class Region(IntEnum):
    BULK = 0
    SEAM = 1


class Orientation(IntEnum):
    SPACE = 0
    TIME = 1


class Axis(IntEnum):
    """Finer edge direction; VERTICAL and HORIZONTAL are both space-like."""

    VERTICAL = 0
    HORIZONTAL = 1
    TIME = 2


@dataclass(frozen=True)
class LatticeSpec:
    """Distance, number of noisy rounds and seam columns of one memory run."""

    distance: int
    rounds: int = 0
    seam_columns: tuple = ()

    def __post_init__(self):
        L = check_int(self.distance, "distance", minimum=2)
        check_int(self.rounds, "rounds", minimum=0)
        cols = tuple(int(check_int(c, "seam_columns")) for c in self.seam_columns)
        if len(cols) > 2:
            raise ValidationError("seam_columns", "at most two seams are supported")
        for c in cols:
            if not 0 <= c < L:
                raise ValidationError("seam_columns", f"column {c} outside [0, {L - 1}]")
        if any(b <= a for a, b in zip(cols, cols[1:])):
            raise ValidationError("seam_columns", "columns must be strictly increasing")
        if len(cols) == 2 and cols[1] - cols[0] < 2:
            raise ValidationError("h", f"two seams need separation >= 2, got {cols[1] - cols[0]}")
        object.__setattr__(self, "seam_columns", cols)

    @property
    def seam_separation(self):
        if len(self.seam_columns) < 2:
            return None
        return self.seam_columns[1] - self.seam_columns[0]

    @classmethod
    def with_default_seams(cls, distance, rounds=0, n_seams=1, h=None):
        """Place one seam at ``L // 2``, or two seams ``h`` apart around it."""
        L = check_int(distance, "distance", minimum=2)
        if n_seams == 0:
            return cls(L, rounds, ())
        if n_seams == 1:
            return cls(L, rounds, (L // 2,))
        if n_seams != 2:
            raise ValidationError("n_seams", "must be 0, 1 or 2")
        h = check_int(h, "h", minimum=2, maximum=L - 1)
        left = L // 2 - (h + 1) // 2
        left = min(max(left, 0), L - 1 - h)
        return cls(L, rounds, (left, left + h))


@dataclass(frozen=True, eq=False)
class MatchingGraph:
    """Immutable matching graph; probabilities/weights are filled in by the
    noise model via :meth:`with_noise`.

    Vertex ``n_vertices - 1`` is the virtual boundary.  ``u`` and ``v`` hold
    edge endpoints, always with ``u < v``.
    """

    spec: LatticeSpec
    coords: np.ndarray  # (n_real, 3) int
    u: np.ndarray
    v: np.ndarray
    region: np.ndarray
    axis: np.ndarray
    row: np.ndarray  # vertical row index r, -1 for other edges
    slice: np.ndarray  # time slice of the edge's lower endpoint
    probability: np.ndarray = field(default=None)
    weight: np.ndarray = field(default=None)

    @property
    def n_real(self):
        return len(self.coords)

    @property
    def n_vertices(self):
        return len(self.coords) + 1

    @property
    def boundary(self):
        return len(self.coords)

    @property
    def n_edges(self):
        return len(self.u)

    @property
    def orientation(self):
        return np.where(self.axis == Axis.TIME, Orientation.TIME, Orientation.SPACE).astype(np.int8)

    @property
    def logical_cut(self):
        return self.cut(0)

    def cut(self, r):
        """Indices of the vertical edges in row ``r`` across all slices."""
        if not 0 <= r < self.spec.distance:
            raise ValidationError("row", f"cut row {r} outside [0, {self.spec.distance - 1}]")
        return np.flatnonzero((self.axis == Axis.VERTICAL) & (self.row == r))

    @property
    def seam_edges(self):
        return np.flatnonzero(self.region == Region.SEAM)

    @property
    def is_weighted(self):
        return self.weight is not None

    def vertex_label(self, idx):
        if idx == self.boundary:
            return BOUNDARY
        x, y, t = self.coords[idx]
        return f"{x},{y},{t}"

    def vertex_index(self, x, y, t=0):
        L = self.spec.distance
        return (t * (L - 1) + y) * L + x

    def incidence(self):
        """Sparse ``(n_real, n_edges)`` 0/1 incidence matrix over real checks."""
        from scipy import sparse

        rows, cols = [], []
        for end in (self.u, self.v):
            real = end != self.boundary
            rows.append(end[real])
            cols.append(np.flatnonzero(real))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        data = np.ones(len(rows), dtype=np.uint8)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n_real, self.n_edges))

    def with_noise(self, probability, weight):
        return replace(self, probability=np.asarray(probability, float), weight=np.asarray(weight, float))

    def dumps(self):
        """Line-oriented dump: ``index u v region orientation weight``."""
        weights = self.weight if self.weight is not None else np.zeros(self.n_edges)
        lines = []
        for k in range(self.n_edges):
            lines.append(
                f"{k} {self.vertex_label(self.u[k])} {self.vertex_label(self.v[k])} "
                f"{Region(self.region[k]).name.lower()} "
                f"{Orientation.TIME.name.lower() if self.axis[k] == Axis.TIME else Orientation.SPACE.name.lower()} "
                f"{float(weights[k])!r}"
            )
        return "\n".join(lines) + "\n"


def build_graph(spec):
    """Construct the matching graph for ``spec``; construction is deterministic."""
    if not isinstance(spec, LatticeSpec):
        raise TypeError("spec must be a LatticeSpec")
    L, T = spec.distance, spec.rounds
    seams = set(spec.seam_columns)
    n_rows = L - 1
    n_real = L * n_rows * (T + 1)
    B = n_real

    def vid(x, y, t):
        return (t * n_rows + y) * L + x

    coords = np.array(
        [(x, y, t) for t in range(T + 1) for y in range(n_rows) for x in range(L)], dtype=np.int64
    ).reshape(-1, 3)

    u, v, region, axis, row, slc = [], [], [], [], [], []

    def add(a, b, reg, ax, r, t):
        a, b = (a, b) if a < b else (b, a)
        u.append(a)
        v.append(b)
        region.append(reg)
        axis.append(ax)
        row.append(r)
        slc.append(t)

    for t in range(T + 1):
        for r in range(L):
            for x in range(L):
                upper = B if r == 0 else vid(x, r - 1, t)
                lower = B if r == L - 1 else vid(x, r, t)
                add(upper, lower, Region.SEAM if x in seams else Region.BULK, Axis.VERTICAL, r, t)
                if r < n_rows and x < L - 1:
                    add(vid(x, r, t), vid(x + 1, r, t), Region.BULK, Axis.HORIZONTAL, -1, t)
                if r < n_rows and t < T:
                    add(vid(x, r, t), vid(x, r, t + 1), Region.SEAM if x in seams else Region.BULK, Axis.TIME, -1, t)

    return MatchingGraph(
        spec=spec,
        coords=coords,
        u=np.array(u, dtype=np.int64),
        v=np.array(v, dtype=np.int64),
        region=np.array(region, dtype=np.int8),
        axis=np.array(axis, dtype=np.int8),
        row=np.array(row, dtype=np.int64),
        slice=np.array(slc, dtype=np.int64),
    )


def logical_cut_parity(graph, flipped, row=0):
    """Parity of ``|flipped & cut(row)|``; 1 flags a spanning chain."""
    from ._validation import check_edge_mask

    mask = check_edge_mask(flipped, graph.n_edges)
    return int(mask[graph.cut(row)].sum() & 1)


def expected_counts(L, T, n_seams=0):
    """Closed-form vertex and edge counts, used to cross-check construction."""
    slices = T + 1
    seam_space = n_seams * L * slices
    seam_time = n_seams * (L - 1) * T
    return {
        "real_vertices": L * (L - 1) * slices,
        "vertical": L * L * slices,
        "horizontal": (L - 1) ** 2 * slices,
        "time": L * (L - 1) * T,
        "seam_space": seam_space,
        "seam_time": seam_time,
        "cut": L * slices,
    }
