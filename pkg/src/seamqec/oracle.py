"""Brute-force references used to certify the simulator.

Nothing here is fast; everything here is simple enough to trust.
"""

import math
from collections import Counter
from dataclasses import dataclass
from itertools import product

import numpy as np

from ._validation import ValidationError, check_int
from .blossom import MatchingError
from .decoder import MatchingDecoder
from .logical import residual
from .noise import syndrome_of

ENUMERATION_BUDGET_BITS = 24
SYNDROME_TABLE_BITS = 22
_CHUNK = 1 << 16


class BudgetExceededError(ValidationError):
    def __init__(self, what, size, limit):
        super().__init__(what, f"{size} exceeds the enumeration budget of {limit}")


# ---------------------------------------------------------------------------
# matching graph oracles


def _active_edges(graph):
    return np.flatnonzero(graph.probability > 0)


def _vertex_masks(graph, edges):
    """Bitmask over real vertices touched by each edge (boundary dropped)."""
    masks = []
    for k in edges:
        m = 0
        for end in (int(graph.u[k]), int(graph.v[k])):
            if end != graph.boundary:
                m ^= 1 << end
        masks.append(m)
    return masks


def _syndrome_key(vertices):
    key = 0
    for v in vertices:
        key |= 1 << int(v)
    return key


def _key_to_vertices(key, n_real):
    return np.array([v for v in range(n_real) if key >> v & 1], dtype=np.int64)


def _decode_parity(decoder, graph, key, cache):
    if key not in cache:
        corr = decoder.decode(_key_to_vertices(key, graph.n_real))
        cache[key] = int(np.isin(corr.edges, graph.logical_cut).sum() & 1)
    return cache[key]


def exact_failure_probability(graph, decoder=None, method="auto"):
    """Exact logical failure probability of ``decoder`` on ``graph``.

    ``method="enumerate"`` sums ``Prob(E) * [fail]`` over every error
    pattern of the active (``p > 0``) edges; budget ``2**24`` patterns.
    ``method="syndrome"`` computes the same sum grouped by (syndrome, cut
    parity) via an edge-by-edge convolution, which also handles graphs with
    more edges as long as the syndrome space fits ``2**22``.
    """
    if graph.probability is None:
        raise ValidationError("graph", "probabilities not assigned")
    decoder = decoder or MatchingDecoder("blossom").fit(graph)
    active = _active_edges(graph)
    if method == "auto":
        method = "enumerate" if len(active) <= ENUMERATION_BUDGET_BITS else "syndrome"
    if method == "enumerate":
        return _failure_by_enumeration(graph, decoder, active)
    if method == "syndrome":
        return _failure_by_syndrome_table(graph, decoder, active)
    raise ValidationError("method", f"unknown method {method!r}")


def _pattern_chunks(active, graph):
    """Yield ``(bits, syndrome_keys)`` for all subsets of ``active`` in chunks."""
    n = len(active)
    if graph.n_real > 62:
        raise BudgetExceededError("syndrome bits", graph.n_real, 62)
    vmask = np.array(_vertex_masks(graph, active), dtype=np.int64)
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, 1 << n, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        bits = ((ids[:, None] >> shifts) & 1).astype(bool)
        keys = np.bitwise_xor.reduce(np.where(bits, vmask, 0), axis=1)
        yield bits, keys


def _failure_by_enumeration(graph, decoder, active):
    n = len(active)
    if n > ENUMERATION_BUDGET_BITS:
        raise BudgetExceededError("edges", n, ENUMERATION_BUDGET_BITS)
    if n == 0:
        return 0.0
    p = graph.probability[active]
    logp, log1mp = np.log(p), np.log1p(-p)
    in_cut = np.isin(active, graph.logical_cut)
    cache = {}
    partials = []
    for bits, keys in _pattern_chunks(active, graph):
        prob = np.exp(bits @ logp + (~bits) @ log1mp)
        err_parity = bits[:, in_cut].sum(axis=1) & 1
        uniq, inv = np.unique(keys, return_inverse=True)
        dec_parity = np.array([_decode_parity(decoder, graph, int(k), cache) for k in uniq])
        fail = err_parity != dec_parity[inv]
        partials.append(math.fsum(prob[fail]))
    return math.fsum(partials)


def _failure_by_syndrome_table(graph, decoder, active):
    nbits = graph.n_real + 1
    if nbits > SYNDROME_TABLE_BITS:
        raise BudgetExceededError("syndrome space", 1 << nbits, 1 << SYNDROME_TABLE_BITS)
    # state index = syndrome key << 1 | error cut parity
    table = np.zeros(1 << nbits)
    table[0] = 1.0
    idx = np.arange(1 << nbits)
    cut = set(graph.logical_cut.tolist())
    for k, vm in zip(active, _vertex_masks(graph, active)):
        flip = (vm << 1) | (1 if int(k) in cut else 0)
        p = graph.probability[k]
        table = (1.0 - p) * table + p * table[idx ^ flip]
    cache = {}
    total = []
    for key in np.flatnonzero(table.reshape(-1, 2).sum(axis=1) > 0):
        c = _decode_parity(decoder, graph, int(key), cache)
        total.append(table[2 * key + (1 - c)])
    return math.fsum(total)


def brute_force_min_weight(graph, syndrome):
    """Exhaustive minimum weight over all edge subsets with boundary ``syndrome``.

    Returns ``(weight, witness_edges)``; ``(inf, None)`` if unreachable.
    """
    if not graph.is_weighted:
        raise ValidationError("graph", "weights not assigned")
    active = np.flatnonzero(np.isfinite(graph.weight))
    n = len(active)
    if n > ENUMERATION_BUDGET_BITS:
        raise BudgetExceededError("edges", n, ENUMERATION_BUDGET_BITS)
    verts = syndrome.vertices if hasattr(syndrome, "vertices") else syndrome
    target = _syndrome_key(verts)
    w = graph.weight[active]
    best = (math.inf, None)
    for bits, keys in _pattern_chunks(active, graph):
        hit = np.flatnonzero(keys == target)
        if hit.size:
            weights = bits[hit] @ w
            i = int(np.argmin(weights))
            if weights[i] < best[0]:
                best = (float(weights[i]), active[bits[hit[i]]])
    return best


def min_weight_table(graph):
    """Minimum correction weight for every syndrome at once.

    Exact min-plus dynamic programme over edge subsets: after processing
    edges ``0..k`` entry ``s`` holds the least weight of a subset of those
    edges whose real-vertex boundary is ``s``.  Returns ``(weights, witness)``
    where ``witness(key)`` rebuilds an optimal edge set.
    """
    if graph.n_real > SYNDROME_TABLE_BITS:
        raise BudgetExceededError("syndrome space", 1 << graph.n_real, 1 << SYNDROME_TABLE_BITS)
    active = np.flatnonzero(np.isfinite(graph.weight))
    size = 1 << graph.n_real
    idx = np.arange(size)
    table = np.full(size, math.inf)
    table[0] = 0.0
    took = []
    masks = _vertex_masks(graph, active)
    for k, vm in zip(active, masks):
        cand = table[idx ^ vm] + graph.weight[k]
        better = cand < table
        took.append(better)
        table = np.where(better, cand, table)

    def witness(key):
        edges = []
        for k, vm, better in zip(active[::-1], masks[::-1], took[::-1]):
            if better[key]:
                edges.append(int(k))
                key ^= vm
        if key != 0:
            return None
        return np.array(sorted(edges), dtype=np.int64)

    return table, witness


def certify_decoder(graph, decoder=None, rtol=1e-9):
    """Compare decoder weights with :func:`min_weight_table` on every syndrome.

    Returns the number of syndromes checked; raises ``AssertionError`` on
    the first mismatch or on a syndrome-inconsistent correction.
    """
    decoder = decoder or MatchingDecoder("blossom").fit(graph)
    table, _ = min_weight_table(graph)
    checked = 0
    for key in np.flatnonzero(np.isfinite(table)):
        verts = _key_to_vertices(int(key), graph.n_real)
        corr = decoder.decode(verts)
        got = syndrome_of(graph, corr.edges).vertices
        if not np.array_equal(got, verts):
            raise AssertionError(f"syndrome mismatch for {verts.tolist()}")
        if not math.isclose(corr.weight, table[key], rel_tol=rtol, abs_tol=1e-9):
            raise AssertionError(f"weight {corr.weight} != optimum {table[key]} for {verts.tolist()}")
        checked += 1
    return checked


def brute_force_min_matching(n, costs):
    """Minimum-cost perfect pairing by trying all ``(n - 1)!!`` pairings."""
    best_cost, best_pairs = math.inf, None
    for pairs in all_pairings(list(range(n))):
        if all(p in costs for p in pairs):
            c = math.fsum(costs[p] for p in pairs)
            if c < best_cost:
                best_cost, best_pairs = c, pairs
    if best_pairs is None:
        raise MatchingError("graph has no perfect matching")
    return best_cost, best_pairs


def all_pairings(items):
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    for idx in range(1, len(items)):
        for tail in all_pairings(items[1:idx] + items[idx + 1:]):
            yield [(first, items[idx])] + tail


def judge_exhaustively(graph, errors, decoder):
    """Failure flag of one pattern via decode + residual; test helper."""
    corr = decoder.decode(syndrome_of(graph, errors))
    res = residual(errors, corr, graph.n_edges)
    return bool(res[graph.logical_cut].sum() & 1)


# ---------------------------------------------------------------------------
# self-avoiding walks


def _unit_steps(D):
    steps = []
    for d in range(D):
        for s in (1, -1):
            e = [0] * D
            e[d] = s
            steps.append(tuple(e))
    return steps


SAW_LIMITS = {1: 30, 2: 12, 3: 8, 4: 6}


def enumerate_saws(D, length, first_step=None, collect=True):
    """All self-avoiding walks of ``length`` edges on Z^D from the origin.

    ``first_step`` fixes the first edge (default ``+e_1``); pass ``"free"``
    to allow all ``2D`` first steps.  Returns ``(count, walks)`` with each
    walk a tuple of vertices.
    """
    D = check_int(D, "D", minimum=1)
    length = check_int(length, "length", minimum=1)
    limit = SAW_LIMITS.get(D, 4)
    if length > limit:
        raise BudgetExceededError("length", length, limit)
    steps = _unit_steps(D)
    origin = (0,) * D
    if first_step is None:
        firsts = [steps[0]]
    elif first_step == "free":
        firsts = steps
    else:
        firsts = [tuple(first_step)]
    walks = []
    count = 0

    def extend(path, seen):
        nonlocal count
        if len(path) == length + 1:
            count += 1
            if collect:
                walks.append(tuple(path))
            return
        x = path[-1]
        for s in steps:
            y = tuple(a + b for a, b in zip(x, s))
            if y not in seen:
                seen.add(y)
                path.append(y)
                extend(path, seen)
                path.pop()
                seen.discard(y)

    for s in firsts:
        extend([origin, s], {origin, s})
    return count, walks


@dataclass(frozen=True)
class WalkClassification:
    gamma_s: int
    gamma_b: int
    excursions: int
    segments: tuple  # (l_0, l_1, ..., l_C, l_{C+1})
    corner_edges: int

    @property
    def segment_total(self):
        return sum(self.segments)


def _on_seam(x, D_s):
    return all(c == 0 for c in x[D_s:])


def classify_walk(walk, D_s):
    """Split a walk into seam runs, excursions and leading/trailing bulk runs.

    The seam is the sublattice whose coordinates beyond the first ``D_s``
    vanish; an edge is a seam edge when both endpoints lie on it.
    """
    walk = [tuple(x) for x in walk]
    if len(walk) < 2:
        raise ValidationError("walk", "a walk needs at least one edge")
    D = len(walk[0])
    if not 1 <= D_s < D:
        raise ValidationError("D_s", f"seam dimension must lie in [1, {D - 1}]")
    if len(set(walk)) != len(walk):
        raise ValidationError("walk", "walk is not self-avoiding")
    kinds = []
    for a, b in zip(walk, walk[1:]):
        if sum(abs(p - q) for p, q in zip(a, b)) != 1:
            raise ValidationError("walk", f"non-unit step {a} -> {b}")
        kinds.append("S" if _on_seam(a, D_s) and _on_seam(b, D_s) else "B")
    runs = []
    for k in kinds:
        if runs and runs[-1][0] == k:
            runs[-1][1] += 1
        else:
            runs.append([k, 1])
    gamma_s = sum(n for k, n in runs if k == "S")
    gamma_b = sum(n for k, n in runs if k == "B")
    if gamma_s == 0:
        return WalkClassification(0, gamma_b, 0, (gamma_b, 0), 0)
    lead = runs[0][1] if runs[0][0] == "B" else 0
    trail = runs[-1][1] if runs[-1][0] == "B" else 0
    interior = runs[1:] if lead else runs
    interior = interior[:-1] if trail else interior
    excursions = [n for k, n in interior if k == "B"]
    C = len(excursions)
    segments = (lead, *[n - 2 for n in excursions], trail)
    cls = WalkClassification(gamma_s, gamma_b, C, segments, 2 * C)
    if cls.gamma_b != 2 * C + sum(segments) or any(s < 0 for s in segments):
        raise ValidationError("walk", "inconsistent excursion bookkeeping")
    return cls


def class_counts(D_b, D_s, length, first_step=None):
    """Walk counts per ``(gamma_s, C, segments)`` class."""
    _, walks = enumerate_saws(D_b, length, first_step=first_step)
    counts = Counter()
    for w in walks:
        c = classify_walk(w, D_s)
        counts[(c.gamma_s, c.excursions, c.segments)] += 1
    return counts


def class_bound(gamma_s, C, segments, D_s, D_b):
    """Walk-count bound for one class: pure seam, pure bulk, or mixed."""
    mu_s, mu_b = 2 * D_s - 1, 2 * D_b - 1
    a = 4 * D_s * (D_b - D_s) / mu_s
    total_l = sum(segments)
    if gamma_s == 0:
        return mu_b ** total_l
    if total_l == 0 and C == 0:
        return mu_s**gamma_s
    return math.comb(gamma_s, C) * a**C * mu_s**gamma_s * mu_b**total_l


def check_class_bounds(D_b, D_s, max_length, first_steps=None):
    """Return the list of class-bound violations for lengths up to ``max_length``."""
    if first_steps is None:
        first_steps = [tuple(1 if i == 0 else 0 for i in range(D_b)), tuple(1 if i == D_b - 1 else 0 for i in range(D_b))]
    bad = []
    for step in first_steps:
        for ell in range(1, max_length + 1):
            for (g, C, segs), n in class_counts(D_b, D_s, ell, first_step=step).items():
                bound = class_bound(g, C, segs, D_s, D_b)
                if n > bound:
                    bad.append((step, ell, g, C, segs, n, bound))
    return bad


# ---------------------------------------------------------------------------
# Bell-pair Pauli propagation through a teleported CNOT

# Qubit order: control data qubit, Bell half next to the control, Bell half
# next to the target, target data qubit.
QUBITS = ("control", "bell_c", "bell_t", "target")
_C, _A, _B, _T = range(4)


def _cnot(frame, ctrl, tgt):
    x, z = frame
    x = list(x)
    z = list(z)
    x[tgt] ^= x[ctrl]
    z[ctrl] ^= z[tgt]
    return tuple(x), tuple(z)


def propagate_teleported_cnot(x, z):
    """Push a Pauli frame through the one-ebit teleported CNOT.

    Protocol: CNOT(control -> bell_c); measure bell_c in Z and apply X on
    bell_t on outcome 1; CNOT(bell_t -> target); measure bell_t in X and
    apply Z on control on outcome 1.  A frame component that flips a
    measurement outcome therefore turns into the feed-forward Pauli.
    Returns the residual ``(x, z)`` on ``(control, target)``.
    """
    frame = (tuple(x), tuple(z))
    frame = _cnot(frame, _C, _A)
    fx, fz = map(list, frame)
    if fx[_A]:  # flips the Z-basis outcome
        fx[_B] ^= 1
    fx[_A] = fz[_A] = 0
    frame = _cnot((tuple(fx), tuple(fz)), _B, _T)
    fx, fz = map(list, frame)
    if fz[_B]:  # flips the X-basis outcome
        fz[_C] ^= 1
    fx[_B] = fz[_B] = 0
    return (fx[_C], fx[_T]), (fz[_C], fz[_T])


def _pauli_name(x, z):
    return {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x, z)]


def pauli_propagation_table():
    """Map each Pauli on the Bell pair to the resulting Pauli on (control, target)."""
    table = {}
    for pa, pb in product("IXYZ", repeat=2):
        x = [0, int(pa in "XY"), int(pb in "XY"), 0]
        z = [0, int(pa in "ZY"), int(pb in "ZY"), 0]
        (xc, xt), (zc, zt) = propagate_teleported_cnot(x, z)
        table[pa + pb] = {"control": _pauli_name(xc, zc), "target": _pauli_name(xt, zt)}
    return table


def bell_state_stabilized_by(pauli):
    """True when the Bell state (|00> + |11>)/sqrt(2) is a +1 eigenstate of ``pauli``."""
    mats = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Z": np.diag([1, -1]),
        "Y": np.array([[0, -1j], [1j, 0]]),
    }
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    op = np.kron(mats[pauli[0]], mats[pauli[1]])
    return bool(np.allclose(op @ bell, bell))


def verify_pauli_table():
    """Check the propagation rules and Bell-pair invariance; returns failures."""
    table = pauli_propagation_table()
    problems = []
    for single, where in (("X", "target"), ("Z", "control")):
        for key in (single + "I", "I" + single):
            got = table[key]
            other = "control" if where == "target" else "target"
            if got[where] != single or got[other] != "I":
                problems.append((key, got))
    for stab in ("XX", "ZZ"):
        if not bell_state_stabilized_by(stab):
            problems.append((stab, "not a Bell stabilizer"))
        if table[stab] != {"control": "I", "target": "I"}:
            problems.append((stab, table[stab]))
    return problems


def enumeration_growth(D, max_length):
    """Exact SAW counts from a fixed first edge, lengths ``1..max_length``."""
    return {ell: enumerate_saws(D, ell, collect=False)[0] for ell in range(1, max_length + 1)}

