"""Monte Carlo estimation of logical failure rates and parameter sweeps.

A point's result depends only on ``(spec, params, shots, seed, engine)``:
shots are split into fixed-size chunks whose failure counts are summed, so
the worker count never changes the outcome.
"""

import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm

from ._validation import ValidationError, check_int
from .decoder import MatchingDecoder
from .lattice import LatticeSpec, build_graph
from .logical import failures_batch
from .noise import NoiseParams, assign_probabilities, sample_error_batch, syndrome_batch

log = logging.getLogger(__name__)

CHUNK_SHOTS = 4096
CSV_COLUMNS = (
    "L", "T", "p_bulk", "p_seam", "h", "shots", "failures",
    "p_fail", "ci_low", "ci_high", "seed", "fingerprint",
)


def default_workers():
    return int(os.environ.get("SEAMQEC_WORKERS", "1"))


def wilson_interval(failures, shots, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if shots < 1:
        raise ValidationError("shots", "must be >= 1")
    z = float(norm.ppf(0.5 + confidence / 2))
    phat = failures / shots
    denom = 1 + z * z / shots
    centre = (phat + z * z / (2 * shots)) / denom
    half = z * math.sqrt(phat * (1 - phat) / shots + z * z / (4 * shots * shots)) / denom
    # the interval touches 0 (or 1) exactly when no (or every) shot failed
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == shots else min(1.0, centre + half)
    return lo, hi


def fingerprint(spec, params, seed):
    payload = json.dumps(
        {
            "L": spec.distance,
            "T": spec.rounds,
            "seams": list(spec.seam_columns),
            "p_bulk": repr(float(params.p_bulk)),
            "p_seam": repr(float(params.p_seam)),
            "seed": int(seed),
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def point_seed(campaign_seed, spec, params):
    """Per-point seed split off a campaign seed by hashing the point's config."""
    digest = hashlib.sha256(f"{int(campaign_seed)}:{fingerprint(spec, params, 0)}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass(frozen=True)
class FailureEstimate:
    L: int
    T: int
    p_bulk: float
    p_seam: float
    h: int
    shots: int
    failures: int
    seed: int
    fingerprint: str
    seam_columns: tuple = ()

    @property
    def p_fail(self):
        return self.failures / self.shots

    @property
    def ci(self):
        return wilson_interval(self.failures, self.shots)

    @property
    def ci_low(self):
        return self.ci[0]

    @property
    def ci_high(self):
        return self.ci[1]

    @property
    def sigma(self):
        """Binomial standard error (Wilson-centred, never zero)."""
        lo, hi = self.ci
        return (hi - lo) / (2 * norm.ppf(0.975))

    def row(self):
        return {
            "L": self.L,
            "T": self.T,
            "p_bulk": repr(float(self.p_bulk)),
            "p_seam": repr(float(self.p_seam)),
            "h": "" if self.h is None else self.h,
            "shots": self.shots,
            "failures": self.failures,
            "p_fail": repr(self.p_fail),
            "ci_low": repr(self.ci_low),
            "ci_high": repr(self.ci_high),
            "seed": self.seed,
            "fingerprint": self.fingerprint,
        }


# per-process state for pool workers
_WORKER = {}


def _prepare(spec, params, engine):
    graph = assign_probabilities(build_graph(spec), params)
    decoder = MatchingDecoder(engine=engine).fit(graph)
    return graph, decoder


def _init_worker(spec, params, engine):
    _WORKER["state"] = _prepare(spec, params, engine)


def _count_chunk(graph, decoder, seed, start, count):
    flips = sample_error_batch(graph, seed, start, count)
    syn = syndrome_batch(graph, flips)
    corr = decoder.predict(syn)
    return int(failures_batch(graph, flips, corr, check=False).sum())


def _worker_chunk(args):
    graph, decoder = _WORKER["state"]
    return _count_chunk(graph, decoder, *args)


def count_failures(spec, params, shots, seed, engine="pymatching", workers=None):
    shots = check_int(shots, "shots", minimum=1)
    workers = default_workers() if workers is None else check_int(workers, "workers", minimum=1)
    chunks = [(seed, s, min(CHUNK_SHOTS, shots - s)) for s in range(0, shots, CHUNK_SHOTS)]
    if params.p_bulk == 0 and params.p_seam == 0:
        return 0
    if workers == 1 or len(chunks) == 1:
        graph, decoder = _prepare(spec, params, engine)
        return sum(_count_chunk(graph, decoder, *c) for c in chunks)
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(spec, params, engine)) as pool:
        return sum(pool.map(_worker_chunk, chunks))


def estimate(spec, params, shots, seed, engine="pymatching", workers=None):
    """Run ``shots`` sample -> decode -> judge pipelines and count failures."""
    t0 = time.perf_counter()
    failures = count_failures(spec, params, shots, seed, engine=engine, workers=workers)
    dt = time.perf_counter() - t0
    log.info(
        "L=%d T=%d p_bulk=%.6g p_seam=%.6g: %d/%d failures (%.0f shots/s)",
        spec.distance, spec.rounds, params.p_bulk, params.p_seam, failures, shots, shots / max(dt, 1e-9),
    )
    return FailureEstimate(
        L=spec.distance,
        T=spec.rounds,
        p_bulk=params.p_bulk,
        p_seam=params.p_seam,
        h=spec.seam_separation,
        shots=shots,
        failures=failures,
        seed=int(seed),
        fingerprint=fingerprint(spec, params, seed),
        seam_columns=spec.seam_columns,
    )


@dataclass(frozen=True)
class SweepPoint:
    spec: LatticeSpec
    params: NoiseParams


def sweep(points, shots, seed, engine="pymatching", workers=None, existing=None, progress=None):
    """Estimate every ``(spec, params)`` point with a split per-point seed.

    ``existing`` maps fingerprints to already computed estimates, which are
    reused so an interrupted sweep can resume.
    """
    existing = existing or {}
    out = []
    for i, pt in enumerate(points):
        spec, params = (pt.spec, pt.params) if isinstance(pt, SweepPoint) else pt
        pseed = point_seed(seed, spec, params)
        fp = fingerprint(spec, params, pseed)
        if fp in existing and existing[fp].shots == shots:
            out.append(existing[fp])
        else:
            out.append(estimate(spec, params, shots, pseed, engine=engine, workers=workers))
        if progress:
            progress(i + 1, len(points))
    return out


def linear_grid(start, stop, count):
    count = check_int(count, "count", minimum=1)
    if count == 1:
        return [float(start)]
    # 12 significant digits keep 0.007 from printing as 0.007000000000000001
    return [float(f"{x:.12g}") for x in np.linspace(start, stop, count)]


def ratio_locked_points(Ls, p_bulk_values, ratio, n_seams=1, h=None, rounds=None):
    """Grid with ``p_seam = ratio * p_bulk`` at every point and ``T = L`` by default."""
    pts = []
    for L in Ls:
        spec = LatticeSpec.with_default_seams(L, L if rounds is None else rounds, n_seams, h)
        for pb in p_bulk_values:
            pts.append(SweepPoint(spec, NoiseParams(pb, ratio * pb)))
    return pts


def grid_points(Ls, p_bulk_values, p_seam_values, n_seams=1, h=None, rounds=None):
    pts = []
    for L in Ls:
        spec = LatticeSpec.with_default_seams(L, L if rounds is None else rounds, n_seams, h)
        for pb in p_bulk_values:
            for ps in p_seam_values:
                pts.append(SweepPoint(spec, NoiseParams(pb, ps)))
    return pts


# ---------------------------------------------------------------------------
# CSV round trip


def to_csv(estimates):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for e in estimates:
        writer.writerow(e.row())
    return buf.getvalue()


def from_csv(text):
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        out.append(
            FailureEstimate(
                L=int(r["L"]),
                T=int(r["T"]),
                p_bulk=float(r["p_bulk"]),
                p_seam=float(r["p_seam"]),
                h=int(r["h"]) if r["h"] else None,
                shots=int(r["shots"]),
                failures=int(r["failures"]),
                seed=int(r["seed"]),
                fingerprint=r["fingerprint"],
            )
        )
    return out


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def estimates_as_dicts(estimates):
    return [dict(asdict(e), p_fail=e.p_fail, ci_low=e.ci_low, ci_high=e.ci_high) for e in estimates]
