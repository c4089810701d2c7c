"""Certification matrix: small graphs checked against the exact oracles."""

import itertools
import math
from dataclasses import dataclass

from .decoder import MatchingDecoder
from .experiments import estimate, wilson_interval
from .lattice import LatticeSpec, build_graph
from .noise import NoiseParams, assign_probabilities
from .oracle import certify_decoder, check_class_bounds, exact_failure_probability, verify_pauli_table

NOISE_SETTINGS = (
    NoiseParams(0.0125, 0.05),  # uniform p_b = p_s = 0.05
    NoiseParams(0.0125, 0.15),
    NoiseParams(0.025, 0.02),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def enumeration_matrix(noise_settings=NOISE_SETTINGS):
    """All ``(spec, params)`` pairs with ``L`` in {2, 3}, ``T`` in {0, 1}, seam on or off."""
    out = []
    for L, T, seam, params in itertools.product((2, 3), (0, 1), (False, True), noise_settings):
        out.append((LatticeSpec(L, T, (L // 2,) if seam else ()), params))
    return out


def check_graph(spec, params, shots, seed, engine="pymatching", z=3.0):
    """Monte Carlo versus exact failure probability, plus decode exactness."""
    graph = assign_probabilities(build_graph(spec), params)
    decoder = MatchingDecoder(engine=engine).fit(graph)
    exact = exact_failure_probability(graph, decoder)
    est = estimate(spec, params, shots, seed, engine=engine, workers=1)
    lo, hi = wilson_interval(est.failures, shots)
    sigma = (hi - lo) / (2 * 1.959963984540054)
    agree = abs(est.p_fail - exact) <= z * sigma
    n_syndromes = certify_decoder(graph, decoder)
    name = f"L={spec.distance} T={spec.rounds} seams={list(spec.seam_columns)} p_bulk={params.p_bulk} p_seam={params.p_seam}"
    detail = (
        f"mc={est.p_fail:.5f} exact={exact:.5f} dev={abs(est.p_fail - exact) / sigma:.2f}sigma "
        f"syndromes_certified={n_syndromes}"
    )
    return CheckResult(name, bool(agree), detail), exact, est


def run_certification(shots=100_000, seed=2024, engine="pymatching", walks=True):
    """Run the full matrix; returns a list of :class:`CheckResult`."""
    results = []
    for i, (spec, params) in enumerate(enumeration_matrix()):
        try:
            res, _, _ = check_graph(spec, params, shots, seed + i, engine=engine)
        except AssertionError as exc:
            res = CheckResult(f"L={spec.distance} T={spec.rounds}", False, f"decode not minimal: {exc}")
        results.append(res)
    if walks:
        for D_b, D_s, ell in ((3, 2, 7), (2, 1, 10)):
            bad = check_class_bounds(D_b, D_s, ell)
            results.append(CheckResult(f"walk classes D_b={D_b} D_s={D_s} l<={ell}", not bad, f"{len(bad)} violations"))
    problems = verify_pauli_table()
    results.append(CheckResult("pauli propagation table", not problems, "; ".join(problems) or "matches"))
    return results


def summary(results):
    failed = sum(not r.passed for r in results)
    return f"{len(results) - failed}/{len(results)} checks passed" + ("" if not failed else f", {failed} failed")


def sigma_distance(p_fail, exact, failures, shots):
    lo, hi = wilson_interval(failures, shots)
    return abs(p_fail - exact) / ((hi - lo) / (2 * 1.959963984540054)) if hi > lo else math.inf
