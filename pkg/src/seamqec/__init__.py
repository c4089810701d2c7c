"""Surface-code memory with a noisy seam: matching-graph simulation, exact
oracles and walk-counting threshold bounds."""

from ._validation import ValidationError
from .bounds import BoundParams, connectivity_constants
from .decoder import Correction, MatchingDecoder, decode
from .experiments import FailureEstimate, estimate, sweep, wilson_interval
from .lattice import LatticeSpec, MatchingGraph, build_graph
from .logical import judge
from .noise import DefectSet, ErrorPattern, NoiseParams, assign_probabilities, sample_errors, syndrome_of
from .threshold import FiniteSizeScalingFit, NoCrossingError, ThresholdFit, fit_threshold

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "Correction",
    "DefectSet",
    "ErrorPattern",
    "FailureEstimate",
    "FiniteSizeScalingFit",
    "LatticeSpec",
    "MatchingDecoder",
    "MatchingGraph",
    "NoCrossingError",
    "NoiseParams",
    "ThresholdFit",
    "ValidationError",
    "assign_probabilities",
    "build_graph",
    "connectivity_constants",
    "decode",
    "estimate",
    "fit_threshold",
    "judge",
    "sample_errors",
    "sweep",
    "syndrome_of",
    "wilson_interval",
]
