"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
3 no threshold crossing, 4 enumeration budget exceeded.
"""

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field

import yaml

from ._validation import ValidationError, check_int, check_probability
from .bounds import BOUND_COLUMNS, BoundParams, bound_row
from .decoder import ENGINES
from .lattice import LatticeSpec
from .noise import NoiseParams
from .oracle import BudgetExceededError
from .threshold import MODES, NoCrossingError

log = logging.getLogger("seamqec")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_NO_CROSSING = 3
EXIT_BUDGET = 4

COMMANDS = ("bounds", "simulate", "sweep", "threshold", "frontier", "two-seam", "oracle-verify")
WORKERS_ENV = "SEAMQEC_WORKERS"


# ---------------------------------------------------------------------------
# grids and lists


def parse_grid(text, field_name):
    """``start:stop:count`` (inclusive, linear) or a single number."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            value = float(parts[0])
            return value, value, 1
        if len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValidationError(field_name, f"grid count must be >= 1, got {count}")
            return start, stop, count
    except ValueError:
        pass
    raise ValidationError(field_name, f"expected a number or start:stop:count, got {text!r}")


def grid_values(text, field_name):
    from .experiments import linear_grid

    start, stop, count = parse_grid(text, field_name)
    check_int(count, field_name, minimum=1)
    return linear_grid(start, stop, count)


def canonical_grid(text, field_name):
    start, stop, count = parse_grid(text, field_name)
    if count == 1 and start == stop:
        return repr(start)
    return f"{start!r}:{stop!r}:{count}"


def parse_int_list(text, field_name):
    if isinstance(text, (list, tuple)):
        items = text
    else:
        items = [s for s in str(text).split(",") if s.strip()]
    try:
        return [int(x) for x in items]
    except ValueError:
        raise ValidationError(field_name, f"expected comma-separated integers, got {text!r}") from None


def parse_float_list(text, field_name):
    if isinstance(text, (list, tuple)):
        items = text
    else:
        items = [s for s in str(text).split(",") if s.strip()]
    try:
        return [float(x) for x in items]
    except ValueError:
        raise ValidationError(field_name, f"expected comma-separated numbers, got {text!r}") from None


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    command: str
    L: int = 8
    rounds: int = None  # None means T = L
    seams: int = 1
    h: list = field(default_factory=lambda: [3])
    Ls: list = field(default_factory=lambda: [4, 6, 8])
    p_bulk: str = "0.0"
    p_seam: str = "0.0"
    ratio_lock: float = None
    mode: str = "bulk-only"
    shots: int = 30000
    seed: int = 0
    workers: int = None
    engine: str = "pymatching"
    output: str = None
    Ds: int = 2
    Db: int = 3
    p_b: str = "0.002:0.01:17"
    p_s: str = "0.01"
    seam_slices: list = field(default_factory=lambda: [0.0, 0.02, 0.04, 0.06])
    bulk_slices: list = field(default_factory=lambda: [0.0, 0.0015, 0.003, 0.0045, 0.006])
    p_b_ratio: float = 0.5
    p_bulk_star: float = 0.0075

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.command not in COMMANDS:
            raise ValidationError("command", f"unknown command {self.command!r}")
        self.L = check_int(self.L, "L", minimum=2)
        if self.rounds is not None:
            self.rounds = check_int(self.rounds, "rounds", minimum=0)
        self.seams = check_int(self.seams, "seams", minimum=0, maximum=2)
        self.h = parse_int_list(self.h, "h")
        for h in self.h:
            check_int(h, "h", minimum=2)
        self.Ls = parse_int_list(self.Ls, "Ls")
        for L in self.Ls:
            check_int(L, "Ls", minimum=2)
        self.p_bulk = canonical_grid(self.p_bulk, "p_bulk")
        self.p_seam = canonical_grid(self.p_seam, "p_seam")
        self.p_b = canonical_grid(self.p_b, "p_b")
        self.p_s = canonical_grid(self.p_s, "p_s")
        if self.ratio_lock is not None:
            self.ratio_lock = float(self.ratio_lock)
            if not self.ratio_lock > 0:
                raise ValidationError("ratio_lock", "must be > 0")
        if self.mode not in MODES:
            raise ValidationError("mode", f"unknown mode {self.mode!r}")
        self.shots = check_int(self.shots, "shots", minimum=1)
        self.seed = check_int(self.seed, "seed", minimum=0)
        if self.workers is not None:
            self.workers = check_int(self.workers, "workers", minimum=1)
        if self.engine not in ENGINES:
            raise ValidationError("engine", f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        self.Ds = check_int(self.Ds, "Ds", minimum=1)
        self.Db = check_int(self.Db, "Db", minimum=1)
        self.seam_slices = parse_float_list(self.seam_slices, "seam_slices")
        self.bulk_slices = parse_float_list(self.bulk_slices, "bulk_slices")
        self.p_b_ratio = float(self.p_b_ratio)
        if not 0 < self.p_b_ratio < 1:
            raise ValidationError("p_b_ratio", "must lie in (0, 1)")
        self.p_bulk_star = check_probability(self.p_bulk_star, "p_bulk_star", upper=0.125)
        # everything below touches the domain preconditions of each command
        if self.command == "bounds":
            BoundParams(self.Ds, self.Db)
        for pb in grid_values(self.p_bulk, "p_bulk"):
            for ps in self.seam_values(pb):
                NoiseParams(pb, ps)
        if self.command in ("simulate", "sweep") and self.seams == 2:
            for L in self.sizes():
                for h in self.h:
                    LatticeSpec.with_default_seams(L, 0, 2, h)
        if self.command == "two-seam":
            for h in self.h:
                if h >= min(self.Ls):
                    raise ValidationError("h", f"h={h} must be below every L (min L = {min(self.Ls)})")
        return self

    def seam_values(self, p_bulk):
        if self.ratio_lock is not None:
            return [self.ratio_lock * p_bulk]
        return grid_values(self.p_seam, "p_seam")

    def sizes(self):
        return [self.L] if self.command == "simulate" else self.Ls

    def to_dict(self):
        return dataclasses.asdict(self)

    def dumps(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValidationError(unknown[0], "unknown configuration key")
        return cls(**data)


def _config_keys():
    return {f.name for f in dataclasses.fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as ValidationError."""

    def error(self, message):
        # name the flag when argparse tells us which one it was
        m = re.match(r"argument (?:-\w+/)?--([\w-]+)", message)
        raise ValidationError(m.group(1).replace("-", "_") if m else "argv", message)


def build_parser():
    parser = _Parser(prog="seamqec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="YAML file with RunConfig keys; flags override it")
        p.add_argument("--print-config", action="store_true", help="echo the resolved config and exit")
        p.add_argument("--output", "-o", help="artifact path (CSV or JSON)")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
        p.add_argument("--engine", choices=ENGINES)

    def lattice(p):
        p.add_argument("--L", type=int, help="code distance")
        p.add_argument("--rounds", type=int, help="noisy rounds T (default T = L)")
        p.add_argument("--seams", type=int, help="number of seams (0, 1 or 2)")
        p.add_argument("--h", help="seam separation(s), comma-separated")
        p.add_argument("--Ls", help="comma-separated distances")
        p.add_argument("--shots", type=int)

    def noise(p):
        p.add_argument("--p-bulk", dest="p_bulk", help="value or start:stop:count")
        p.add_argument("--p-seam", dest="p_seam", help="value or start:stop:count")
        p.add_argument("--ratio-lock", dest="ratio_lock", type=float, help="set p_seam = factor * p_bulk")

    p = sub.add_parser("bounds", help="evaluate the walk-counting bounds on a grid")
    common(p)
    p.add_argument("--Ds", type=int)
    p.add_argument("--Db", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--p-b", dest="p_b", help="edge rate p_b: value or start:stop:count")
    p.add_argument("--p-s", dest="p_s", help="edge rate p_s: value or start:stop:count")
    p.add_argument("--h", help="seam separation for the two-seam column")

    for name, text in (("simulate", "estimate one point"), ("sweep", "estimate a grid of points")):
        p = sub.add_parser(name, help=text)
        common(p)
        lattice(p)
        noise(p)

    p = sub.add_parser("threshold", help="sweep and fit a threshold")
    common(p)
    lattice(p)
    noise(p)
    p.add_argument("--mode", choices=sorted(MODES))

    p = sub.add_parser("frontier", help="threshold frontier in (p_bulk, p_seam)")
    common(p)
    lattice(p)
    noise(p)
    p.add_argument("--seam-slices", dest="seam_slices", help="fixed p_seam values for bulk fits")
    p.add_argument("--bulk-slices", dest="bulk_slices", help="fixed p_bulk values for seam fits")

    p = sub.add_parser("two-seam", help="seam threshold versus seam separation")
    common(p)
    lattice(p)
    noise(p)
    p.add_argument("--p-b-ratio", dest="p_b_ratio", type=float, help="p_b / p_b* (default 0.5)")
    p.add_argument("--p-bulk-star", dest="p_bulk_star", type=float, help="bulk threshold used for the ratio")

    p = sub.add_parser("oracle-verify", help="run the exact-oracle certification matrix")
    common(p)
    p.add_argument("--shots", type=int)
    return parser


def parse_and_validate(argv):
    """Parse ``argv`` into a validated :class:`RunConfig` and the namespace."""
    args = build_parser().parse_args(argv)
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ValidationError("config", str(exc)) from None
        except yaml.YAMLError as exc:
            raise ValidationError("config", f"unparsable YAML: {str(exc).splitlines()[0]}") from None
        if not isinstance(loaded, dict):
            raise ValidationError("config", "top level must be a mapping")
        data.update(loaded)
    keys = _config_keys()
    for k, v in vars(args).items():
        if k in keys and v is not None:
            data[k] = v
    data["command"] = args.command
    if data.get("workers") is None:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                data["workers"] = int(env)
            except ValueError:
                raise ValidationError("workers", f"${WORKERS_ENV}={env!r} is not an integer") from None
    if args.command == "two-seam" and "h" not in data:
        data["h"] = [2, 3]
    if args.command == "threshold" and "mode" in data and "p_bulk" not in data and "p_seam" not in data:
        raise ValidationError("grid", "threshold needs a --p-bulk or --p-seam grid")
    return RunConfig.from_dict(data), args


# ---------------------------------------------------------------------------
# execution


def _emit(config, text, suffix=None):
    from .experiments import write_atomic

    path = config.output
    if path and suffix:
        path = os.path.splitext(path)[0] + suffix
    if path:
        write_atomic(path, text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _rows_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _json(obj):
    def default(o):
        if isinstance(o, float) and not math.isfinite(o):
            return None
        if hasattr(o, "item"):
            return o.item()
        raise TypeError(type(o).__name__)

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def _progress(done, total):
    log.info("point %d/%d done", done, total)


def _spec(config, L):
    rounds = L if config.rounds is None else config.rounds
    h = config.h[0] if config.seams == 2 else None
    return LatticeSpec.with_default_seams(L, rounds, config.seams, h)


def run_bounds(config):
    params = BoundParams(config.Ds, config.Db)
    h = config.h[0]
    rows = [
        bound_row(pb, ps, config.L, params, h=h)
        for pb in grid_values(config.p_b, "p_b")
        for ps in grid_values(config.p_s, "p_s")
    ]
    _emit(config, _rows_csv(BOUND_COLUMNS, rows))
    return EXIT_OK


def _points(config):
    from .experiments import SweepPoint

    pts = []
    for L in config.sizes():
        spec = _spec(config, L)
        for pb in grid_values(config.p_bulk, "p_bulk"):
            for ps in config.seam_values(pb):
                pts.append(SweepPoint(spec, NoiseParams(pb, ps)))
    return pts


def run_simulate(config):
    from .experiments import estimate, to_csv

    pts = _points(config)
    if len(pts) != 1:
        raise ValidationError("grid", "simulate takes single values; use sweep for grids")
    est = estimate(pts[0].spec, pts[0].params, config.shots, config.seed, engine=config.engine, workers=config.workers)
    _emit(config, to_csv([est]))
    return EXIT_OK


def run_sweep(config):
    from .experiments import from_csv, sweep, to_csv

    existing = {}
    if config.output and os.path.exists(config.output):
        with open(config.output) as fh:
            existing = {e.fingerprint: e for e in from_csv(fh.read())}
        log.info("resuming: %d points already on disk", len(existing))
    table = sweep(_points(config), config.shots, config.seed, engine=config.engine, workers=config.workers,
                  existing=existing, progress=_progress)
    _emit(config, to_csv(table))
    return EXIT_OK


def run_threshold(config):
    from .experiments import sweep, to_csv
    from .threshold import fit_threshold

    table = sweep(_points(config), config.shots, config.seed, engine=config.engine, workers=config.workers,
                  progress=_progress)
    if config.output:
        _emit(config, to_csv(table), suffix=".csv")
    fit = fit_threshold(table, config.mode)
    _emit(config, fit.to_json())
    return EXIT_OK


def run_frontier(config):
    from .campaigns import BULK_WINDOW, SEAM_WINDOW, is_monotone_nonincreasing, threshold_frontier

    bulk = parse_grid(config.p_bulk, "p_bulk")
    seam = parse_grid(config.p_seam, "p_seam")
    bulk_window = (bulk[0], bulk[1]) if bulk[2] > 1 else BULK_WINDOW
    seam_window = (seam[0], seam[1]) if seam[2] > 1 else SEAM_WINDOW
    count = max(bulk[2], seam[2], 5)
    fr = threshold_frontier(config.Ls, config.shots, config.seed, seam_slices=config.seam_slices,
                            bulk_slices=config.bulk_slices, count=count, bulk_window=bulk_window,
                            seam_window=seam_window, engine=config.engine, workers=config.workers,
                            progress=lambda pt: log.info("frontier point %s", pt))
    monotone, _ = is_monotone_nonincreasing(fr.points)
    rigorous = BoundParams()
    curve_x = [fr.p_bulk_star * i / 40 for i in range(40)]
    out = {
        "p_bulk_star": fr.p_bulk_star,
        "p_seam_star": fr.p_seam_star,
        "alpha_c_bounding": fr.alpha_c_bounding,
        "alpha_c_lsq": fr.alpha_c_lsq,
        "monotone": monotone,
        "points": fr.rows(),
        "omitted": fr.omitted,
        "curve": [
            {
                "p_bulk": pb,
                "relaxed": rel,
                "rigorous": _safe_sag(4.0 * pb, rigorous),
            }
            for pb, rel in zip(curve_x, fr.curve(curve_x))
        ],
    }
    _emit(config, _json(out))
    return EXIT_OK


def _safe_sag(p_b, params):
    from .bounds import DivergentSeriesError, sag_single_seam

    try:
        return sag_single_seam(p_b, params)
    except DivergentSeriesError:
        return 0.0


def run_two_seam(config):
    from .campaigns import two_seam_experiment

    seam = parse_grid(config.p_seam, "p_seam")
    kwargs = {"window": (seam[0], seam[1]), "count": seam[2]} if seam[2] > 1 else {}
    res = two_seam_experiment(config.h, config.Ls, config.shots, config.seed, p_b_ratio=config.p_b_ratio,
                              p_bulk_star=config.p_bulk_star, engine=config.engine, workers=config.workers,
                              progress=lambda row: log.info("h=%d p_c=%.5f", row["h"], row["p_c"]), **kwargs)
    hs = [r["h"] for r in res.rows]
    out = {
        "p_bulk": res.p_bulk,
        "p_b_star": res.p_b_star,
        "single_seam": res.single,
        "alpha_2c": res.alpha_2c,
        "nondecreasing": res.is_nondecreasing(),
        "rows": [dict(r, bound=b) for r, b in zip(res.rows, res.curve(hs) if hs else [])],
        "omitted": res.omitted,
    }
    _emit(config, _json(out))
    return EXIT_OK


def run_oracle_verify(config):
    from .certification import run_certification, summary

    results = run_certification(shots=config.shots, seed=config.seed, engine=config.engine)
    report = "".join(r.line() + "\n" for r in results) + summary(results) + "\n"
    _emit(config, report)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED


RUNNERS = {
    "bounds": run_bounds,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "threshold": run_threshold,
    "frontier": run_frontier,
    "two-seam": run_two_seam,
    "oracle-verify": run_oracle_verify,
}


def execute(config):
    return RUNNERS[config.command](config)


def _reason(kind, exc):
    field_name = getattr(exc, "field", "")
    message = getattr(exc, "message", str(exc))
    return f"error={kind} field={field_name} reason={json.dumps(message)}"


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        config, args = parse_and_validate(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        if args.print_config:
            sys.stdout.write(config.dumps())
            return EXIT_OK
        return execute(config)
    except NoCrossingError as exc:
        print(_reason("no-crossing", exc), file=sys.stderr)
        return EXIT_NO_CROSSING
    except BudgetExceededError as exc:
        print(_reason("budget-exceeded", exc), file=sys.stderr)
        return EXIT_BUDGET
    except ValidationError as exc:
        print(_reason("invalid", exc), file=sys.stderr)
        return EXIT_INVALID
    except (TypeError, ValueError) as exc:
        print(_reason("invalid", exc), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
