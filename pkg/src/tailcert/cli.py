"""Command line interface: ``tailcert <command> ...``.

Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration or I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import density, polycert, rademacher, spheresim, suite
from .suite import ConfigError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------- output


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = f"{x:.17g}"
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits and non-finite floats as null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [inner + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _grid(text: str) -> list[float]:
    if not text.strip():
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc


# ---------------------------------------------------------------- commands


def cmd_verify(args) -> int:
    cfg = suite.RunConfig(samples=args.samples, only=tuple(args.only or ()), workers=args.workers)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.random_configs is not None:
        cfg.random_configs = args.random_configs
    report = suite.run(cfg)
    _emit(dumps(report) + "\n", args.output)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_certify(args) -> int:
    rep = polycert.certify_logconcavity()
    _emit(dumps(rep.as_records()) + "\n", args.output)
    return EXIT_OK if rep.overall else EXIT_FAIL


def _load_weights(args) -> tuple[rademacher.WeightConfig, object, bool]:
    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                spec = json.load(fh, parse_float=Fraction)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.input}: {exc}") from exc
    else:
        spec = {}
    vectors = spec.get("vectors")
    if args.vectors is not None:
        vectors = json.loads(args.vectors, parse_float=Fraction)
    if vectors is None:
        raise ConfigError("no vectors given (use --vectors or --input)")
    t = spec.get("t") if args.t is None else Fraction(args.t)
    if t is None:
        raise ConfigError("no threshold given (use --t or a 't' field)")
    strict = bool(spec.get("strict", False)) or args.strict
    if all(isinstance(v, (int, Fraction)) for v in vectors):
        w = rademacher.WeightConfig.from_real(vectors)
    else:
        w = rademacher.WeightConfig(tuple(tuple(v) for v in vectors))
    return w, t, strict


def cmd_enumerate(args) -> int:
    try:
        w, t, strict = _load_weights(args)
        if t < 0:
            raise ConfigError("threshold must be nonnegative")
        count = rademacher.tail_count(w, t, strict, ties=args.ties, workers=args.workers)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    except MemoryError as exc:
        raise ConfigError(str(exc)) from exc
    out = {
        "n": w.n,
        "d": w.d,
        "t": str(t) if isinstance(t, Fraction) else t,
        "strict": strict,
        "hits": count.hits,
        "total": count.total,
        "probability": str(count.probability),
        "probability_float": float(count.probability),
        "exact": count.exact,
        "near_boundary": count.near_boundary,
    }
    _emit(dumps(out) + "\n", args.output)
    return EXIT_OK


def cmd_density(args) -> int:
    m = density.DensityModel(args.lam)
    ts = _grid(args.grid) if args.grid is not None else list(np.linspace(args.t_min, args.t_max, args.points))
    rows = []
    for t in ts:
        f = density.density_f(m, t).value
        h = density.tail_h(m, t).value
        rows.append((float(t), f, h, f / h if h > 0 else math.inf))
    _emit(_csv(["t", "f", "h", "a"], rows), args.output)
    return EXIT_OK


def _matrices_from_file(path: str) -> spheresim.MatrixCoefficients:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    mats = np.asarray(data["matrices"] if isinstance(data, dict) else data, dtype=float)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ConfigError(f"matrices must have shape (n, d, d), got {mats.shape}")
    return spheresim.MatrixCoefficients(mats)


def cmd_simulate(args) -> int:
    if args.samples < suite.MIN_SAMPLES:
        raise ConfigError(f"--samples must be >= {suite.MIN_SAMPLES}")
    seed = suite.default_seed() if args.seed is None else args.seed
    if args.matrices:
        mc = _matrices_from_file(args.matrices)
    else:
        if args.family not in spheresim.FAMILIES:
            raise ConfigError(f"unknown family {args.family!r}; known: {', '.join(sorted(spheresim.FAMILIES))}")
        if args.d < 1 or args.n < 1:
            raise ConfigError("--d and --n must be positive")
        mc = spheresim.EnsembleConfig(args.family, args.d, args.n, seed).build()
    est = spheresim.estimate_exceed(mc, None, args.convention, args.samples, seed, args.workers)
    rec = est.as_dict()
    if args.out == "csv":
        header = ["p_hat", "hits", "samples", "ci_low", "ci_high", "seed", "mu", "convention"]
        _emit(_csv(header, [(est.p_hat, est.hits, est.samples, est.ci_low, est.ci_high, est.seed,
                             est.mu, est.convention)]), args.output)
    else:
        _emit(dumps(rec) + "\n", args.output)
    if args.convention == spheresim.GE:
        rep = spheresim.lower_bound_report(est)
    else:
        rep = spheresim.upper_bound_report(est)
    return EXIT_OK if rep.passed else EXIT_FAIL


DEFAULT_RATIO_GRID = "0.5,1,1.2,1.4142135623730951,1.6,2,2.5,3"


def cmd_report(args) -> int:
    if args.kind == "ratio":
        coeffs = json.loads(args.vectors, parse_float=Fraction)
        w = (rademacher.WeightConfig.from_real(coeffs) if all(isinstance(v, (int, Fraction)) for v in coeffs)
             else rademacher.WeightConfig(tuple(tuple(v) for v in coeffs)))
        spec = rademacher.gram_spectrum(w)
        rows = []
        for x in _grid(args.grid if args.grid is not None else DEFAULT_RATIO_GRID):
            thr = x * w.sigma
            if w.is_rational:
                # grid points such as sqrt(2) are meant exactly: snap x^2 to a simple rational
                x_sq = Fraction(x * x)
                snap = x_sq.limit_denominator(1000)
                t_sq = (snap if abs(snap - x_sq) <= 1e-12 * x_sq else x_sq) * w.sigma_sq
                rad = float(rademacher.exact_tail(w, threshold_sq=t_sq))
            else:
                rad = float(rademacher.exact_tail(w, thr, ties="exceed"))
            comp = rademacher.rank2_comparator_tail(spec, thr).value
            rows.append((x, thr, rad, comp, rad / comp if comp > 0 else math.inf))
        text = _csv(["t_over_sigma", "threshold", "rademacher_tail", "gaussian_tail", "ratio"], rows)
    elif args.kind == "floor":
        lams = _grid(args.grid) if args.grid is not None else list(np.logspace(0, 6, 25))
        rows = [(lam, density.density_f(density.DensityModel(lam), 1.0).value, density.DENSITY_FLOOR)
                for lam in lams]
        text = _csv(["lambda", "f_at_one", "floor"], rows)
    else:  # cube-moment ratios
        lams = _grid(args.grid) if args.grid is not None else [1.0, 2.0, 10.0, 100.0]
        rows = []
        for lam in lams:
            m = density.DensityModel(lam)
            for t in (1.01, 1.5, 2.0, 3.0, 6.0):
                r = density.cube_moment_bound(m, t)
                rows.append((lam, t, r.u, r.hazard, r.ratio, r.c0))
        text = _csv(["lambda", "t", "u", "hazard", "ratio", "bound"], rows)
    _emit(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tailcert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")
        if seed:
            sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $TAILCERT_SEED or built-in)")

    v = sub.add_parser("verify", help="run the verification suite")
    common(v, seed=True)
    v.add_argument("--only", nargs="+", metavar="CHECK", help="check ids or group names")
    v.add_argument("--samples", type=int, default=50_000, help="Monte Carlo samples per estimate")
    v.add_argument("--random-configs", type=int, default=None)
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("certify", help="exact polynomial positivity certificate")
    common(c)
    c.set_defaults(func=cmd_certify)

    e = sub.add_parser("enumerate", help="exact Rademacher tail by enumeration")
    common(e)
    e.add_argument("--input", "-i", help="JSON file with vectors, t, strict")
    e.add_argument("--vectors", help="JSON list of reals or of vectors")
    e.add_argument("--t", type=str, default=None, help="threshold (decimal strings are exact)")
    e.add_argument("--strict", action="store_true")
    e.add_argument("--ties", choices=["exceed", "miss"], default=None)
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_enumerate)

    d = sub.add_parser("density", help="CSV of f, h and hazard for one lambda")
    common(d)
    d.add_argument("--lam", type=float, required=True)
    d.add_argument("--grid", help="comma-separated t values")
    d.add_argument("--t-min", type=float, default=0.0)
    d.add_argument("--t-max", type=float, default=5.0)
    d.add_argument("--points", type=int, default=51)
    d.set_defaults(func=cmd_density)

    s = sub.add_parser("simulate", help="Monte Carlo tail for sphere-weighted matrix sums")
    common(s, seed=True)
    s.add_argument("--family", default="gaussian")
    s.add_argument("--matrices", help="JSON file with an (n, d, d) array")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--convention", choices=[spheresim.GE, spheresim.GT], default=spheresim.GE)
    s.add_argument("--out", choices=["json", "csv"], default="json")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="CSV tables: ratio, floor or cube")
    common(r)
    r.add_argument("--kind", choices=["ratio", "floor", "cube"], default="ratio")
    r.add_argument("--vectors", default="[1, 1]", help="weights for --kind ratio")
    r.add_argument("--grid", help="comma-separated grid; empty for header only")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"tailcert: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"tailcert: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError, rademacher.UnsupportedRank) as exc:
        print(f"tailcert: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
