"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 model error,
3 estimation failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import continuum as cont
from . import report, theorems
from .errors import CollisionGapError, ConvergenceError, DomainError, EstimationError, ModelError
from .generator import build_generator, export_matrix_market
from .models import ModelSpec, Variant, load_spec
from .spectra import RESIDUAL_TOL, admissible_omegas, min_gap_over_omega, spectral_gap, variational_check

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_MODEL = 2
EXIT_ESTIMATE = 3
EXIT_USAGE = 64

SPEC_DIR = Path(__file__).parent / "specs"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("COLLISION_GAP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"COLLISION_GAP_THREADS={env!r} is not an integer") from None
    return 1


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)


def _parse_omegas(text: str | None):
    if not text:
        return None
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if ":" in tok:
            out.append(tuple(int(k) for k in tok.split(":")))
        else:
            out.append(int(tok))
    return out


def cmd_gap(args) -> int:
    spec = load_spec(args.spec)
    gen = build_generator(spec)
    rep = spectral_gap(gen, method=args.method, tol=args.tol or RESIDUAL_TOL)
    if args.format == "csv":
        rho = spec.density if spec.variant is not Variant.BIASED_PERMUTATIONS else None
        text = report.sweep_csv([(spec.omega, rho, rep.gap, rep.method, rep.tolerance)])
    else:
        text = report.dumps({"spec": spec.to_dict(), **rep.to_dict()})
    _write(text, args.out)
    print(report.format_float(rep.gap))
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_spec(args.spec)
    omegas = _parse_omegas(args.omegas)
    if omegas is None:
        omegas = admissible_omegas(spec)
    if not omegas:
        raise DomainError("empty sweep")
    res = min_gap_over_omega(spec, omegas, method=args.method, threads=_threads(args.threads))
    rows = []
    for om, rep in zip(res.omegas, res.reports):
        rho = spec.with_omega(om).density if spec.variant is not Variant.BIASED_PERMUTATIONS else None
        rows.append((om, rho, rep.gap, rep.method, rep.tolerance))
    rows.append(("min", None, res.minimum, "", None))
    if args.format == "json":
        text = report.dumps({"spec": spec.to_dict(), **res.to_dict()})
    else:
        text = report.sweep_csv(rows)
    if args.out:
        _write(text, args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mc(args) -> int:
    spec = load_spec(args.spec)
    if spec.variant.finite:
        raise ModelError("Monte Carlo runs on KacSphere or FlatKac specs")
    trajs = cont.run_chains(spec, args.steps, args.chains, seed=args.seed, threads=_threads(args.threads))
    series = [t.on_grid(args.dt) for t in trajs]
    window = (args.lag_min, args.lag_max) if args.lag_max else None
    est = cont.relaxation_rate_estimate(series, args.dt, window=window, batches_per_series=args.batches)
    n = spec.n
    expected = (n + 2) / (4 * n) if spec.variant is Variant.KAC_SPHERE else None
    out = {
        "spec": spec.to_dict(),
        "seed": args.seed,
        "events_per_chain": args.steps,
        "chains": args.chains,
        "dt": args.dt,
        **est.to_dict(),
        "expected_rate": expected,
        "chain_diagnostics": [
            {"seed": t.seed, "duration": t.duration, "max_constraint_drift": t.max_drift, "noop_events": t.noops}
            for t in trajs
        ],
    }
    text = report.dumps(out)
    if args.trajectory_csv:
        t = trajs[0]
        grid = np.arange(len(series[0])) * args.dt
        stride = max(1, args.thin)
        lines = ["time,observable"] + [
            f"{report.format_float(a)},{report.format_float(b)}" for a, b in zip(grid[::stride], series[0][::stride])
        ]
        Path(args.trajectory_csv).write_text("\n".join(lines) + "\n")
    if args.out:
        _write(text, args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _spec_reports(spec: ModelSpec) -> list:
    if spec.variant is Variant.KAC_SPHERE:
        return theorems.check_kac()
    if spec.variant is Variant.FLAT_KAC:
        return theorems.check_flat_kac()
    reports = []
    if spec.variant is not Variant.COLORED_EXCLUSION or spec.gamma == 1:
        reports += theorems.verify_reduction_theorem(spec, range(3, spec.n + 1))
    gen = build_generator(spec)
    rep = spectral_gap(gen)
    rng = np.random.default_rng(0)
    vr = variational_check(gen, rep.gap, rng.standard_normal((100, gen.size)))
    reports.append(theorems.BoundReport("variational-square", 0.0, vr.worst_square_margin, "lower", 1e-10))
    reports.append(theorems.BoundReport("variational-rayleigh", 0.0, vr.worst_rayleigh_margin, "lower", 1e-10))
    return reports


def cmd_verify(args) -> int:
    only = [x for tok in (args.only or []) for x in tok.split(",") if x]
    lambda3 = None
    if args.lambda3 is not None:
        lambda3 = Fraction(args.lambda3).limit_denominator(10**12)
    groups = {}
    if args.spec:
        for path in args.spec:
            groups[f"spec:{Path(path).name}"] = _spec_reports(load_spec(path))
    if not args.spec or only:
        groups.update(theorems.run_suite(only or None, seed=args.seed, lambda3=lambda3, threads=_threads(args.threads)))
    if args.tol is not None:
        for reps in groups.values():
            for r in reps:
                if r.tol == theorems.MARGIN:
                    r.tol = args.tol
    failures = [(g, r) for g, reps in groups.items() for r in reps if not r.passed]
    summary = []
    for g, reps in groups.items():
        bad = sum(not r.passed for r in reps)
        worst = min((r.margin for r in reps if r.asserted), default=0.0)
        summary.append((g, len(reps), bad, report.format_float(float(worst))))
    sys.stdout.write(report.table(summary, ["group", "checks", "failed", "worst margin"]))
    payload = {
        "seed": args.seed,
        "passed": not failures,
        "groups": {g: [r.to_dict() for r in reps] for g, reps in groups.items()},
    }
    _write(report.dumps(payload), args.out)
    if failures:
        sys.stderr.write(f"{len(failures)} check(s) failed:\n")
        for g, r in failures[:50]:
            sys.stderr.write(f"  [{g}] {r.name} inputs={r.inputs} bound={r.bound} measured={r.measured}\n")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_export(args) -> int:
    spec = load_spec(args.spec)
    gen = build_generator(spec)
    mtx, side = export_matrix_market(gen, args.out)
    print(mtx)
    print(side)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="collision-gap", description="Spectral gaps of binary collision processes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, spec_required=True):
        if spec_required:
            p.add_argument("--spec", required=True, help="model-spec JSON file")
        p.add_argument("--out", help="output path")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("gap", help="spectral gap of one model")
    common(p)
    p.add_argument("--method", choices=["auto", "dense", "iterative"], default="auto")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("sweep", help="gap for each conservation value and the minimum")
    common(p)
    p.add_argument("--omegas", help="comma-separated values; colored counts as k1:k2:...")
    p.add_argument("--method", choices=["auto", "dense", "iterative"], default="auto")
    p.set_defaults(func=cmd_sweep, format="csv")

    p = sub.add_parser("mc", help="Monte Carlo relaxation-rate estimate")
    common(p)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--chains", type=int, default=8)
    p.add_argument("--dt", type=float, default=0.25)
    p.add_argument("--batches", type=int, default=10, help="batches per chain")
    p.add_argument("--lag-min", type=float, default=0.25)
    p.add_argument("--lag-max", type=float, default=None)
    p.add_argument("--trajectory-csv", help="write the first chain's sampled observable here")
    p.add_argument("--thin", type=int, default=1)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify", help="run the bound verification suite")
    p.add_argument("--spec", action="append", help="also verify this model-spec file (repeatable)")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--only", action="append", help=f"run only these groups: {', '.join(theorems.SUITE)}")
    p.add_argument("--lambda3", type=float, default=None, help="override the three-site gap in reduction checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="write the generator as MatrixMarket plus a measure JSON file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (EstimationError, ConvergenceError) as exc:
        sys.stderr.write(f"estimation error: {exc}\n")
        return EXIT_ESTIMATE
    except CollisionGapError as exc:
        sys.stderr.write(f"model error: {exc}\n")
        return EXIT_MODEL
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
