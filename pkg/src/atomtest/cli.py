"""Command-line entry point: ``atomtest {test,region,simulate}``.

Exit codes: 0 success, 2 input error, 3 statistical degeneracy, 64 usage
error (unknown option or method, incompatible flags).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .baselines import t_test, wilcoxon
from .empirical import semiparametric_lrt
from .errors import DegenerateError, InputError
from .inference import ci_beta_delta, ci_mu_delta, simultaneous_region
from .model import TrialData, observed_mask
from .parametric import PARAMETRIC, SEMIPARAMETRIC, parametric_lrt
from .simulate import METHODS, default_workers, power_study

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_USAGE = 64

_METHODS = {"lrt": PARAMETRIC, "splrt": SEMIPARAMETRIC}
NO_ATOM_WARNING = "warning: no atoms found; continuous-part test only is NOT substituted"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _level(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return v


def _int_list(text: str) -> list:
    try:
        out = [int(s) for s in text.replace(" ", "").split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("sample sizes must be positive integers")
    return out


def _str_list(text: str) -> list:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="atomtest", description="Two-part tests for outcomes with an atom.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(sp):
        sp.add_argument("--input", required=True, help="CSV with columns y, r and optional x1..xp")
        sp.add_argument("--atom", type=float, default=0.0, help="value coding an unobserved outcome")
        sp.add_argument("--atom-eps", type=float, default=0.0,
                        help="treat |y - atom| <= eps as unobserved (for lossy text input)")
        sp.add_argument("--level", type=_level, default=0.95, help="confidence level")
        sp.add_argument("--method", default="splrt", help="lrt (parametric) or splrt (semi-empirical)")

    t = sub.add_parser("test", help="joint two-part test with effect estimates")
    data_args(t)
    t.add_argument("--json", help="also write the report as JSON")
    t.add_argument("--covariates", type=_str_list, default=None,
                   help="comma-separated covariate columns (lrt only)")
    t.add_argument("--baselines", action="store_true",
                   help="append Welch t and Wilcoxon tests on the combined outcome")

    r = sub.add_parser("region", help="simultaneous confidence region on a grid")
    data_args(r)
    r.add_argument("--resolution", type=int, default=50, help="grid points per axis")
    r.add_argument("--out-csv", required=True)
    r.add_argument("--out-svg")

    s = sub.add_parser("simulate", help="Monte Carlo power study")
    s.add_argument("--scenarios", help="scenario config (default: bundled simulation setups)")
    s.add_argument("--n-grid", type=_int_list, default=[25, 50, 100, 150, 200, 250],
                   help="per-group sample sizes, comma-separated")
    s.add_argument("--reps", type=int, default=10_000)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--methods", type=_str_list, default=list(METHODS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="power table CSV")
    s.add_argument("--long-out", help="long-format plot file (default: <out stem>_long.csv)")
    s.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $ATOMTEST_WORKERS or 1)")
    return p


def _method(name: str) -> str:
    try:
        return _METHODS[name.lower()]
    except KeyError:
        raise UsageError(f"unknown method {name!r}; choose lrt or splrt") from None


def _load(args, covariates) -> TrialData:
    if args.atom_eps < 0:
        raise InputError("--atom-eps must be non-negative")
    data = io.read_trial_csv(args.input, args.atom, covariates)
    if args.atom_eps > 0:
        y = np.where(np.abs(data.y - data.atom) <= args.atom_eps, data.atom, data.y)
        data = TrialData(y, data.group, data.atom, data.covariates, data.covariate_names)
    return data


def cmd_test(args) -> int:
    method = _method(args.method)
    if args.covariates and method != PARAMETRIC:
        raise UsageError("--covariates is only supported with --method lrt")
    data = _load(args, args.covariates or [])
    if observed_mask(data).all():
        print(NO_ATOM_WARNING, file=sys.stderr)
    alpha = 1.0 - args.level
    use_cov = data.covariates is not None
    if method == PARAMETRIC:
        result = parametric_lrt(data, use_covariates=use_cov, alpha=alpha)
    else:
        result = semiparametric_lrt(data, alpha=alpha)
    ci_mu = ci_mu_delta(data, alpha, method, use_covariates=use_cov)
    _, ci_or = ci_beta_delta(data, alpha, use_covariates=use_cov and method == PARAMETRIC)
    baselines = None
    if args.baselines:
        y0, y1 = data.y[data.group == 0], data.y[data.group == 1]
        baselines = {"welch_t": t_test(y0, y1), "wilcoxon": wilcoxon(y0, y1)}
    doc = io.build_report(result, ci_mu, ci_or, args.level, data.atom, baselines)
    if use_cov:
        doc["covariates"] = list(data.covariate_names)
    sys.stdout.write(io.render_report(doc))
    if args.json:
        io.write_json(doc, args.json)
    return EXIT_OK


def cmd_region(args) -> int:
    method = _method(args.method)
    if args.resolution < 10:
        raise UsageError("--resolution must be at least 10")
    data = _load(args, [])
    region = simultaneous_region(data, 1.0 - args.level, args.resolution, method)
    io.write_region_csv(region, args.out_csv)
    if args.out_svg:
        Path(args.out_svg).write_text(io.region_svg(region))
    inside = int(region.membership.sum())
    print(f"wrote {region.membership.size} grid points ({inside} inside the region) to {args.out_csv}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    specs = io.load_scenarios(args.scenarios)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise UsageError("--workers must be at least 1")
    unknown = [m for m in args.methods if m not in METHODS]
    if unknown:
        raise UsageError(f"unknown methods {unknown}; choose from {list(METHODS)}")
    table = power_study(specs, args.n_grid, args.reps, args.alpha, args.methods, args.seed, workers)
    io.write_power_csv(table, args.out)
    out = Path(args.out)
    long_out = args.long_out or str(out.with_name(out.stem + "_long.csv"))
    io.write_power_long(table, long_out)
    print(f"wrote {len(table.rows)} rows to {args.out} and {long_out}")
    return EXIT_OK


_COMMANDS = {"test": cmd_test, "region": cmd_region, "simulate": cmd_simulate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"atomtest: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"atomtest: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateError as exc:
        print(f"atomtest: degenerate data ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
