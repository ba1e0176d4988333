"""Command-line harness: one dataset per figure panel, plus the invariant suites.

Every dataset is written as CSV (default) or JSON into ``--out`` (or
``$IMMACULATE_OUT``, or the working directory). CSV files start with
``#``-prefixed lines echoing the full configuration, then a header row.
Floats are written with ``repr`` so identical configs give identical bytes.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import RegimeError, UndefinedPhaseError
from .gaussian import GaussianAmpSpec, fidelity_mu, success_bound_mu
from .kraus import (
    AmplifierSpec,
    amplify_coherent,
    apply_cutoff,
    fidelity_extended,
    fidelity_restricted,
    success_prob_extended,
    success_prob_restricted,
)
from .quasidist import antinormal_variances, number_snr, q_distribution, quadrature_snr
from .usd import (
    SymmetricEnsemble,
    a_epsilon_samples,
    a_of_epsilon,
    amplifier_usd_bound,
    chernoff_remainder,
    dense_dense_bound,
    dense_sparse_bound,
    disk_bound,
    exact_remainder,
    fit_a_epsilon,
    helstrom_two,
    usd_success,
    usd_success_dense,
    usd_success_sparse,
    usd_two,
)
from .verify import SUITES, run_suites

ENV_OUT = "IMMACULATE_OUT"
EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 1, 2, 3
DEFAULT_EPS = tuple(float(x) for x in np.logspace(math.log10(0.5), -5, 10))
DEFAULT_FIG3_M = tuple(range(2, 41, 2))
DIVERGENCE_EPS = (0.6, 0.7, 0.8, 0.9, 0.95)


class UsageError(Exception):
    pass


@dataclass
class Dataset:
    name: str
    columns: list[str]
    rows: list[list]


# ---------------------------------------------------------------------------
# argument types


def real(text: str) -> float:
    """A float, also accepting ``sqrt(x)`` for gains like sqrt 2."""
    m = re.fullmatch(r"\s*sqrt\((.+)\)\s*", text)
    try:
        return math.sqrt(float(m.group(1))) if m else float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def real_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return [real(t) for t in items]


def int_range(text: str) -> list[int]:
    """``a..b``, ``a..b:step`` or a comma list."""
    m = re.fullmatch(r"\s*(-?\d+)\.\.(-?\d+)(?::(\d+))?\s*", text)
    try:
        if m:
            lo, hi, step = int(m.group(1)), int(m.group(2)), int(m.group(3) or 1)
            if step < 1:
                raise argparse.ArgumentTypeError("range step must be >= 1")
            out = list(range(lo, hi + 1, step))
        else:
            out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer range: {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty range: {text!r}")
    return out


def sweep(text: str) -> tuple[float, float, int]:
    """``min,max,steps`` with ``min < max`` and ``steps >= 2``."""
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected min,max,steps")
    lo, hi = real(parts[0]), real(parts[1])
    try:
        steps = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"steps must be an integer: {parts[2]!r}") from None
    if steps < 2:
        raise argparse.ArgumentTypeError("a sweep needs at least 2 steps")
    if not 0.0 <= lo < hi:
        raise argparse.ArgumentTypeError("need 0 <= min < max")
    return lo, hi, steps


# ---------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _json_cell(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def render(ds: Dataset, fmt: str, subcommand: str, config: dict) -> str:
    if fmt == "json":
        doc = {
            "dataset": ds.name,
            "subcommand": subcommand,
            "version": __version__,
            "config": config,
            "columns": ds.columns,
            "rows": [[_json_cell(v) for v in row] for row in ds.rows],
        }
        return json.dumps(doc, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# immaculate {__version__} {subcommand} dataset={ds.name}\n")
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ds.columns)
    for row in ds.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_all(datasets: list[Dataset], args, config: dict) -> list[Path]:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for ds in datasets:
        path = out / f"{ds.name}.{args.format}"
        path.write_text(render(ds, args.format, args.command, config))
        paths.append(path)
    return paths


def config_of(args) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "out"):
            continue
        if isinstance(v, tuple):
            v = list(v)
        cfg[k] = v
    return cfg


# ---------------------------------------------------------------------------
# figure builders


def _alphas(args) -> np.ndarray:
    lo, hi, steps = args.alpha if args.alpha is not None else (0.0, 1.5 * math.sqrt(args.N), 121)
    return np.linspace(lo, hi, steps)


def _spec(args) -> AmplifierSpec:
    if not args.g > 1.0:
        raise UsageError(f"--g must exceed 1, got {args.g}")
    if args.N < 0:
        raise UsageError("--N must be nonnegative")
    return AmplifierSpec(args.g, args.N)


def _check_cutoff(args, spec: AmplifierSpec, abars) -> None:
    if args.cutoff is None:
        return
    need = max(max(apply_cutoff(spec, float(a)), spec.N + spec.k + 1) for a in abars)
    if args.cutoff < need:
        raise UsageError(f"--cutoff {args.cutoff} is below the automatic cutoff {need}")


def fig3(args) -> list[Dataset]:
    eps = sorted(args.eps)
    fit = fit_a_epsilon(eps, args.M, mode="numeric", aggregate=args.aggregate)
    beyond, _, beyond_fail = a_epsilon_samples(DIVERGENCE_EPS, args.M, aggregate=args.aggregate)
    curve = []
    for e, a in sorted(fit.samples + beyond):
        an = a_of_epsilon(e, "analytic")
        curve.append([e, math.log(e), a, an, (an - a) / a, fit.slope * math.log(e) + fit.intercept, e <= 0.5])
    table = [[e, M, a] for (e, M), a in sorted(fit.table.items())]
    summary = [[fit.slope, fit.intercept, fit.residual_rms, len(fit.samples), len(fit.failures) + len(beyond_fail)]]
    return [
        Dataset("fig3_curve", ["eps", "ln_eps", "a_numeric", "a_analytic", "rel_dev", "a_fit", "in_fit_range"], curve),
        Dataset("fig3_table", ["eps", "M", "a_numeric"], table),
        Dataset("fig3_fit", ["slope", "intercept", "residual_rms", "n_eps", "n_failures"], summary),
    ]


def _fig4_row(abar: float, M: int) -> list:
    e = SymmetricEnsemble(abar, M)
    exact = usd_success(e).success
    dense = usd_success_dense(e) if M >= 2 else math.nan
    sparse = usd_success_sparse(e) if abar > 0 else math.nan
    return [exact, dense, sparse]


def fig4(args) -> list[Dataset]:
    if any(m < 2 for m in args.M + args.fixed_M):
        raise UsageError("M values must be >= 2")
    if any(a < 0 for a in args.alpha2):
        raise UsageError("alpha2 values must be nonnegative")
    vs_m = [[M, a2, *_fig4_row(math.sqrt(a2), M)] for a2 in sorted(args.alpha2) for M in sorted(args.M)]
    lo, hi, steps = args.alpha2_range
    vs_a = [
        [M, float(a2), *_fig4_row(math.sqrt(a2), M)]
        for M in sorted(args.fixed_M)
        for a2 in np.linspace(lo, hi, steps)
    ]
    cols = ["M", "alpha2", "exact", "dense_approx", "sparse_approx"]
    return [Dataset("fig4_vs_M", cols, vs_m), Dataset("fig4_vs_alpha2", cols, vs_a)]


def fig5(args) -> list[Dataset]:
    spec = _spec(args)
    if any(k < 0 for k in args.k):
        raise UsageError("k values must be nonnegative")
    rows = []
    for k in sorted(set(args.k)):
        s = spec.with_k(k)
        for a in _alphas(args):
            a = float(a)
            rows.append([k, a, success_prob_extended(s, a), fidelity_extended(s, a)])
    return [Dataset("fig5", ["k", "alpha", "p", "F"], rows)]


def fig6(args) -> list[Dataset]:
    spec = _spec(args)
    rows = []
    for a in _alphas(args):
        a = float(a)
        p0, F0 = success_prob_extended(spec, a), fidelity_extended(spec, a)
        rows.append(
            [
                a,
                F0,
                p0,
                fidelity_restricted(spec, a),
                success_prob_restricted(spec, a),
                p0 * F0,
                math.exp(-(((spec.gain - 1.0) * a) ** 2)),
            ]
        )
    cols = ["alpha", "F0_ext", "p0_ext", "F_restricted", "p_restricted", "pfp", "do_nothing"]
    return [Dataset("fig6", cols, rows)]


def fig7(args) -> list[Dataset]:
    spec = _spec(args)
    if any(a < 0 for a in args.alphas):
        raise UsageError("amplitudes must be nonnegative")
    if args.points < 3:
        raise UsageError("--points must be >= 3")
    _check_cutoff(args, spec, args.alphas)
    out, summary = [], []
    for a in sorted(args.alphas):
        state = amplify_coherent(spec, a, cutoff=args.cutoff).out
        grid = q_distribution(state, half_width=args.half_width, points=args.points)
        rows = [
            [float(x), float(y), float(grid.values[i, j])]
            for i, y in enumerate(grid.im_axis)
            for j, x in enumerate(grid.re_axis)
        ]
        out.append(Dataset(f"fig7_alpha{a:g}", ["re", "im", "Q"], rows))
        peak, height = grid.peak()
        try:
            var1, var2 = antinormal_variances(state)
        except UndefinedPhaseError:
            var1 = var2 = math.nan
        summary.append([a, peak.real, peak.imag, height, grid.mass, var1, var2])
    out.append(
        Dataset("fig7_summary", ["alpha", "peak_re", "peak_im", "peak_height", "mass", "var_radial", "var_phase"], summary)
    )
    return out


def fig8(args) -> list[Dataset]:
    spec = _spec(args)
    alphas = _alphas(args)
    _check_cutoff(args, spec, alphas)
    rows = []
    for a in alphas:
        a = float(a)
        res = amplify_coherent(spec, a, cutoff=args.cutoff)
        if a == 0.0:
            s1 = s2 = 0.0  # zero signal in every frame
        else:
            s1, s2 = quadrature_snr(res.out)
        rp = math.sqrt(res.prob)
        rows.append([a, math.sqrt(2.0) * a, math.sqrt(2.0) * spec.gain * a, s1, s2, rp * s1, rp * s2, res.prob])
    cols = ["alpha", "snr_in", "snr_target", "snr1", "snr2", "root_p_snr1", "root_p_snr2", "p"]
    return [Dataset("fig8", cols, rows)]


def fig9(args) -> list[Dataset]:
    spec = _spec(args)
    alphas = _alphas(args)
    _check_cutoff(args, spec, alphas)
    rows = []
    for a in alphas:
        a = float(a)
        res = amplify_coherent(spec, a, cutoff=args.cutoff)
        sn = number_snr(res.out)
        rows.append([a, a, spec.gain * a, sn, math.sqrt(res.prob) * sn])
    return [Dataset("fig9", ["alpha", "snrN_in", "snrN_target", "snrN_out", "root_p_snrN"], rows)]


def usd_table(args) -> list[Dataset]:
    if any(m < 2 for m in args.M):
        raise UsageError("M values must be >= 2")
    rows = []
    for a in sorted(args.alphas):
        if a < 0:
            raise UsageError("amplitudes must be nonnegative")
        for M in sorted(args.M):
            e = SymmetricEnsemble(a, M)
            sp = usd_success(e)
            sparse = usd_success_sparse(e) if a > 0 else math.nan
            theta = usd_success_sparse(e, "theta") if a > 0 else math.nan
            try:
                cher = chernoff_remainder(e)
            except RegimeError:
                cher = math.nan
            rows.append(
                [a, M, sp.success, sp.argmin_r, usd_success_dense(e), sparse, theta, exact_remainder(e), cher]
            )
    cols = [
        "alpha", "M", "success", "argmin_r", "dense_approx", "sparse_leading", "sparse_theta",
        "dense_remainder", "chernoff_remainder",
    ]
    return [Dataset("usd_table", cols, rows)]


def bounds(args) -> list[Dataset]:
    gains = sorted(args.gains)
    if any(not g > 1.0 for g in gains):
        raise UsageError("gains must exceed 1")
    mu = []
    for g in gains:
        for mu2 in np.linspace(0.0, 1.0, 11):
            s = GaussianAmpSpec(g, float(mu2))
            P, F = success_bound_mu(s), fidelity_mu(s)
            mu.append([g, float(mu2), F, P, P * F, s.physical])
    two = []
    for g in gains:
        for d in np.linspace(0.0, 3.0, 31):
            h, u = helstrom_two(0j, float(d), g), usd_two(0j, float(d), g)
            two.append([g, float(d), h.p_before, h.p_after, h.bound, u.p_before, u.p_after, u.bound])
    usd_rows = []
    for g in gains:
        for M in sorted(args.M):
            if M < 2:
                raise UsageError("M values must be >= 2")
            for a in sorted(args.alphas):
                e = SymmetricEnsemble(a, M)
                usd_rows.append(
                    [g, M, a, amplifier_usd_bound(e, g), dense_dense_bound(e, g), dense_sparse_bound(e), disk_bound(M, g)]
                )
    return [
        Dataset("bounds_mu", ["g", "mu2", "fidelity", "success_bound", "pfp", "physical"], mu),
        Dataset(
            "bounds_two_state",
            ["g", "separation", "helstrom_before", "helstrom_after", "helstrom_bound", "usd_before", "usd_after", "usd_bound"],
            two,
        ),
        Dataset("bounds_usd", ["g", "M", "alpha", "usd_ratio", "dense_dense", "dense_sparse", "disk"], usd_rows),
    ]


def verify(args) -> int:
    results = run_suites(args.suite)
    report = {
        "ok": all(r.ok for r in results),
        "suites": [r.as_dict() for r in results],
        "version": __version__,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "verify_report.json"
    path.write_text(json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n")
    for r in results:
        print(f"{r.name:10s} {'ok' if r.ok else 'FAIL':4s} checks={r.checks} violations={len(r.violations)}")
    print(path)
    return 0 if report["ok"] else EXIT_VERIFY


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out",
        default=os.environ.get(ENV_OUT, "."),
        help=f"output directory (default: ${ENV_OUT} or the working directory)",
    )
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    amp = argparse.ArgumentParser(add_help=False)
    amp.add_argument("--g", type=real, default=3.0, help="amplitude gain, e.g. 3 or 'sqrt(2)'")
    amp.add_argument("--N", type=int, default=9, help="disk size: amplifies |alpha| < sqrt(N)/g")
    amp.add_argument("--alpha", type=sweep, default=None, help="min,max,steps (default 0,1.5*sqrt(N),121)")

    fock = argparse.ArgumentParser(add_help=False)
    fock.add_argument("--cutoff", type=int, default=None, help="Fock cutoff; may only raise the automatic one")

    p = argparse.ArgumentParser(prog="immaculate", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fig3", parents=[common], help="a(eps) = abar^2/M^2 at P = 1 - eps, and its log fit")
    s.add_argument("--eps", type=real_list, default=list(DEFAULT_EPS))
    s.add_argument("--M", type=int_range, default=list(DEFAULT_FIG3_M))
    s.add_argument("--aggregate", choices=("median", "mean"), default="median")
    s.set_defaults(func=fig3)

    s = sub.add_parser("fig4", parents=[common], help="USD success probability vs M and vs abar^2")
    s.add_argument("--M", type=int_range, default=list(range(2, 13)))
    s.add_argument("--alpha2", type=real_list, default=[0.5, 1.0, 2.0, 4.0])
    s.add_argument("--fixed-M", type=int_range, default=[4, 8, 16])
    s.add_argument("--alpha2-range", type=sweep, default=(0.0, 40.0, 201))
    s.set_defaults(func=fig4)

    s = sub.add_parser("fig5", parents=[common, amp], help="p_k and F_k of the extended operators")
    s.add_argument("--k", type=int_range, default=[0, 1, 2])
    s.set_defaults(func=fig5)

    s = sub.add_parser("fig6", parents=[common, amp], help="extended vs restricted k = 0 amplifier")
    s.set_defaults(func=fig6)

    s = sub.add_parser("fig7", parents=[common, amp, fock], help="Q distributions of amplifier outputs")
    s.add_argument("--alphas", type=real_list, default=[0.5, 1.5, 3.0, 5.0])
    s.add_argument("--points", type=int, default=201)
    s.add_argument("--half-width", type=float, default=None)
    s.set_defaults(func=fig7)

    s = sub.add_parser("fig8", parents=[common, amp, fock], help="antinormal quadrature SNRs")
    s.set_defaults(func=fig8)

    s = sub.add_parser("fig9", parents=[common, amp, fock], help="number-based SNR")
    s.set_defaults(func=fig9)

    s = sub.add_parser("usd-table", parents=[common], help="USD success, approximations and remainders")
    s.add_argument("--alphas", type=real_list, default=[0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0])
    s.add_argument("--M", type=int_range, default=list(range(2, 13)))
    s.set_defaults(func=usd_table)

    s = sub.add_parser("bounds", parents=[common], help="Gaussian, two-state and symmetric-USD bounds")
    s.add_argument("--gains", type=real_list, default=[1.5, 2.0, 3.0])
    s.add_argument("--M", type=int_range, default=list(range(2, 7)))
    s.add_argument("--alphas", type=real_list, default=[1e-3, 0.5, 1.0, 2.0])
    s.set_defaults(func=bounds)

    s = sub.add_parser("verify", parents=[common], help="run the invariant suites; exit 1 on any violation")
    s.add_argument("--suite", action="append", choices=sorted(SUITES), help="repeatable; default: all")
    s.set_defaults(func=verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return args.func(args)
        datasets = args.func(args)
        paths = write_all(datasets, args, config_of(args))
    except UsageError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"immaculate: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        print(path)
    return 0
