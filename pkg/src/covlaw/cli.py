"""Command-line front end: parameter sweeps emitted as CSV plus manifest.

Each subcommand reproduces the data behind one experiment family. Output
is CSV (UTF-8, LF, 12 significant digits) with a JSON manifest sidecar
carrying the full parameter echo and SHA-256 digests of every file, so a
run can be re-verified byte for byte. Running a command with no grid
flags (or with --defaults) uses the canonical experiment grids.

Exit codes: 0 on success, 2 on usage/parameter errors, 3 when an internal
consistency assertion fails (which signals a numerics bug, not bad data).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .ar1 import (
    Ar1Config,
    bad_calibration_report,
    bound_chain,
    mc_w1_stats,
    simulate_coverages,
)
from .conformal import (
    CoverageBoundError,
    DegenerateCoverageError,
    clustered_law,
    clustered_radius,
    conformal_index,
)
from .laws import beta_reference, contaminate, empirical_from_samples
from .numerics import DomainError, QuadratureError, stream_for
from .scale_shift import (
    IdentityViolationError,
    ScaleShift,
    local_shift_gap,
    scale_shift_map,
    shifted_coverage,
    shifted_coverage_law,
)
from .transport import coupling_mc_bound, w1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ASSERTION = 3

_DEFAULT_SEED = 20250101
_DEFAULT_SIMS = 50_000


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_manifest(
    out_dir: Path, command: str, params: dict, seed: int, sims: int,
    wall_time: float, files: list[Path],
) -> Path:
    digests = {
        f.name: hashlib.sha256(f.read_bytes()).hexdigest() for f in sorted(files)
    }
    manifest = {
        "command": command,
        "parameters": params,
        "master_seed": seed,
        "sims": sims,
        "version": __version__,
        "wall_time_seconds": round(wall_time, 3),
        "outputs": digests,
    }
    path = out_dir / f"{command.replace('-', '_')}_manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _grid(values, lo=0.0, hi=1.0, points=51):
    if values:
        return [float(v) for v in values]
    return [float(v) for v in np.round(np.linspace(lo, hi, points), 12)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_beta_tail(args) -> list[Path]:
    n_list = sorted(int(n) for n in (args.n or [20, 30, 50, 100, 200, 400, 800]))
    thresholds = sorted(float(t) for t in (args.thresholds or [0.80, 0.85]))
    gamma = args.gamma
    rows = []
    for n in n_list:
        k = conformal_index(n, gamma)
        if k > n:
            raise DegenerateCoverageError(f"k={k} exceeds n={n}: coverage is exactly 1")
        g = stream_for(args.seed, "beta-tail", n).generator()
        draws = g.beta(k, n + 1 - k, size=args.sims)
        for t in thresholds:
            analytic = beta_reference(n, k).cdf(t)
            mc = float(np.mean(draws <= t))
            se = float(np.sqrt(max(mc * (1.0 - mc), 1e-12) / args.sims))
            rows.append((n, gamma, k, t, analytic, mc, se))
    out = args.out_dir / "beta_tail.csv"
    _write_csv(out, ["n", "gamma", "k", "t", "analytic_tail", "mc_tail", "mc_se"], rows)
    return [out]


def cmd_w1_ball(args) -> list[Path]:
    pi_grid = _grid(args.pi, points=args.grid_points)
    c_grid = _grid(args.c, points=args.grid_points)
    reference = beta_reference(args.n, args.k)
    rows = []
    for pi in pi_grid:
        for c in c_grid:
            if pi == 0.0:
                dist = 0.0
            else:
                dist = w1(contaminate(reference, pi, c), reference).distance
            rows.append((pi, c, dist))
    out = args.out_dir / "w1_ball.csv"
    _write_csv(out, ["pi", "c", "w1"], rows)
    return [out]


def cmd_halfnormal(args) -> list[Path]:
    n_list = sorted(int(n) for n in (args.n or [50, 200, 1000]))
    r_curves = sorted(float(r) for r in (args.r or [0.5, 0.8, 2.0]))
    if args.r_sweep:
        r_sweep = sorted(float(r) for r in args.r_sweep)
    else:
        r_sweep = [float(v) for v in np.round(np.linspace(0.3, 3.0, 55), 10)]
    gamma = args.gamma
    t_grid = np.linspace(0.0, 1.0, 201)

    curve_rows = []
    for n in n_list:
        k = conformal_index(n, gamma)
        reference = beta_reference(n, k)
        f_ref = np.asarray(reference.cdf(t_grid))
        for r in r_curves:
            law = shifted_coverage_law(n, k, ScaleShift(r))
            f_shift = np.asarray(law.cdf(t_grid))
            curve_rows.extend(
                (n, r, float(t), float(fb), float(fs))
                for t, fb, fs in zip(t_grid, f_ref, f_shift)
            )

    summary_rows = []
    for n in n_list:
        k = conformal_index(n, gamma)
        reference = beta_reference(n, k)
        for r in r_sweep:
            shift = ScaleShift(r)
            dist = w1(shifted_coverage_law(n, k, shift), reference).distance
            gap = abs(shifted_coverage(n, k, shift) - k / (n + 1))
            if abs(dist - gap) > 1e-7:
                raise IdentityViolationError(
                    f"W1 {dist} and gap {gap} disagree at n={n}, r={r}"
                )
            mc = coupling_mc_bound(
                scale_shift_map(shift), reference, 1.0, args.sims,
                stream_for(args.seed, f"halfnormal:{n}:{r:.10g}", 0),
            )
            approx = local_shift_gap(gamma, float(np.log(r)))
            summary_rows.append((n, r, k, dist, gap, mc.value, mc.standard_error, approx))

    curves = args.out_dir / "halfnormal_curves.csv"
    summary = args.out_dir / "halfnormal_summary.csv"
    _write_csv(curves, ["n", "r", "t", "F_beta", "F_transported"], curve_rows)
    _write_csv(
        summary,
        ["n", "r", "k", "w1_quadrature", "gap_exact", "w1_mc", "mc_se", "local_approx"],
        summary_rows,
    )
    return [curves, summary]


def cmd_clustered(args) -> list[Path]:
    m_list = sorted(int(m) for m in (args.m or [1, 2, 4, 5]))
    b = args.b
    gamma = args.gamma
    rows = []
    for m in m_list:
        n = m * b
        k = conformal_index(n, gamma)
        if k > n:
            raise DegenerateCoverageError(f"k={k} exceeds n={n}")
        law = clustered_law(k, m, b)
        rho = clustered_radius(k, m, b)
        gap = abs(law.mean() - k / (n + 1))
        if gap > rho + 1e-7:
            raise CoverageBoundError(f"mean gap {gap} exceeds radius {rho} at m={m}")
        rows.append((n, m, b, k, law.k, rho, gap))
    out = args.out_dir / "clustered.csv"
    _write_csv(out, ["n", "m", "b", "k", "k_eff", "rho_cl", "mean_gap"], rows)
    return [out]


def _ar1_grids(args):
    """Explicit flags give a full cross product; otherwise the figure grids."""
    explicit = bool(args.a or args.n or args.ell)
    if explicit:
        a_list = sorted(float(a) for a in (args.a or [0.0, 0.3, 0.6, 0.9]))
        n_list = sorted(int(n) for n in (args.n or [50, 100, 200, 400, 800]))
        ell_list = sorted(int(h) for h in (args.ell or [1, 10, 25]))
        cross = [(a, n, ell) for a in a_list for n in n_list for ell in ell_list]
        curves = [(a, min(n_list), ell) for a in a_list for ell in ell_list]
        badcal = cross
        return sorted(set(curves)), sorted(set(cross)), sorted(set(badcal))
    curves = [(a, 50, ell) for a in (0.0, 0.3, 0.6, 0.9) for ell in (1, 10, 25)]
    horizon = [(a, 200, ell) for a in (0.0, 0.3, 0.6, 0.9) for ell in (1, 2, 4, 8, 16, 25)]
    chain = [
        (a, n, ell)
        for a in (0.3, 0.6, 0.9)
        for n in (50, 100, 200, 400, 800)
        for ell in (1, 10, 25)
    ]
    badcal = [
        (a, n, ell)
        for a in (0.3, 0.6, 0.9)
        for n in (50, 100, 200, 400, 800)
        for ell in (5, 10)
    ]
    return sorted(set(curves)), sorted(set(horizon) | set(chain)), sorted(set(badcal))


def cmd_ar1(args) -> list[Path]:
    gamma = args.gamma
    eta = args.eta
    curve_grid, chain_grid, badcal_grid = _ar1_grids(args)

    cache: dict[tuple, np.ndarray] = {}
    w1_cache: dict[tuple, tuple[float, float]] = {}

    def coverages_for(a: float, n: int, ell: int) -> np.ndarray:
        key = (a, n, ell)
        if key not in cache:
            config = Ar1Config(
                a=a, n=n, ell=ell, gamma=gamma, sims=args.sims, master_seed=args.seed
            )
            cache[key] = simulate_coverages(config, threads=args.threads)
        return cache[key]

    def w1_for(a: float, n: int, ell: int) -> tuple[float, float]:
        key = (a, n, ell)
        if key not in w1_cache:
            w1_cache[key] = mc_w1_stats(coverages_for(a, n, ell), n, conformal_index(n, gamma))
        return w1_cache[key]

    t_grid = np.linspace(0.0, 1.0, 201)
    curve_rows = []
    for a, n, ell in curve_grid:
        k = conformal_index(n, gamma)
        law = empirical_from_samples(coverages_for(a, n, ell))
        f_emp = np.asarray(law.cdf(t_grid))
        f_ref = np.asarray(beta_reference(n, k).cdf(t_grid))
        curve_rows.extend(
            (a, n, ell, float(t), float(fe), float(fb))
            for t, fe, fb in zip(t_grid, f_emp, f_ref)
        )

    chain_rows = []
    for a, n, ell in chain_grid:
        config = Ar1Config(a=a, n=n, ell=ell, gamma=gamma, sims=args.sims, master_seed=args.seed)
        row = bound_chain(
            config, coverages=coverages_for(a, n, ell), w1_stats=w1_for(a, n, ell)
        )
        chain_rows.append(
            (a, n, ell, gamma, row.k, row.mc_mean, row.mc_gap, row.mc_gap_se,
             row.mc_w1, row.mc_w1_se, row.analytic_bound)
        )

    badcal_rows = []
    for a, n, ell in badcal_grid:
        config = Ar1Config(a=a, n=n, ell=ell, gamma=gamma, sims=args.sims, master_seed=args.seed)
        rep = bad_calibration_report(
            config, eta, coverages=coverages_for(a, n, ell), w1_stats=w1_for(a, n, ell)
        )
        badcal_rows.append(
            (a, n, ell, gamma, eta, rep.k, rep.threshold, rep.mc_tail, rep.mc_tail_se,
             rep.mc_w1, rep.bound_raw, rep.bound)
        )

    curves = args.out_dir / "ar1_cdf_curves.csv"
    chain = args.out_dir / "ar1_bound_chain.csv"
    badcal = args.out_dir / "ar1_bad_calibration.csv"
    _write_csv(curves, ["a", "n", "ell", "t", "F_empirical", "F_beta"], curve_rows)
    _write_csv(
        chain,
        ["a", "n", "ell", "gamma", "k", "mc_mean", "mc_gap", "mc_gap_se",
         "mc_w1", "mc_w1_se", "analytic_bound"],
        chain_rows,
    )
    _write_csv(
        badcal,
        ["a", "n", "ell", "gamma", "eta", "k", "threshold", "mc_tail", "mc_tail_se",
         "mc_w1", "bound_raw", "bound"],
        badcal_rows,
    )
    return [curves, chain, badcal]


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_DEFAULT_SEED, help="master seed")
    common.add_argument("--sims", type=int, default=_DEFAULT_SIMS, help="Monte Carlo replications")
    common.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    common.add_argument(
        "--defaults", action="store_true",
        help="use the canonical experiment grids (also used when no grid flags are given)",
    )
    common.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo sweeps")

    parser = argparse.ArgumentParser(
        prog="covlaw",
        description="Coverage laws of split conformal calibration: reference tails, "
        "transport radii, and dependence experiments, emitted as CSV.",
    )
    parser.add_argument("--version", action="version", version=f"covlaw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beta-tail", parents=[common], help="reference-law lower tails vs calibration size")
    p.add_argument("--n", type=int, nargs="+", help="calibration sizes")
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--thresholds", type=float, nargs="+", help="coverage thresholds t")
    p.set_defaults(func=cmd_beta_tail)

    p = sub.add_parser("w1-ball", parents=[common], help="transport radius of contaminated laws")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--k", type=int, default=46)
    p.add_argument("--pi", type=float, nargs="+", help="contamination weights")
    p.add_argument("--c", type=float, nargs="+", help="contamination locations")
    p.add_argument("--grid-points", type=int, default=51)
    p.set_defaults(func=cmd_w1_ball)

    p = sub.add_parser("halfnormal", parents=[common], help="scale-shift transported laws and exact identity")
    p.add_argument("--n", type=int, nargs="+", help="calibration sizes")
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--r", type=float, nargs="+", help="scale ratios for CDF curves")
    p.add_argument("--r-sweep", type=float, nargs="+", help="scale ratios for the summary sweep")
    p.set_defaults(func=cmd_halfnormal)

    p = sub.add_parser("clustered", parents=[common], help="effective-sample-size radius under clustering")
    p.add_argument("--b", type=int, default=25, help="number of independent clusters")
    p.add_argument("--m", type=int, nargs="+", help="cluster sizes")
    p.add_argument("--gamma", type=float, default=0.9)
    p.set_defaults(func=cmd_clustered)

    p = sub.add_parser("ar1", parents=[common], help="stationary AR(1) coverage laws and bound chain")
    p.add_argument("--a", type=float, nargs="+", help="AR coefficients")
    p.add_argument("--n", type=int, nargs="+", help="calibration sizes")
    p.add_argument("--ell", type=int, nargs="+", help="test horizons")
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--eta", type=float, default=0.05)
    p.set_defaults(func=cmd_ar1)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    params = {
        key: (str(val) if isinstance(val, Path) else val)
        for key, val in sorted(vars(args).items())
        if key != "func"
    }
    start = time.monotonic()
    try:
        files = args.func(args)
    except (DomainError, DegenerateCoverageError) as exc:
        print(f"covlaw {args.command}: parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CoverageBoundError, IdentityViolationError, QuadratureError) as exc:
        print(f"covlaw {args.command}: internal assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    _write_manifest(
        args.out_dir, args.command, params, args.seed, args.sims,
        time.monotonic() - start, files,
    )
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
