"""Command line front-end: ``riscalc <subcommand> --scenario FILE --out FILE``.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 I/O error,
5 numerical non-convergence or infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import metrics, montecarlo, optimizer
from .errors import RisCalcError, SeriesConvergenceError
from .scenario_file import ScenarioBundle, ScenarioIOError, ScenarioValidationError, parse_scenario

log = logging.getLogger("riscalc")

SWEEPS = ("op-sweep", "asep-sweep", "montecarlo", "fit")
OPTIMIZERS = ("optimize-elements", "minimize-elements", "optimize-placement")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _grid(bundle: ScenarioBundle, snr_db):
    if snr_db is not None:
        return (float(snr_db),)
    grid = bundle.scenario.config.avg_snr_grid_db
    if not grid:
        raise ScenarioValidationError("no snr_grid_db and no --snr-db given", section="global")
    return grid


def _ordered_map(fn, items, workers):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _lin(db):
    return 10.0 ** (db / 10.0)


def op_sweep(bundle, args):
    scn = bundle.scenario

    def row(db):
        g = _lin(db)
        return [db, metrics.outage_probability(scn, g), metrics.asymptotic_outage(scn, g),
                metrics.ub_outage(scn, g)]

    header = ["snr_db", "p_out_exact", "p_out_asymptotic", "p_out_ub"]
    return header, _ordered_map(row, _grid(bundle, args.snr_db), args.workers)


def asep_sweep(bundle, args):
    scn, mod = bundle.scenario, bundle.modulation

    def row(db):
        g = _lin(db)
        try:
            series = metrics.asep_series(scn, mod, g, bundle.series)
        except SeriesConvergenceError:
            series = None
        return [db, metrics.asep_quadrature(scn, mod, g), series]

    header = ["snr_db", "asep_quadrature", "asep_series"]
    return header, _ordered_map(row, _grid(bundle, args.snr_db), args.workers)


def mc_sweep(bundle, args):
    run = bundle.mc
    changes = {"workers": args.workers}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    run = replace(run, **changes)
    rows = []
    for db in _grid(bundle, args.snr_db):
        if args.metric == "asep":
            est = montecarlo.empirical_asep(bundle.scenario, bundle.modulation, _lin(db), run)
        else:
            est = montecarlo.empirical_outage(bundle.scenario, _lin(db), run)
        rows.append([db, est.value, est.std_error, est.trials])
    return ["snr_db", "estimate", "std_error", "trials"], rows


def fit_table(bundle, args):
    scn = bundle.scenario
    rows = []
    for k, (link, fit, pl) in enumerate(zip(scn.links, scn.fits, scn.path_losses), start=1):
        rows.append([k, fit.a, fit.b, pl, optimizer.shape_per_element(link)])
    return ["ris", "a", "b", "path_loss", "c"], rows


def _need_optimize(bundle):
    if bundle.optimize is None:
        raise ScenarioValidationError("an [optimize] section is required", section="optimize")
    return bundle.optimize


def _avg_snr(block, args):
    return _lin(args.snr_db if args.snr_db is not None else block.avg_snr_db)


def element_runs(bundle, args):
    block = _need_optimize(bundle)
    scn = bundle.scenario
    K = scn.n_links
    solve = (optimizer.solve_feasibility if args.command == "optimize-elements"
             else optimizer.minimize_total_elements)
    header = ["p_out_th", "iteration", *[f"n_{k}" for k in range(1, K + 1)], "total",
              "log_ub", "residual"]
    rows = []
    for p_th in block.p_out_th:
        problem = optimizer.ElementProblem(
            scn.links, scn.config, block.n_max, p_th, _avg_snr(block, args),
            start_point=block.start_point,
        )
        sol = solve(problem)
        ln_th = math.log(p_th)
        for rec in sol.trace:
            rows.append([p_th, rec.iteration, *rec.point, sum(rec.point), rec.objective, rec.residual])
        coeffs = optimizer.ub_coefficients(problem)
        f_int = optimizer.ub_outage_log(sol.elements, coeffs)
        rows.append([p_th, "final", *sol.elements, sol.total, f_int, f_int - ln_th])
    return header, rows


def placement_run(bundle, args):
    block = _need_optimize(bundle)
    if block.total_distance_m is None:
        raise ScenarioValidationError("required for placement", section="optimize", key="total_distance_m")
    scn = bundle.scenario
    K = scn.n_links
    problem = optimizer.PlacementProblem(
        scn.links, scn.config, _avg_snr(block, args), block.total_distance_m,
        d_min_m=block.d_min_m, start_point=block.start_distances_m,
    )
    sol = optimizer.optimize_placement(problem)
    header = ["kind", "index", *[f"d_{k}" for k in range(1, K + 1)], "g"]
    rows = [["extreme", i, *d, g] for i, (d, g) in enumerate(sol.extreme_points)]
    rows += [["iterate", rec.iteration, *rec.point, rec.objective] for rec in sol.trace]
    rows.append(["optimum", "enumerated", *sol.d, sol.value])
    rows.append(["optimum", "iterative", *sol.iterative_d, sol.iterative_value])
    return header, rows


HANDLERS = {
    "op-sweep": op_sweep,
    "asep-sweep": asep_sweep,
    "montecarlo": mc_sweep,
    "fit": fit_table,
    "optimize-elements": element_runs,
    "minimize-elements": element_runs,
    "optimize-placement": placement_run,
}


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riscalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SWEEPS + OPTIMIZERS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, type=Path)
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--snr-db", type=float, default=None,
                       help="single average SNR in dB (overrides the scenario grid)")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=1,
                       help="worker threads; output does not depend on this")
        if name == "montecarlo":
            p.add_argument("--metric", choices=("outage", "asep"), default="outage")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("riscalc: --workers must be >= 1", file=sys.stderr)
        return 3
    try:
        bundle = parse_scenario(args.scenario)
        header, rows = HANDLERS[args.command](bundle, args)
        text = render_csv(header, rows)
        try:
            args.out.write_text(text, encoding="utf-8", newline="")
        except OSError as exc:
            raise ScenarioIOError(f"cannot write {args.out}: {exc}") from None
    except RisCalcError as exc:
        print(f"riscalc: error: {exc}", file=sys.stderr)
        return exc.exit_code
    log.info("wrote %d rows to %s", len(rows), args.out)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
