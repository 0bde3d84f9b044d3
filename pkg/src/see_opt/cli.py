"""Batch front end: scenario files in, delimited-text artifacts out.

Verbs:
    optimize     full alternating optimization of one scenario
    benchmark    trajectory frozen (--benchmark sfw|dcfwo), resources optimized
    table2       proposed vs. benchmarks across a list of horizons
    sweep-power  one optimize run per source power budget
    validate     parse a scenario and check the initial design

Every run writes four artifacts into its own directory: trajectory.csv,
convergence.csv, causality.csv and summary.json. The CSV tables carry 12
significant digits and no timestamps, so identical runs produce byte-identical
tables; wall-clock time lives only in summary.json. Exit codes: 0 converged,
2 stopped at the iteration cap, 1 error. SEE_OPT_LOG={error,info,debug}
controls stderr logging (default error).
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .initializers import InfeasibleGeometry, initial_trajectory, run_benchmark
from .model import (PowerAllocation, Schedule, causality_residuals, link_rates,
                    propulsion_energy, validate_design)
from .optimizer import (InfeasibleInitialDesign, SubproblemFailure,
                        evaluate_design, optimize)
from .scenario import ScenarioError, default_scenario, load_scenario

log = logging.getLogger("see_opt.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITER = 2

TABLE2_HORIZONS = (100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 450.0)
SWEEP_P_DBM = (0.0, 5.0, 10.0, 15.0, 20.0)


def _fmt(x) -> str:
    """12 significant digits, period decimal separator."""
    return format(float(x), ".12g")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(c) if isinstance(c, (int, np.integer)) else _fmt(c)
                              for c in row))
    path.write_text("\n".join(lines) + "\n")


def write_artifacts(out_dir, scenario, report, wall_s: float) -> dict:
    """Emit trajectory/convergence/causality tables plus summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    design = report.design
    rates = link_rates(scenario.channel(), scenario.layout(), design.traj,
                       design.sched, design.pwr)
    energy = propulsion_energy(scenario.energy(), design.traj,
                               scenario.delta_t_s, v_floor=scenario.v_floor_ms)
    ev = evaluate_design(scenario, design)
    n = design.traj.N
    scale = scenario.b_hz * scenario.delta_t_s

    rows = [(k + 1,
             design.traj.q[k + 1, 0], design.traj.q[k + 1, 1],
             design.traj.v[k + 1, 0], design.traj.v[k + 1, 1],
             design.traj.a[k, 0], design.traj.a[k, 1],
             design.sched.lam[k], design.pwr.p_s[k], design.pwr.p_r[k],
             rates.r_SR[k], rates.r_SE[k], rates.r_RD[k], rates.r_RE[k],
             energy["per_slot"][k])
            for k in range(n)]
    _write_csv(out / "trajectory.csv",
               ("n", "x_m", "y_m", "vx_ms", "vy_ms", "ax_ms2", "ay_ms2",
                "lambda", "p_s_w", "p_r_w", "r_sr", "r_se", "r_rd", "r_re",
                "energy_j"), rows)

    _write_csv(out / "convergence.csv",
               ("iter", "see_bits_per_j", "numerator_bits", "energy_j"),
               [(it["iter"], it["see"], it["numerator_bits"], it["energy_J"])
                for it in report.iterations])

    cum_recv = scale * np.cumsum(np.maximum(rates.r_SR - rates.r_SE, 0.0))
    cum_fwd = scale * np.cumsum(rates.r_RD)
    _write_csv(out / "causality.csv",
               ("n", "received_secrecy_bits", "forwarded_bits"),
               [(k + 1, cum_recv[k], cum_fwd[k]) for k in range(n)])

    summary = {
        "label": scenario.label,
        "seed": scenario.seed,
        "t_horizon_s": scenario.t_horizon_s,
        "eta": scenario.eta,
        "see_bits_per_joule": ev["see"],
        "secrecy_bits": ev["numerator_bits"],
        "energy_joules": ev["energy_J"],
        "outer_iterations": report.n_outer,
        "converged": report.converged,
        "stop_reason": report.reason,
        "max_causality_violation": ev["max_causality_violation"],
        "rounded_schedule": {
            "see_bits_per_joule": report.rounded["see"],
            "max_causality_violation": report.rounded["max_causality_violation"],
        } if report.rounded is not None else None,
        "wall_time_s": wall_s,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _load(args):
    sc = load_scenario(args.scenario) if args.scenario else default_scenario()
    if args.t_horizon is not None:
        sc = replace(sc, t_horizon_s=float(args.t_horizon))
    if args.eta is not None:
        sc = replace(sc, eta=args.eta)
    if args.max_outer is not None:
        sc = replace(sc, max_outer=args.max_outer)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    sc.N  # fail early on a non-integral horizon
    return sc


def _exit_code(report) -> int:
    return EXIT_OK if report.converged else EXIT_MAX_ITER


def _run_one(scenario, out_dir, kind=None):
    """One optimize or benchmark run with artifacts; returns (summary, code)."""
    t0 = time.perf_counter()
    if kind is None:
        report = optimize(scenario)
    else:
        report = run_benchmark(scenario, kind)
    wall = time.perf_counter() - t0
    summary = write_artifacts(out_dir, scenario, report, wall)
    log.info("%s T=%g: SEE %.6g bits/J, %d iterations, %.1f s (%s)",
             kind or "optimize", scenario.t_horizon_s, summary["see_bits_per_joule"],
             report.n_outer, wall, report.reason)
    return summary, _exit_code(report)


def cmd_optimize(args) -> int:
    sc = _load(args)
    summary, code = _run_one(sc, args.out)
    print("SEE %s kbits/J in %d iterations (%s); artifacts in %s"
          % (_fmt(summary["see_bits_per_joule"] / 1e3),
             summary["outer_iterations"], summary["stop_reason"], args.out))
    return code


def cmd_benchmark(args) -> int:
    sc = _load(args)
    summary, code = _run_one(sc, args.out, kind=args.benchmark)
    print("%s SEE %s kbits/J in %d iterations (%s); artifacts in %s"
          % (args.benchmark, _fmt(summary["see_bits_per_joule"] / 1e3),
             summary["outer_iterations"], summary["stop_reason"], args.out))
    return code


def cmd_table2(args) -> int:
    sc = _load(args)
    horizons = args.horizons or list(TABLE2_HORIZONS)
    out = Path(args.out)
    rows = []
    code = EXIT_OK
    for t in horizons:
        sct = replace(sc, t_horizon_s=float(t))
        row = {"t": t}
        for name, kind in (("proposed", None), ("dcfwo", "dcfwo"), ("sfw", "sfw")):
            summary, c = _run_one(sct, out / ("T%g" % t) / name, kind=kind)
            row[name] = summary["see_bits_per_joule"]
            code = max(code, c)
        ordered = row["proposed"] > row["dcfwo"] > row["sfw"]
        rows.append((t, row["proposed"] / 1e3, row["dcfwo"] / 1e3,
                     row["sfw"] / 1e3, int(ordered)))
        print("T=%-5g proposed %-10s dcfwo %-10s sfw %-10s kbits/J  ordering %s"
              % (t, _fmt(row["proposed"] / 1e3), _fmt(row["dcfwo"] / 1e3),
                 _fmt(row["sfw"] / 1e3), "ok" if ordered else "VIOLATED"))
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "table2.csv",
               ("t_s", "proposed_kbits_per_j", "dcfwo_kbits_per_j",
                "sfw_kbits_per_j", "ordering_ok"), rows)
    return code


def cmd_sweep_power(args) -> int:
    sc = _load(args)
    p_list = args.p_dbm or list(SWEEP_P_DBM)
    out = Path(args.out)
    rows = []
    code = EXIT_OK
    for p in p_list:
        scp = replace(sc, p_s_dbm=float(p))
        summary, c = _run_one(scp, out / ("ps%gdbm" % p))
        code = max(code, c)
        rows.append((p, summary["see_bits_per_joule"]))
        print("P_s=%-4g dBm  SEE %s kbits/J"
              % (p, _fmt(summary["see_bits_per_joule"] / 1e3)))
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep_power.csv", ("p_s_dbm", "see_bits_per_j"), rows)
    return code


def cmd_validate(args) -> int:
    sc = _load(args)
    traj = initial_trajectory(sc)
    limits = sc.limits()
    sched = Schedule(lam=np.ones(limits.N))
    pwr = PowerAllocation(p_s=np.full(limits.N, limits.P_s_bar),
                          p_r=np.full(limits.N, limits.P_r_bar))
    report = validate_design(sc.layout(), limits, traj, sched, pwr,
                             kin_tol=sc.kin_tol, cp=sc.channel())
    if report.ok:
        print("scenario '%s' ok: N=%d, initial design feasible" % (sc.label, limits.N))
        return EXIT_OK
    print("scenario '%s': initial design INFEASIBLE" % sc.label)
    for v in report.violations:
        print("  %s: %s (tol %s)" % (v.name, _fmt(v.value), _fmt(v.tolerance)))
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="PATH",
                        help="scenario file (default: built-in reference scenario)")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="artifact directory (default: out/<verb>)")
    common.add_argument("--t-horizon", type=float, metavar="SECONDS",
                        help="override the scenario's flight horizon")
    common.add_argument("--eta", type=int, help="sub-slots per slot for rounding")
    common.add_argument("--max-outer", type=int, help="outer iteration cap")
    common.add_argument("--seed", type=int,
                        help="run metadata only; the solver path is deterministic")

    p = argparse.ArgumentParser(prog="see-opt", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("optimize", parents=[common],
                   help="jointly optimize scheduling, power and trajectory")
    b = sub.add_parser("benchmark", parents=[common],
                       help="optimize resources over a frozen trajectory")
    b.add_argument("--benchmark", choices=("sfw", "dcfwo"), required=True,
                   help="sfw: straight flight; dcfwo: double-circular path")
    t = sub.add_parser("table2", parents=[common],
                       help="proposed vs. benchmark SEE across horizons")
    t.add_argument("horizons", nargs="*", type=float,
                   help="horizons in seconds (default: %s)"
                        % " ".join("%g" % h for h in TABLE2_HORIZONS))
    s = sub.add_parser("sweep-power", parents=[common],
                       help="SEE versus source power budget")
    s.add_argument("p_dbm", nargs="*", type=float,
                   help="source budgets in dBm (default: %s)"
                        % " ".join("%g" % v for v in SWEEP_P_DBM))
    sub.add_parser("validate", parents=[common],
                   help="parse a scenario and check the initial design")
    return p


_COMMANDS = {
    "optimize": cmd_optimize,
    "benchmark": cmd_benchmark,
    "table2": cmd_table2,
    "sweep-power": cmd_sweep_power,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    level = os.environ.get("SEE_OPT_LOG", "error").lower()
    if level not in ("error", "info", "debug"):
        print("SEE_OPT_LOG must be error, info or debug", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level.upper()),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.out is None:
        args.out = os.path.join("out", args.command)
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, InfeasibleGeometry, InfeasibleInitialDesign,
            SubproblemFailure, OSError) as ex:
        log.error("%s", ex)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
