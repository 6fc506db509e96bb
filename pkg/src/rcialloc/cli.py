"""Command-line front end: ``rcialloc {gen,solve,compare,sweep,validate}``.

Exit codes: 0 success, 1 usage, 2 infeasible, 3 I/O or bad input file,
4 internal error.  Relative output paths resolve against
``$RCIALLOC_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .allocators import ALGORITHMS, SolverConfig, run_algorithm
from .exceptions import InfeasibleError, ScenarioError, SearchSpaceTooLargeError
from .scenario_io import ResultRow, ScenarioSpec, generate_scenario, read_scenario, write_results, write_scenario

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3, 4
OUTPUT_DIR_ENV = "RCIALLOC_OUTPUT_DIR"

log = logging.getLogger("rcialloc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_path(path, default_name):
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    p = Path(path) if path else Path(default_name)
    return p if p.is_absolute() else base / p


def _add_config_flags(p):
    g = p.add_argument_group("solver configuration")
    g.add_argument("--K1", type=int, help="outer MM iterations (default 20)")
    g.add_argument("--K2", type=int, help="inner PGD iterations (default 50)")
    g.add_argument("--w0", help="unification weight: a positive number or 'balanced' (default)")
    g.add_argument("--eta", type=float, help="capacity threshold for a2rci2, bits/s/Hz")
    g.add_argument("--seed", type=int, help="seed of the initial point / random baseline")
    g.add_argument("--rounding-mode", choices=("faithful", "relaxed"))
    g.add_argument("--step-rule", choices=("normalized", "backtracking", "fixed"))
    g.add_argument("--t0", type=float, help="initial step size")


def _config_from(args) -> SolverConfig:
    w0 = args.w0
    if w0 is not None and w0 != "balanced":
        try:
            w0 = float(w0)
        except ValueError:
            raise UsageError(f"--w0 must be a number or 'balanced', got {w0!r}") from None
    try:
        return SolverConfig().with_overrides(
            K1=args.K1, K2=args.K2, w0=w0, eta=getattr(args, "eta", None), seed=args.seed,
            rounding_mode=args.rounding_mode, step_rule=args.step_rule, t0=args.t0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rcialloc", description="Antenna allocation for radar/communication networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a seeded random scenario file")
    p.add_argument("--platforms", type=int, default=3)
    p.add_argument("--targets", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=600, help="antennas per platform")
    p.add_argument("--field-size", type=float, default=10_000.0, help="square side, meters")
    p.add_argument("--wavelength", type=float, default=0.1)
    p.add_argument("--power", type=float, default=1000.0, help="per-antenna power, W")
    p.add_argument("--noise-power", type=float, default=ScenarioSpec.noise_power)
    p.add_argument("--name")
    p.add_argument("-o", "--output", help="scenario file (default <name>.json)")

    p = sub.add_parser("solve", help="run one algorithm on one scenario")
    p.add_argument("scenario")
    p.add_argument("-a", "--algorithm", default="a2rci", choices=ALGORITHMS)
    _add_config_flags(p)
    p.add_argument("-o", "--output", help="report JSON (default <scenario>.<algorithm>.json)")

    p = sub.add_parser("compare", help="cross-product of scenarios, algorithms and seeds")
    p.add_argument("scenarios", nargs="+")
    p.add_argument("-a", "--algorithms", required=True, help="comma-separated, at least two")
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    _add_config_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", help="results file (default results.<format>)")

    p = sub.add_parser("sweep", help="run a2rci2 over a range of capacity thresholds")
    p.add_argument("scenario")
    p.add_argument("--eta-from", type=float, default=1.0)
    p.add_argument("--eta-to", type=float, default=5.0)
    p.add_argument("--eta-step", type=float, default=1.0)
    _add_config_flags(p)
    p.add_argument("--assert-monotone", action="store_true",
                   help="exit 4 if ALC decreases between consecutive feasible rows")
    p.add_argument("--strict", action="store_true", help="exit 2 if any threshold is infeasible")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", help="results file (default sweep.<format>)")

    p = sub.add_parser("validate", help="run the embedded property suite")
    p.add_argument("--inject-fault", choices=("flip-ascent",), help=argparse.SUPPRESS)
    return parser


def cmd_gen(args) -> int:
    try:
        spec = ScenarioSpec(M=args.platforms, N=args.targets, seed=args.seed, budget_per_platform=args.budget,
                            field_size=args.field_size, wavelength=args.wavelength,
                            per_antenna_power=args.power, noise_power=args.noise_power, name=args.name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    scn = generate_scenario(spec)
    path = _out_path(args.output, f"{scn.name}.json")
    write_scenario(scn, path)
    print(f"wrote {scn.name}: {scn.num_platforms} platforms, {scn.num_targets} targets -> {path}")
    return EXIT_OK


def _summary(name, rep):
    m = rep.metrics
    return (f"{name} [{rep.algorithm}] ACC={m.acc:.4f} bits/s/Hz  ALC={m.alc:.4f} km  "
            f"objective={rep.objective:.6g}  feasible={rep.feasible}  time={rep.wall_time:.3f}s")


def cmd_solve(args) -> int:
    scn = read_scenario(args.scenario)
    config = _config_from(args)
    rep = run_algorithm(args.algorithm, scn, config)
    out = _out_path(args.output, f"{Path(args.scenario).stem}.{args.algorithm}.json")
    body = {"scenario": scn.name, **rep.to_dict()}
    out.write_text(json.dumps(body, indent=1) + "\n")
    print(_summary(scn.name, rep))
    print(f"report -> {out}")
    return EXIT_OK


def _solve_row(job):
    path, algorithm, seed, config = job
    scn = read_scenario(path)
    try:
        rep = run_algorithm(algorithm, scn, config.with_overrides(seed=seed))
    except InfeasibleError:
        return ResultRow.infeasible(scn.name, algorithm, seed)
    return ResultRow.from_report(scn.name, rep, seed)


def _run_jobs(jobs, n_workers):
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as ex:
            rows = list(ex.map(_solve_row, jobs))
    else:
        rows = [_solve_row(j) for j in jobs]
    return sorted(rows, key=ResultRow.sort_key)


def cmd_compare(args) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    if len(algorithms) < 2:
        raise UsageError("compare needs at least two algorithms")
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise UsageError(f"unknown algorithm(s) {', '.join(unknown)}; choose from {', '.join(ALGORITHMS)}")
    config = _config_from(args)
    for path in args.scenarios:
        read_scenario(path)  # fail fast on unreadable input
    jobs = [(p, a, s, config) for p in args.scenarios for a in algorithms for s in args.seeds]
    rows = _run_jobs(jobs, args.jobs)
    out = _out_path(args.output, f"results.{args.format}")
    write_results(rows, out, args.format)
    print(f"{'algorithm':<10} {'runs':>5} {'mean ACC':>10} {'mean ALC':>10}")
    for a in algorithms:
        sel = [r for r in rows if r.algorithm == a and r.feasible]
        acc = np.mean([r.acc for r in sel]) if sel else float("nan")
        alc = np.mean([r.alc for r in sel]) if sel else float("nan")
        print(f"{a:<10} {len(sel):>5} {acc:>10.4f} {alc:>10.4f}")
    print(f"{len(rows)} rows -> {out}")
    return EXIT_OK


def eta_grid(eta_from: float, eta_to: float, step: float) -> list[float]:
    """Thresholds ``eta_from, eta_from + step, ...`` not exceeding ``eta_to``."""
    if step <= 0:
        raise UsageError("--eta-step must be positive")
    if eta_from > eta_to:
        raise UsageError("--eta-from must not exceed --eta-to")
    if eta_from < 0:
        raise UsageError("thresholds must be nonnegative")
    n = int(np.floor((eta_to - eta_from) / step + 1e-9))
    return [eta_from + k * step for k in range(n + 1)]


def cmd_sweep(args) -> int:
    etas = eta_grid(args.eta_from, args.eta_to, args.eta_step)
    scn = read_scenario(args.scenario)
    config = _config_from(args)
    seed = config.seed
    rows = []
    for eta in etas:
        try:
            rep = run_algorithm("a2rci2", scn, config.with_overrides(eta=eta))
            rows.append(ResultRow.from_report(scn.name, rep, seed, eta=eta))
        except InfeasibleError as exc:
            log.info("eta=%g infeasible: %s", eta, exc)
            rows.append(ResultRow.infeasible(scn.name, "a2rci2", seed, eta=eta))
    out = _out_path(args.output, f"sweep.{args.format}")
    write_results(rows, out, args.format)
    for r in rows:
        status = f"ALC={r.alc:.4f} km  ACC={r.acc:.4f}" if r.feasible else "infeasible"
        print(f"eta={r.eta:g}: {status}")
    print(f"{len(rows)} rows -> {out}")
    if args.assert_monotone:
        alc = [r.alc for r in rows if r.feasible]
        drops = [(a, b) for a, b in zip(alc, alc[1:]) if b < a]
        if drops:
            print(f"monotonicity violated at {len(drops)} step(s)", file=sys.stderr)
            return EXIT_INTERNAL
    if args.strict and not all(r.feasible for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_validation

    results = run_validation(args.inject_fault)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return EXIT_INTERNAL
    print(f"all {len(results)} properties passed")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "compare": cmd_compare, "sweep": cmd_sweep,
            "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rcialloc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SearchSpaceTooLargeError as exc:
        print(f"rcialloc {args.command}: oracle refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"rcialloc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, ScenarioError) as exc:
        print(f"rcialloc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - the exit-code contract needs a catch-all
        log.debug("internal error", exc_info=True)
        print(f"rcialloc {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
