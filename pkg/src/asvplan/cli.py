"""Command line entry point: ``asvplan --scenario FILE --mode warm|cold|guess --out DIR``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from asvplan.errors import PlanningError, ScenarioError
from asvplan.pipeline import Mode, emit_outputs, run_pipeline
from asvplan.scenario import load_scenario

EXIT_OK = 0
EXIT_PLANNING = 2
EXIT_SOLVER = 3
EXIT_IO = 4

log = logging.getLogger("asvplan")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asvplan", description="Warm-started ASV trajectory planning.")
    p.add_argument("--scenario", required=True, help="scenario YAML file")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.WARM.value)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-ocp", type=int, default=None, help="override the scenario's N_ocp")
    p.add_argument("--trace", action="store_true", help="write the solver iteration trace")
    p.add_argument("--dump-grid", action="store_true", help="write grid and path debug CSVs")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        scenario = load_scenario(args.scenario)
        if args.n_ocp is not None:
            if args.n_ocp < 1:
                raise ScenarioError("--n-ocp must be >= 1")
            scenario = scenario.with_n_ocp(args.n_ocp)
        if args.trace:
            scenario = dataclasses.replace(scenario, solver=dataclasses.replace(scenario.solver, trace=True))
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        result = run_pipeline(scenario, args.mode)
    except PlanningError as exc:
        print(f"planning infeasible: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PLANNING

    try:
        written = emit_outputs(result, args.out, trace=args.trace, dump_grid=args.dump_grid)
    except OSError as exc:
        print(f"error writing outputs to {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        log.info("wrote %s", path)

    m = result.metrics()
    print(f"{m['mode']}: J={m['J']:.6g} J_e={m['J_e']:.6g} iterations={m['iterations']} "
          f"time={m['timings']['total']:.2f}s")
    if result.solution is not None and not result.solution.converged:
        print(f"solver did not converge: {result.solution.status.value}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
