"""Command-line front end for the chaotic SAT amplifier pipeline.

Usage:
    python -m app.cli solve FILE.cnf|FILE.json [--a A] [--tau TAU] [--kmax K] [--trace PATH] [--dump-state PATH] [--record]
    python -m app.cli oracle FILE.cnf|FILE.json [--formula]
    python -m app.cli amplify --q2 V [--q2 V ...] [--a A] [--tau TAU] [--kmax K] [--json | --csv]
    python -m app.cli lyapunov [--a A] [--x0 X] [--burn N] [--samples N]
    python -m app.cli gate {evolve,slater,overlap,hf} SPEC.json [...]
    python -m app.cli runs [--page P] [--limit L] [--sort-by COL] [--order asc|desc] [--search TEXT] [--clear]

Reports go to stdout as JSON, traces as CSV; logs go to stderr.
Exit codes: 10 satisfiable, 20 unsatisfiable, 1 error.
"""
import argparse
import json
import logging
import math
import sys
import time
from typing import List, Optional

from .core.config import (
    DEFAULT_A,
    DEFAULT_BURN_IN,
    DEFAULT_DT,
    DEFAULT_SAMPLES,
    DEFAULT_TAU,
    DEFAULT_X0,
    STATE_MAX_QUBITS,
)
from .core.database import get_db, init_db
from .core.errors import BoundExceededError, DomainError
from .models.run import RunRecord
from .schemas.report import AmplifierParamsOut, LyapunovReport, OracleReport, OverlapReport, RunReport, SlaterReport
from .services.chaos_amp import (
    LogisticParams,
    Verdict,
    classify,
    column_label,
    default_k_max,
    effective_qubits,
    iterate,
    lyapunov,
    trace_amplification,
)
from .services.hf_gate import (
    evolve_spinor_trace,
    hf_evolve,
    linear_reference,
    slater_compose,
    slater_inner,
    slater_overlap,
)
from .services.qsim import dump_state_csv, run_pipeline
from .services.sat_core import count_roots, formula_to_json, read_formula_file
from .utils.data_utils import (
    complex_to_pair,
    load_gate_request,
    load_orbital_set,
    load_orbitals,
    normalize_and_insert_report,
    read_json_file,
    table_to_json,
    write_hf_trace_csv,
    write_spinor_trace_csv,
    write_table_csv,
    write_trajectory_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SAT = 10
EXIT_UNSAT = 20

OVERLAP_TOL = 1e-12


def _emit(model, exclude_none: bool = True):
    print(model.model_dump_json(indent=2, exclude_none=exclude_none, by_alias=True))


def _params(args, n: int) -> LogisticParams:
    k_max = args.kmax if args.kmax is not None else default_k_max(n, args.a)
    return LogisticParams(a=args.a, tau=args.tau, k_max=k_max)


def cmd_solve(args) -> int:
    started = time.perf_counter()
    formula, text = read_formula_file(args.file)
    if formula.n > STATE_MAX_QUBITS:
        raise BoundExceededError(f"n={formula.n} exceeds the state-vector bound of {STATE_MAX_QUBITS} qubits")

    params = _params(args, formula.n)
    state, reduction = run_pipeline(formula)
    verdict, trajectory = classify(reduction.q_squared, params)
    r = count_roots(formula) if args.oracle else None

    report = RunReport(
        instance=args.file,
        n=formula.n,
        num_clauses=formula.num_clauses,
        r=r,
        q_squared=reduction.q_squared,
        params=AmplifierParamsOut(**params.model_dump()),
        verdict=verdict.value,
        crossing_step=trajectory.crossing_step,
        trajectory=trajectory.values if args.with_trajectory else None,
        wall_time=time.perf_counter() - started if args.timing else None,
    )

    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as out:
            write_trajectory_csv(trajectory, out, column_label(reduction.q_squared))
    if args.dump_state:
        with open(args.dump_state, "w", encoding="utf-8") as out:
            dump_state_csv(state, out)
    if args.record:
        init_db()
        db_gen = get_db()
        db = next(db_gen)
        try:
            logger.info(normalize_and_insert_report(report, text, db))
        finally:
            db_gen.close()

    _emit(report)
    return EXIT_SAT if verdict is Verdict.SAT else EXIT_UNSAT


def cmd_oracle(args) -> int:
    formula, _ = read_formula_file(args.file)
    r = count_roots(formula)
    _emit(OracleReport(
        instance=args.file,
        n=formula.n,
        r=r,
        fraction=r / 2**formula.n,
        formula=formula_to_json(formula) if args.formula else None,
    ))
    return EXIT_SAT if r > 0 else EXIT_UNSAT


def cmd_amplify(args) -> int:
    q2_values: List[float] = args.q2
    n = max(effective_qubits(q2) for q2 in q2_values)
    params = _params(args, n)

    if len(q2_values) == 1:
        q2 = q2_values[0]
        trajectory = iterate(q2, params)
        logger.info(f"q^2={q2!r}: crossing step {trajectory.crossing_step} (k_max {params.k_max})")
        if args.json:
            print(json.dumps({
                "q_squared": q2,
                "params": params.model_dump(),
                "values": trajectory.values,
                "crossing_step": trajectory.crossing_step,
            }, indent=2))
        else:
            write_trajectory_csv(trajectory, sys.stdout, column_label(q2))
        return EXIT_OK

    table = trace_amplification(q2_values, params)
    if args.json:
        print(json.dumps({"params": params.model_dump(), **table_to_json(table)}, indent=2))
    else:
        write_table_csv(table, sys.stdout)
    return EXIT_OK


def cmd_lyapunov(args) -> int:
    estimate = lyapunov(a=args.a, x0=args.x0, burn_in=args.burn, samples=args.samples)
    _emit(LyapunovReport(
        a=args.a,
        x0=args.x0,
        burn_in=args.burn,
        samples=args.samples,
        exponent=estimate.exponent if math.isfinite(estimate.exponent) else None,
        used=estimate.used,
        skipped=estimate.skipped,
    ), exclude_none=False)
    return EXIT_OK


def cmd_gate_evolve(args) -> int:
    request = load_gate_request(read_json_file(args.spec))
    dt = args.dt if args.dt is not None else request.dt
    samples = evolve_spinor_trace(request.phi0, request.spec, request.T, dt, request.every)
    final = samples[-1][1]

    if args.json:
        summary = {
            "T": request.T,
            "dt": dt,
            "g": request.spec.g,
            "b_form": request.spec.b_form,
            "final": [complex_to_pair(final.c0), complex_to_pair(final.c1)],
            "norm": final.norm,
        }
        if request.spec.g == 0.0 or request.spec.b_form == "none":
            exact = linear_reference(request.spec.A, request.phi0, request.T)
            summary["linear_deviation"] = float(abs(final.as_array() - exact.as_array()).max())
        print(json.dumps(summary, indent=2))
    elif args.trace:
        with open(args.trace, "w", encoding="utf-8") as out:
            write_spinor_trace_csv(samples, out)
    else:
        write_spinor_trace_csv(samples, sys.stdout)
    return EXIT_OK


def _fields(data, *keys):
    if not isinstance(data, dict) or any(key not in data for key in keys):
        raise DomainError(f"Spec must be a JSON object with fields {list(keys)}")
    return [data[key] for key in keys]


def cmd_gate_slater(args) -> int:
    (orbitals,) = _fields(read_json_file(args.spec), "orbitals")
    state = slater_compose(load_orbitals(orbitals))
    amplitudes = None
    if args.amplitudes:
        amplitudes = [
            {"index": list(index), "value": complex_to_pair(value)}
            for index, value in zip(*_nonzero_entries(state.amplitudes))
        ]
    _emit(SlaterReport(N=state.N, d=state.d, norm=state.norm, is_zero=state.is_zero, amplitudes=amplitudes))
    return EXIT_OK


def _nonzero_entries(tensor):
    indices = [tuple(int(i) for i in index) for index in zip(*tensor.nonzero())]
    return indices, [complex(tensor[index]) for index in indices]


def cmd_gate_overlap(args) -> int:
    a, b = (load_orbitals(orbitals) for orbitals in _fields(read_json_file(args.spec), "a", "b"))
    overlap = slater_overlap(a, b)
    brute = slater_inner(a, b)
    difference = abs(overlap - brute)
    _emit(OverlapReport(
        N=a.shape[0],
        d=a.shape[1],
        overlap=complex_to_pair(overlap),
        brute_force=complex_to_pair(brute),
        abs_difference=difference,
        match=difference <= OVERLAP_TOL,
    ))
    return EXIT_OK


def cmd_gate_hf(args) -> int:
    orb = load_orbital_set(read_json_file(args.spec))
    _, rows = hf_evolve(orb, dt=args.dt if args.dt is not None else DEFAULT_DT, steps=args.steps, every=args.every)
    write_hf_trace_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_runs(args) -> int:
    init_db()
    db_gen = get_db()
    db = next(db_gen)
    try:
        if args.clear:
            count = db.query(RunRecord).count()
            db.query(RunRecord).delete()
            db.commit()
            logger.info(f"Deleted all {count} runs from the archive")
            print(json.dumps({"message": f"Successfully deleted {count} runs"}))
            return EXIT_OK

        query = db.query(RunRecord)
        if args.search:
            query = query.filter(RunRecord.instance.ilike(f"%{args.search}%"))
        # Only sort on real columns
        if args.sort_by and args.sort_by in RunRecord.__table__.columns.keys():
            column = getattr(RunRecord, args.sort_by)
            query = query.order_by(column.desc() if args.order == "desc" else column.asc())

        total = query.count()
        items = query.offset((args.page - 1) * args.limit).limit(args.limit).all()
        print(json.dumps({
            "items": [_run_to_dict(run) for run in items],
            "total": total,
            "page": args.page,
            "size": args.limit,
        }, indent=2))
        return EXIT_OK
    finally:
        db_gen.close()


def _run_to_dict(run: RunRecord) -> dict:
    data = {column.name: getattr(run, column.name) for column in RunRecord.__table__.columns if column.name != "pk"}
    if data.get("created_at") is not None:
        data["created_at"] = data["created_at"].isoformat()
    return data


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _add_amplifier_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--a", type=float, default=DEFAULT_A, help=f"logistic map parameter (default {DEFAULT_A})")
    parser.add_argument("--tau", type=float, default=DEFAULT_TAU, help=f"detection threshold (default {DEFAULT_TAU})")
    parser.add_argument("--kmax", type=_positive_int, default=None, help="iteration budget (default ceil(n ln2 / ln a) + 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaosqc",
        description="Chaotic quantum SAT amplifier: oracle simulation, logistic amplification, nonlinear gates.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="classify a DIMACS or JSON instance through the full pipeline")
    solve.add_argument("file")
    _add_amplifier_flags(solve)
    solve.add_argument("--trace", metavar="PATH", help="write the amplifier trajectory as CSV")
    solve.add_argument("--dump-state", metavar="PATH", help="write the post-oracle state vector as CSV")
    solve.add_argument("--oracle", action="store_true", help="also count roots exhaustively and report r")
    solve.add_argument("--with-trajectory", action="store_true", help="include the trajectory in the report")
    solve.add_argument("--timing", action="store_true", help="include wall_time (reports are then not byte-stable)")
    solve.add_argument("--record", action="store_true", help="archive the report in the run database")
    solve.set_defaults(func=cmd_solve)

    oracle = commands.add_parser("oracle", help="count satisfying assignments exhaustively")
    oracle.add_argument("file")
    oracle.add_argument("--formula", action="store_true", help="include the canonical JSON form of the formula")
    oracle.set_defaults(func=cmd_oracle)

    amplify = commands.add_parser("amplify", help="iterate the logistic amplifier from given q^2 values")
    amplify.add_argument("--q2", type=float, action="append", required=True, help="starting q^2 (repeatable)")
    _add_amplifier_flags(amplify)
    fmt = amplify.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output")
    fmt.add_argument("--csv", action="store_true", help="CSV output (default)")
    amplify.set_defaults(func=cmd_amplify)

    lyap = commands.add_parser("lyapunov", help="estimate the Lyapunov exponent of the logistic map")
    lyap.add_argument("--a", type=float, default=DEFAULT_A)
    lyap.add_argument("--x0", type=float, default=DEFAULT_X0)
    lyap.add_argument("--burn", type=_positive_int, default=DEFAULT_BURN_IN)
    lyap.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES)
    lyap.set_defaults(func=cmd_lyapunov)

    gate = commands.add_parser("gate", help="nonlinear gate and Slater determinant tools")
    gate_commands = gate.add_subparsers(dest="gate_command", required=True)

    evolve = gate_commands.add_parser("evolve", help="integrate i dphi/dt = A phi + B(phi) phi")
    evolve.add_argument("spec")
    evolve.add_argument("--dt", type=float, default=None, help="override the spec time step")
    evolve.add_argument("--trace", metavar="PATH", help="write the CSV trace to PATH instead of stdout")
    evolve.add_argument("--json", action="store_true", help="print a JSON summary instead of the trace")
    evolve.set_defaults(func=cmd_gate_evolve)

    slater = gate_commands.add_parser("slater", help="compose a Slater determinant")
    slater.add_argument("spec")
    slater.add_argument("--amplitudes", action="store_true", help="list the nonzero amplitudes")
    slater.set_defaults(func=cmd_gate_slater)

    overlap = gate_commands.add_parser("overlap", help="determinant overlap checked against brute force")
    overlap.add_argument("spec")
    overlap.set_defaults(func=cmd_gate_overlap)

    hf = gate_commands.add_parser("hf", help="time-dependent Hartree-Fock evolution on a grid")
    hf.add_argument("spec")
    hf.add_argument("--dt", type=float, default=None)
    hf.add_argument("--steps", type=int, default=1000)
    hf.add_argument("--every", type=_positive_int, default=100)
    hf.set_defaults(func=cmd_gate_hf)

    runs = commands.add_parser("runs", help="list, search or clear archived solve runs")
    runs.add_argument("--page", type=_positive_int, default=1)
    runs.add_argument("--limit", type=_positive_int, default=10)
    runs.add_argument("--sort-by", default=None)
    runs.add_argument("--order", choices=("asc", "desc"), default="asc")
    runs.add_argument("--search", default=None, help="instance path substring")
    runs.add_argument("--clear", action="store_true", help="delete every archived run")
    runs.set_defaults(func=cmd_runs)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
