"""
Command-line front end: hpds-reduce <command> [options].

Commands write JSON reports (or CSV trajectories) to --out, or to stdout
when --out is omitted. Errors print ``Error: <message>`` on stderr and map
to exit codes 2 (input), 3 (precondition) and 4 (numerical).
"""

import argparse
import logging
import sys
import time

import numpy as np

from . import __version__
from .analysis import (
    check_controllability_preservation,
    check_odeco_preservation,
    check_observability_preservation,
    check_stability_preservation,
    controllability_matrix,
    observability_matrix,
    stability_classify,
)
from .config import DT, RANK_TOL, SIZE_CAP, SYMMETRY_TOL, configure_logging
from .decomposition import mode_singular_values
from .errors import HpdsError, InputError, OddOrderError
from .generators import EXAMPLE1_X0, KINDS, generate
from .hpds import ControlSignal, param_count, simulate
from .model_io import (
    build_report,
    read_model,
    write_model,
    write_columns_csv,
    write_report,
    write_trajectory_csv,
)
from .reduction import ReducedModel, lift_state, project_state, reduce
from .tensor_core import is_almost_symmetric, is_symmetric

logger = logging.getLogger(__name__)


def parse_vector(text, name):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as err:
        raise InputError(f"{name} must be a comma-separated list of numbers, got {text!r}") from err


def parse_control(spec, m):
    """zero | const:u1,...,um | piecewise:t0=u..;t1=u.. (values held until the next breakpoint)."""
    if spec is None or spec == "zero":
        return ControlSignal.zero(m)
    kind, _, body = spec.partition(":")
    if kind == "const":
        u = parse_vector(body, "--u")
        if u.size != m:
            raise InputError(f"--u has {u.size} entries, model has m={m} inputs")
        return ControlSignal.constant(u)
    elif kind == "piecewise":
        times, values = [], []
        for piece in body.split(";"):
            t, sep, u = piece.partition("=")
            if not sep:
                raise InputError(f"piecewise control piece {piece!r} must look like t=u1,u2")
            times.append(float(t))
            values.append(parse_vector(u, "--u"))
        if any(v.size != m for v in values):
            raise InputError(f"every piecewise control value needs m={m} entries")
        return ControlSignal.piecewise(times, values)
    raise InputError(f"unknown control spec {spec!r}; use zero, const:... or piecewise:...")


def _initial_state(args, model, flag="x0"):
    text = getattr(args, flag)
    if text is not None:
        x = parse_vector(text, f"--{flag}")
    elif model.metadata.get("name") == "example1":
        x = EXAMPLE1_X0.copy()
    else:
        raise InputError(f"--{flag} is required for this model")
    if x.size != model.n:
        raise InputError(f"--{flag} has {x.size} entries, model has n={model.n}")
    return x


def _reduced_from_file(path, n):
    f = read_model(path)
    if f.projection is None:
        raise InputError(f"{path} carries no projection; produce it with 'hpds-reduce reduce'")
    if f.projection.shape[0] != n:
        raise InputError(f"projection in {path} has {f.projection.shape[0]} rows, model has n={n}")
    return ReducedModel(model=f.model, V=f.projection)


def cmd_gen(args):
    model = generate(args.kind, n=args.n, k=args.k, r=args.r, m=args.m, l=args.l, seed=args.seed)
    write_model(args.out, model)
    return {"kind": args.kind, "n": model.n, "k": model.k, "m": model.m, "l": model.l}


def cmd_reduce(args):
    f = read_model(args.model)
    reduced, report = reduce(f.model, tol=args.tol, rank=args.rank)
    reduction = {"r": report.r, "r_k": report.r_k, "criterion": report.criterion,
                 "source": f.model.metadata.get("name")}
    write_model(args.out, reduced.model, projection=reduced.V, reduction=reduction)
    return report.to_dict()


def _trajectory_dict(traj):
    return {
        "times": traj.times,
        "states": traj.states,
        "outputs": traj.outputs,
        "diverged_at": traj.diverged_at,
        "final_norm": float(np.linalg.norm(traj.final_state)),
    }


def cmd_simulate(args):
    model = read_model(args.model).model
    x0 = _initial_state(args, model)
    if args.u is not None and not model.m:
        raise InputError("--u was given but the model has no input matrix B")
    u = parse_control(args.u, model.m) if model.m else None
    traj = simulate(model, x0, u=u, t_span=(0.0, args.tmax), dt=args.dt, method=args.method)
    if traj.diverged_at is not None:
        logger.warning("simulation stopped at t=%.6g: divergence bound exceeded", traj.diverged_at)
    if args.format == "csv":
        write_trajectory_csv(args.out, traj)
        if not args.report:
            return None
        return {
            "steps": int(traj.times.size - 1),
            "t_final": float(traj.times[-1]),
            "diverged_at": traj.diverged_at,
            "final_norm": float(np.linalg.norm(traj.final_state)),
        }
    return _trajectory_dict(traj)


def _common_length(a, b):
    return min(a.times.size, b.times.size)


def cmd_compare(args):
    model = read_model(args.model).model
    reduced = _reduced_from_file(args.reduced, model.n)
    V = reduced.V
    x0 = _initial_state(args, model)
    z0 = project_state(V, x0)
    complement = x0 - lift_state(V, z0)

    t_span, dt = (0.0, args.tmax), args.dt
    full = simulate(model, x0, t_span=t_span, dt=dt, method=args.method)
    red = simulate(reduced.model, z0, t_span=t_span, dt=dt, method=args.method)
    n = _common_length(full, red)
    lifted = lift_state(V, red.states[:n])
    state_err = np.linalg.norm(full.states[:n] - lifted, axis=1)
    corrected_err = np.linalg.norm(full.states[:n] - complement - lifted, axis=1)

    output_err = None
    if full.outputs is not None and red.outputs is not None:
        output_err = np.linalg.norm(full.outputs[:n] - red.outputs[:n], axis=1)

    if args.format == "csv":
        header = ["t", "state_error", "state_error_complement_corrected"]
        columns = [full.times[:n], state_err, corrected_err]
        if output_err is not None:
            header.append("output_error")
            columns.append(output_err)
        write_columns_csv(args.out, header, np.column_stack(columns))
        return None
    return {
        "r": reduced.r,
        "z0": z0,
        "complement_norm": float(np.linalg.norm(complement)),
        "max_state_error": float(np.max(state_err)),
        "max_state_error_complement_corrected": float(np.max(corrected_err)),
        "max_output_error": None if output_err is None else float(np.max(output_err)),
        "final_norm_full": float(np.linalg.norm(full.final_state)),
        "final_norm_reduced": float(np.linalg.norm(red.final_state)),
        "diverged_at_full": full.diverged_at,
        "diverged_at_reduced": red.diverged_at,
    }


def cmd_stability(args):
    model = read_model(args.model).model
    x0 = _initial_state(args, model)
    verdict = stability_classify(model.A, x0, tol=args.tol)
    result = verdict.to_dict()
    if args.reduced:
        reduced = _reduced_from_file(args.reduced, model.n)
        result["preservation"] = check_stability_preservation(model, reduced, x0, args.tol).to_dict()
        result["odeco_preservation"] = vars(check_odeco_preservation(model, reduced, args.tol))
    return result


def cmd_controllability(args):
    model = read_model(args.model).model
    if model.B is None:
        raise InputError("model has no input matrix B")
    if model.k % 2 and not args.accessibility:
        raise OddOrderError(model.k)
    ctrl = controllability_matrix(model.A, model.B, max_level=args.max_level,
                                  rank_tol=args.rank_tol)
    result = ctrl.to_dict()
    if args.reduced:
        check = check_controllability_preservation(
            model, _reduced_from_file(args.reduced, model.n), max_level=args.max_level,
            rank_tol=args.rank_tol,
        )
        result["preservation"] = check.to_dict()
    return result


def cmd_observability(args):
    model = read_model(args.model).model
    if model.C is None:
        raise InputError("model has no output matrix C")
    x = _initial_state(args, model, flag="x")
    obs = observability_matrix(model.A, model.C, x, max_level=args.max_level,
                               size_cap=args.size_cap, rank_tol=args.rank_tol)
    result = obs.to_dict()
    if args.reduced:
        check = check_observability_preservation(
            model, _reduced_from_file(args.reduced, model.n), x, max_level=args.max_level,
            size_cap=args.size_cap, rank_tol=args.rank_tol,
        )
        result["preservation"] = check.to_dict()
    return result


def cmd_info(args):
    f = read_model(args.model)
    model = f.model
    info = {
        "order": model.k,
        "dim": model.n,
        "m": model.m,
        "l": model.l,
        "almost_symmetric": is_almost_symmetric(model.A, SYMMETRY_TOL),
        "symmetric": is_symmetric(model.A, SYMMETRY_TOL),
        "mode_singular_values": mode_singular_values(model.A, 0),
        "param_count": param_count(model.n, model.k, model.m, model.l),
        "metadata": model.metadata,
    }
    if f.projection is not None:
        info["projection_shape"] = list(f.projection.shape)
        info["reduction"] = f.reduction
    return info


COMMANDS = {
    "gen": cmd_gen,
    "reduce": cmd_reduce,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "stability": cmd_stability,
    "controllability": cmd_controllability,
    "observability": cmd_observability,
    "info": cmd_info,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hpds-reduce",
        description="HOSVD-based reduction and analysis of tensor homogeneous polynomial systems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a model file")
    gen.add_argument("kind", choices=KINDS)
    gen.add_argument("--n", type=int, help="State dimension")
    gen.add_argument("--k", type=int, help="Tensor order")
    gen.add_argument("--r", type=int, help="Number of nonzero lambdas (odeco)")
    gen.add_argument("--m", type=int, default=0, help="Input dimension")
    gen.add_argument("--l", type=int, default=0, help="Output dimension")
    gen.add_argument("--seed", type=int, help="Random seed (required for random kinds)")
    gen.add_argument("--out", help="Model file (stdout if omitted)")

    red = sub.add_parser("reduce", help="Reduce a model by compact HOSVD")
    red.add_argument("model")
    criterion = red.add_mutually_exclusive_group()
    criterion.add_argument("--tol", type=float, help="Relative singular value threshold")
    criterion.add_argument("--rank", type=int, help="Fixed reduced dimension")
    red.add_argument("--out", required=True, help="Reduced model file")
    red.add_argument("--report", help="Report file (stdout if omitted)")

    sim = sub.add_parser("simulate", help="Integrate a model")
    sim.add_argument("model")
    sim.add_argument("--x0", help="Initial state, comma-separated")
    sim.add_argument("--u", help="Control: zero, const:u1,... or piecewise:t=u;...")
    _add_integration_flags(sim)
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--out", help="Output file (stdout if omitted)")
    sim.add_argument("--report", help="JSON summary with diverged_at, written next to a CSV trajectory")

    cmp_ = sub.add_parser("compare", help="Simulate a model and its reduction side by side")
    cmp_.add_argument("model")
    cmp_.add_argument("reduced")
    cmp_.add_argument("--x0", help="Initial state of the full model, comma-separated")
    _add_integration_flags(cmp_)
    cmp_.add_argument("--format", choices=("json", "csv"), default="json")
    cmp_.add_argument("--out", help="Output file (stdout if omitted)")

    stab = sub.add_parser("stability", help="Classify stability of an odeco system")
    stab.add_argument("model")
    stab.add_argument("--x0", help="Initial state, comma-separated")
    stab.add_argument("--tol", type=float, help="Odeco tolerance")
    stab.add_argument("--reduced", help="Reduced model file to check preservation against")
    stab.add_argument("--out", help="Report file (stdout if omitted)")

    ctrl = sub.add_parser("controllability", help="Tensor controllability rank test")
    ctrl.add_argument("model")
    ctrl.add_argument("--accessibility", action="store_true",
                      help="Allow odd order, where full rank certifies accessibility only")
    _add_rank_flags(ctrl)
    ctrl.add_argument("--reduced", help="Reduced model file to check preservation against")
    ctrl.add_argument("--out", help="Report file (stdout if omitted)")

    obs = sub.add_parser("observability", help="Local weak observability rank test")
    obs.add_argument("model")
    obs.add_argument("--x", help="State at which to test, comma-separated")
    _add_rank_flags(obs)
    obs.add_argument("--size-cap", type=int, default=SIZE_CAP,
                     help="Largest intermediate (entries) before giving up as inconclusive")
    obs.add_argument("--reduced", help="Reduced model file to check preservation against")
    obs.add_argument("--out", help="Report file (stdout if omitted)")

    info = sub.add_parser("info", help="Summarize a model file")
    info.add_argument("model")
    info.add_argument("--out", help="Report file (stdout if omitted)")
    return parser


def _add_integration_flags(p):
    p.add_argument("--tmax", type=float, default=10.0, help="Final time")
    p.add_argument("--dt", type=float, default=DT, help="Step size")
    p.add_argument("--method", choices=("rk4", "euler"), default="rk4")


def _add_rank_flags(p):
    p.add_argument("--max-level", type=int, help="Highest level to build (default n-1)")
    p.add_argument("--rank-tol", type=float, default=RANK_TOL, help="Relative rank tolerance")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging("DEBUG" if args.verbose else None)

    started = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except HpdsError as error:
        print(f"Error: {error}", file=sys.stderr)
        return error.exit_code
    except (ValueError, ArithmeticError) as error:
        # numpy/scipy failures that escaped the library checks
        print(f"Error: {error}", file=sys.stderr)
        return 4

    elapsed = time.perf_counter() - started
    logger.info("%s finished in %.3fs", args.command, elapsed)
    if result is None or args.command == "gen":
        return 0
    arguments = {k: v for k, v in vars(args).items() if k != "verbose"}
    report = build_report(args.command, arguments, result, elapsed)
    sidecar = args.command == "reduce" or (args.command == "simulate" and args.format == "csv")
    destination = args.report if sidecar else args.out
    write_report(destination, report)
    return 0
