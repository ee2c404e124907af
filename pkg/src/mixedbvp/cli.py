"""Command line front end.

Subcommands:
  solve        read a config file, solve, write solution.csv plus the
               metadata / denominator / residual JSON reports
  denominator  separation verdict for rational a/pi, or a Diophantine
               scan for a tagged irrational
  eigs         eigenvalues (and optionally eigenvector samples) of the
               x-direction operator
  verify       solve and run the verification suite against thresholds

Exit codes: 0 success, 1 runtime failure, 2 invalid input, 3 singular
mode carrying data, 4 parameter case outside the tabulated families.
All JSON artifacts are byte-deterministic; timestamps only ever go to
run.log.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._util import dump_json, format_float, jsonable
from .denominators import (
    CaseNotTabulated,
    IrrationalInput,
    classify_phase,
    continued_fraction,
    diophantine_scan,
    separation_check,
)
from .eigen import eigen_to_csv, model_eigenpairs, numeric_eigenpairs
from .problem import (
    BoundaryFunction,
    ExpressionError,
    PiRatio,
    ValidationError,
    load_config,
)
from .series import (
    OutOfDomain,
    SingularModeWithData,
    solution_to_csv,
    solve_problem,
)
from .verify import run_verification

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2
EXIT_SINGULAR = 3
EXIT_UNTABULATED = 4


def _emit(payload: dict, out: str | None) -> None:
    if out:
        dump_json(jsonable(payload), out)
    else:
        import json

        json.dump(jsonable(payload), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _solve_from_config(args):
    spec, options = load_config(args.config)
    K = args.K if args.K is not None else int(options.get("K", 20))
    tol = float(options.get("tol", 1e-10))
    tol_singular = float(options.get("tol_singular", 1e-10))
    field = solve_problem(spec, K, tol, tol_singular=tol_singular)
    return spec, options, field


def _cmd_solve(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_lines = []

    def stamp(msg: str) -> None:
        log_lines.append(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {msg}")

    stamp(f"solve start: config={args.config}")
    spec, options, field = _solve_from_config(args)
    stamp(
        f"modes solved: K_active={field.K_active} of {field.K_requested}, "
        f"denominator verdict {field.denominator.verdict}"
    )
    grid = args.grid if args.grid is not None else int(options.get("grid", 101))
    xs = np.linspace(0.0, math.pi, grid)
    ys = np.linspace(-spec.a, spec.a, grid)
    solution_to_csv(field, xs, ys, out / "solution.csv")
    dump_json(jsonable(field.metadata_dict()), out / "metadata.json")
    dump_json(jsonable(field.denominator.to_json_dict()), out / "denominator.json")
    report = run_verification(field)
    dump_json(jsonable(report), out / "residual.json")
    stamp("artifacts written: solution.csv metadata.json denominator.json residual.json")
    (out / "run.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    status = "ok" if report["ok"] else "with verification failures"
    print(f"wrote {out}/solution.csv ({grid}x{grid}), K_active={field.K_active}, {status}")
    return EXIT_OK


def _cmd_denominator(args) -> int:
    if args.tau is not None:
        if args.phase is not None:
            phase = Fraction(args.phase)
        elif args.two_n is not None:
            if args.two_n % 2 or args.two_n <= 0:
                raise ValidationError("--two-n must be a positive even integer")
            phase = classify_phase(args.two_n // 2, args.gamma, args.q)
        else:
            phase = Fraction(0)
        try:
            tau: object = Fraction(args.tau)
        except ValueError:
            tau = args.tau
        scan = diophantine_scan(tau, args.b, args.epsilon, phase, args.kmax)
        payload = scan.summary()
        order = np.argsort(scan.w)[:5]
        payload["smallest"] = [
            {"k": int(scan.k[i]), "w": float(scan.w[i]), "raw": float(scan.raw[i])}
            for i in order
        ]
        if args.cf_depth:
            cf = continued_fraction(tau, args.cf_depth)
            payload["continued_fraction"] = {
                "quotients": cf.quotients,
                "convergents": [str(c) for c in cf.convergents],
                "terminated": cf.terminated,
                "near_rational": cf.near_rational,
            }
    else:
        missing = [
            name for name, val in (
                ("--two-n", args.two_n), ("--gamma", args.gamma),
                ("--q", args.q), ("--a-ratio", args.a_ratio),
            ) if val is None
        ]
        if missing:
            raise ValidationError(
                "rational route needs " + " ".join(missing) + " (or pass --tau to scan)"
            )
        if args.two_n % 2 or args.two_n <= 0:
            raise ValidationError("--two-n must be a positive even integer")
        phase = classify_phase(args.two_n // 2, args.gamma, args.q)
        ratio = PiRatio.parse(args.a_ratio)
        sep = separation_check(ratio, phase)
        payload = {
            "phase_over_pi": str(phase.phase_over_pi),
            "table_row": phase.table_row,
            "separated": sep.separated,
            "delta1": sep.delta1,
            "reason": sep.reason,
            "a_over_pi": f"{sep.numerator}/{sep.denominator}",
        }
    _emit(payload, args.out)
    return EXIT_OK


def _cmd_eigs(args) -> int:
    if args.p0.strip() in ("", "0"):
        basis = model_eigenpairs(args.s, args.K)
    else:
        p0 = BoundaryFunction.from_expression(args.p0)
        basis = numeric_eigenpairs(args.s, p0, args.K, grid_size=args.grid)
    if args.out:
        eigen_to_csv(basis, args.out, include_samples=args.samples)
        print(f"wrote {args.out} ({basis.K} modes, {basis.kind} basis)")
    else:
        for pair in basis.pairs:
            print(f"{pair.k},{format_float(pair.lam)}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec, options, field = _solve_from_config(args)
    thresholds = {
        "pde_termwise": args.pde_tol,
        "pde_fd": args.fd_tol,
        "boundary_rel": args.boundary_tol,
        "matching_rel": args.matching_tol,
    }
    report = run_verification(field, thresholds)
    if args.out:
        dump_json(jsonable(report), args.out)
    for line in report["failures"]:
        print(f"FAIL {line}")
    if report["ok"]:
        print(
            f"verification ok: termwise {report['pde']['termwise_upper']:.2e}/"
            f"{report['pde']['termwise_lower']:.2e}, "
            f"fd {report['pde']['fd_upper']:.2e}/{report['pde']['fd_lower']:.2e}"
        )
        return EXIT_OK
    return EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixedbvp",
        description="Series solver and denominator analysis for a mixed "
        "elliptic-hyperbolic boundary value problem on a rectangle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a problem from a config file")
    sp.add_argument("--config", required=True, help="path to a key=value config file")
    sp.add_argument("--out", default="out", help="output directory")
    sp.add_argument("--grid", type=int, default=None, help="solution.csv grid size")
    sp.add_argument("--K", type=int, default=None, help="override mode count")
    sp.set_defaults(func=_cmd_solve)

    dp = sub.add_parser("denominator", help="separation verdict or Diophantine scan")
    dp.add_argument("--two-n", dest="two_n", type=int, default=None,
                    help="y-operator order 2n")
    dp.add_argument("--gamma", type=int, default=None, help="lower-edge stride")
    dp.add_argument("--q", type=int, default=None, help="lower-edge base order")
    dp.add_argument("--a-ratio", dest="a_ratio", default=None,
                    help="a/pi as p/q for the exact separation test")
    dp.add_argument("--tau", default=None,
                    help="irrational a/pi (name like sqrt2, or a decimal) to scan")
    dp.add_argument("--b", type=int, default=1, help="exponent b = s/n for the scan")
    dp.add_argument("--epsilon", type=float, default=0.25, help="scan weight exponent")
    dp.add_argument("--kmax", type=int, default=2000, help="scan range")
    dp.add_argument("--phase", default=None,
                    help="phase as a fraction of pi (overrides the table)")
    dp.add_argument("--cf-depth", dest="cf_depth", type=int, default=0,
                    help="also print this many continued fraction terms")
    dp.add_argument("--out", default=None, help="write JSON here instead of stdout")
    dp.set_defaults(func=_cmd_denominator)

    ep = sub.add_parser("eigs", help="eigenvalues of the x-direction operator")
    ep.add_argument("--s", type=int, required=True, help="half the x-operator order")
    ep.add_argument("--p0", default="0", help="potential p0(x) expression")
    ep.add_argument("--K", type=int, default=10, help="number of modes")
    ep.add_argument("--grid", type=int, default=512, help="difference grid size")
    ep.add_argument("--samples", action="store_true", help="include eigenvector samples")
    ep.add_argument("--out", default=None, help="CSV output path")
    ep.set_defaults(func=_cmd_eigs)

    vp = sub.add_parser("verify", help="solve then check residuals and data")
    vp.add_argument("--config", required=True)
    vp.add_argument("--K", type=int, default=None)
    vp.add_argument("--out", default=None, help="write the report JSON here")
    vp.add_argument("--pde-tol", dest="pde_tol", type=float, default=1e-8)
    vp.add_argument("--fd-tol", dest="fd_tol", type=float, default=1e-3)
    vp.add_argument("--boundary-tol", dest="boundary_tol", type=float, default=5e-4)
    vp.add_argument("--matching-tol", dest="matching_tol", type=float, default=1e-8)
    vp.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SingularModeWithData as exc:
        _report_failure(args, exc, EXIT_SINGULAR)
        return EXIT_SINGULAR
    except CaseNotTabulated as exc:
        _report_failure(args, exc, EXIT_UNTABULATED)
        return EXIT_UNTABULATED
    except (ValidationError, ExpressionError, IrrationalInput, OutOfDomain) as exc:
        _report_failure(args, exc, EXIT_INVALID)
        return EXIT_INVALID
    except (ValueError, RuntimeError, OSError) as exc:
        _report_failure(args, exc, EXIT_RUNTIME)
        return EXIT_RUNTIME


def _report_failure(args, exc: Exception, code: int) -> None:
    print(f"error: {exc}", file=sys.stderr)
    out = getattr(args, "out", None)
    if out and args.command == "solve":
        out_dir = Path(out)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            dump_json(
                {"error": type(exc).__name__, "message": str(exc), "exit_code": code},
                out_dir / "error.json",
            )
        except OSError:
            pass


if __name__ == "__main__":
    sys.exit(main())
