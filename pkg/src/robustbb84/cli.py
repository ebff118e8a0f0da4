"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 infeasible data, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .calibration import DataMatrix, diagonal_data
from .errors import DomainError, InfeasibleError, UndefinedCellError
from .keyrate import OptimizerOptions, rate_from_data, symmetric_rate
from .qubit import MeasurementModel, TwoQubitState, X_AXIS, Z_AXIS, werner_state
from .simulation import SimConfig, run
from .verification import run_checks

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3, 4

NO_KEY = "no positive key rate guaranteed"


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _options(args):
    try:
        return OptimizerOptions(x_max=args.xmax, theta_points=args.grid)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from None


def _print_report(report, as_json, out):
    if as_json:
        out.write(json.dumps(report.to_dict()) + "\n")
        return
    out.write(f"mutual_info: {report.mutual_info:.6f}\n")
    out.write(f"adversary_bound: {report.adversary_bound:.6f}\n")
    out.write(f"rate: {report.rate:.6f}\n")
    out.write(f"rate_clamped: {report.rate_clamped:.6f}\n")
    if report.qber is not None:
        out.write(f"qber: {report.qber:.6f}\n")
    t = report.optimizer_trace
    if t is not None:
        p = t.best_params
        out.write(f"optimizer_iterations: {t.iterations}\n")
        out.write(
            "optimizer_best_params: "
            f"x1={p.x1:.6f} x2={p.x2:.6f} x3={p.x3:.6f} x4={p.x4:.6f} theta={p.theta:.6f}\n"
        )
        out.write(f"optimizer_feasibility_margin: {t.feasibility_margin:.6f}\n")
    if report.rate < 0:
        out.write(NO_KEY + "\n")


def cmd_rate(args, out):
    opts = _options(args)
    if args.qber is not None:
        if not 0.0 <= args.qber <= 0.5:
            raise CliError(f"--qber must lie in [0, 0.5], got {args.qber}", EXIT_INPUT)
        if args.optimize:
            report = rate_from_data(diagonal_data(1.0 - 2.0 * args.qber), opts, method="optimize")
        else:
            report = symmetric_rate(args.qber)
    else:
        d = DataMatrix.from_json(_read(args.data))
        report = rate_from_data(d, opts, method="optimize" if args.optimize else "auto")
    _print_report(report, args.json, out)
    return EXIT_OK


def sweep_rows(qmin, qmax, steps):
    for q in np.linspace(qmin, qmax, steps):
        r = symmetric_rate(float(q))
        yield float(q), r.mutual_info, r.adversary_bound, r.rate


def format_sweep(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["qber", "mutual_info", "adversary_bound", "key_rate"])
    for row in rows:
        w.writerow([f"{v:.6f}" for v in row])
    return buf.getvalue()


def cmd_sweep(args, out):
    if not (0.0 <= args.qber_min < args.qber_max <= 0.5):
        raise CliError("need 0 <= --qber-min < --qber-max <= 0.5", EXIT_INPUT)
    if args.steps < 2:
        raise CliError("--steps must be at least 2", EXIT_INPUT)
    text = format_sweep(sweep_rows(args.qber_min, args.qber_max, args.steps))
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    return EXIT_OK


def _load_state(path):
    try:
        obj = json.loads(_read(path))
        real = np.array(obj["real"], dtype=float)
        imag = np.array(obj.get("imag", np.zeros_like(real)), dtype=float)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CliError(f'state file needs {{"real": 4x4, "imag": 4x4}}: {exc}', EXIT_INPUT) from None
    return TwoQubitState(real + 1j * imag)


def _second_axis(theta):
    # in the Z-X plane, theta measured from Z towards X
    return (math.sin(theta), 0.0, math.cos(theta))


def cmd_simulate(args, out):
    if args.rounds < 1:
        raise CliError("--rounds must be positive", EXIT_INPUT)
    state = werner_state(args.visibility) if args.state is None else _load_state(args.state)
    alice = (
        MeasurementModel(Z_AXIS, args.eta_a, args.bias_a),
        MeasurementModel(_second_axis(args.theta_a), args.eta_a2, args.bias_a2),
    )
    bob = (
        MeasurementModel(Z_AXIS, args.eta_b, args.bias_b),
        MeasurementModel(X_AXIS, args.eta_b2, args.bias_b2),
    )
    cfg = SimConfig(state=state, alice=alice, bob=bob, rounds=args.rounds, seed=args.seed)
    est = run(cfg, workers=args.workers)
    if args.out:
        _write(args.out, est.to_json() + "\n")
    report = rate_from_data(est.d, _options(args))
    _print_report(report, args.json, out)
    return EXIT_OK


def cmd_verify(args, out):
    results = run_checks(deep=args.deep)
    for r in results:
        out.write(r.line() + "\n")
    ok = all(r.passed for r in results)
    out.write(("all checks passed" if ok else "verification FAILED") + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


def _add_optimizer_flags(p):
    p.add_argument("--xmax", type=float, default=8.0, help="upper limit for x4 in the search box")
    p.add_argument("--grid", type=int, default=721, help="number of theta grid points")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="robustbb84",
        description="Calibration-robust key rates for entanglement-based BB84.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="key rate from a QBER or a data-matrix file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--qber", type=float)
    src.add_argument("--data", metavar="FILE")
    p.add_argument("--optimize", action="store_true", help="force the numerical optimiser")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("sweep", help="CSV of the symmetric rate over a QBER range")
    p.add_argument("--qber-min", type=float, required=True)
    p.add_argument("--qber-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the data matrix")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--visibility", type=float)
    src.add_argument("--state", metavar="FILE")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    for side in ("a", "a2", "b", "b2"):
        p.add_argument(f"--eta-{side}", type=float, default=1.0)
        p.add_argument(f"--bias-{side}", type=float, default=0.0)
    p.add_argument("--theta-a", type=float, default=math.pi / 2,
                   help="angle between Alice's two Bloch axes (radians)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="FILE")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the built-in oracle checks")
    p.add_argument("--deep", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except CliError as exc:
        err.write(f"error: {exc}\n")
        return exc.code
    except (InfeasibleError, UndefinedCellError) as exc:
        err.write(f"infeasible data: {exc}\n")
        return EXIT_INFEASIBLE
    except DomainError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
