"""Command-line entry point.

Exit status: 0 on success, 1 when a verifier fails, 2 on usage errors.
All tabular output is CSV and is a pure function of the arguments.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from .data import DataError, LemmaOneSource, load_csv
from .erm import ErmConfig, empirical_risk, erm_solve
from .harness import (
    CurveSetup,
    Learner,
    estimate_rho,
    estimate_theta,
    risk_curve,
    theta_bootstrap,
    verify_all_lemmas,
)
from .harness.seeding import PILOT, rng_for
from .losses import compute_constants, loss_derivative
from .ons import OnsConfig, run_ons
from .records import VerifierRecord


def _n_grid(text: str) -> list[int]:
    """``128,256,...,16384`` expands a doubling sequence."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    out: list[int] = []
    for i, p in enumerate(parts):
        if p == "...":
            if i == 0 or i == len(parts) - 1 or len(out) < 2:
                raise argparse.ArgumentTypeError("'...' needs two leading sizes and an end size")
            ratio = out[-1] / out[-2]
            end = int(parts[i + 1])
            nxt = out[-1] * ratio
            while nxt < end:
                out.append(int(round(nxt)))
                nxt *= ratio
            continue
        try:
            out.append(int(p))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad size {p!r}") from exc
    return out


def _add_problem(p, q_default=0.2):
    p.add_argument("--loss", choices=["logistic", "squared"], default="logistic")
    p.add_argument("--d", type=int, default=5, help="feature dimension")
    p.add_argument("--radius", type=float, default=1.0, help="ball radius R")
    p.add_argument("--q", type=float, default=q_default, help="label flip probability floor")
    p.add_argument("--seed", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="expconcave", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-online", help="run the online Newton learner")
    _add_problem(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, help="curvature constant theta; estimated if omitted")
    p.add_argument("--eta1", type=float)
    p.add_argument("--a", type=float, dest="smoothing_a")
    p.add_argument("--literal-gradient", action="store_true",
                   help="use v = l'(y w.x) x without the label factor")
    p.add_argument("--trace", metavar="PATH", help="write per-step CSV trace")
    p.add_argument("--data", metavar="CSV", help="train on a CSV file instead of synthetic draws")
    p.add_argument("--strict", action="store_true", help="reject rows with ||x|| > 1")

    p = sub.add_parser("train-batch", help="solve empirical risk minimization")
    _add_problem(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grad-tol", type=float, default=1e-9)
    p.add_argument("--data", metavar="CSV")
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("risk-curve", help="excess risk versus sample size")
    _add_problem(p)
    p.add_argument("--learner", choices=[l.value for l in Learner], required=True)
    p.add_argument("--n-grid", type=_n_grid, default=_n_grid("128,256,...,16384"))
    p.add_argument("--repeats", type=int, default=16)
    p.add_argument("--n-eval", type=int, default=200_000)
    p.add_argument("--theta", type=float)
    p.add_argument("--step-c", type=float, help="OGD step constant (default 2R/G)")
    p.add_argument("--literal-gradient", action="store_true")
    p.add_argument("--out", required=True, metavar="PATH")

    p = sub.add_parser("check-assumptions", help="estimate theta and compare with the label-floor bound")
    _add_problem(p)
    p.add_argument("--n-est", type=int, default=10_000)

    p = sub.add_parser("verify-lemmas", help="randomized checks of the supporting inequalities")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    return ap


def _writer():
    return csv.writer(sys.stdout, lineterminator="\n")


def _problem(args):
    try:
        loss = compute_constants(args.loss, args.radius)
        source = LemmaOneSource.default(args.d, args.q, args.radius, args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    return loss, source


def _training_data(args, source):
    if args.data:
        return load_csv(args.data, strict=args.strict)
    return source.sample(args.n, rng_for(args.seed, args.n, 0))


def cmd_train_online(args) -> int:
    loss, source = _problem(args)
    data = _training_data(args, source)
    theta = args.theta
    if theta is None:
        theta = estimate_theta(source, loss, seed=args.seed)
    cfg = OnsConfig.defaults(loss, data.dim, theta, eta1=args.eta1, smoothing_a=args.smoothing_a,
                             literal_gradient=args.literal_gradient)
    run = run_ons(data.X, data.y, loss, cfg)
    if args.trace:
        run.write_trace(args.trace)
    out = _writer()
    out.writerow(["key", "value"])
    for key, val in [("n", len(data)), ("d", data.dim), ("theta", cfg.theta), ("eta1", cfg.eta1),
                     ("a", cfg.smoothing_a), ("cumulative_loss", float(run.losses.sum())),
                     ("train_risk_average", empirical_risk(data, loss, run.average))]:
        out.writerow([key, repr(val) if isinstance(val, float) else val])
    for i, v in enumerate(run.average):
        out.writerow([f"w_avg[{i}]", repr(float(v))])
    return 0


def cmd_train_batch(args) -> int:
    loss, source = _problem(args)
    data = _training_data(args, source)
    res = erm_solve(data, loss, ErmConfig(args.radius, grad_tol=args.grad_tol), full_output=True)
    out = _writer()
    out.writerow(["key", "value"])
    out.writerow(["n", len(data)])
    out.writerow(["d", data.dim])
    out.writerow(["objective", repr(float(res.objective))])
    out.writerow(["projected_grad_norm", repr(float(res.grad_norm))])
    out.writerow(["iterations", res.iterations])
    out.writerow(["converged", int(res.converged)])
    for i, v in enumerate(res.w):
        out.writerow([f"w[{i}]", repr(float(v))])
    return 0


def cmd_risk_curve(args) -> int:
    loss, source = _problem(args)
    setup = CurveSetup.build(source, loss, args.seed, 10 * args.n_grid[-1], args.n_eval, theta=args.theta)
    report = risk_curve(args.learner, source, loss, args.n_grid, args.repeats, args.seed, setup=setup,
                        step_c=args.step_c, literal_gradient=args.literal_gradient)
    report.write_csv(args.out)
    sys.stdout.write(report.to_csv())
    return 0


def cmd_check_assumptions(args) -> int:
    loss, source = _problem(args)
    theta, sigma = theta_bootstrap(source, loss, n_est=args.n_est, seed=args.seed)
    floor = args.q * loss_derivative(loss, 0.0) ** 2
    rec = VerifierRecord.check("theta_label_floor", floor - 3.0 * sigma, theta, 0.0)
    pilot = source.sample(args.n_est, rng_for(args.seed, PILOT))
    w_pilot = erm_solve(pilot, loss, ErmConfig(args.radius))
    rho0 = estimate_rho(np.zeros(args.d), w_pilot, source, radius_R=args.radius, seed=args.seed)
    out = _writer()
    out.writerow(["key", "value"])
    out.writerow(["q", repr(args.q)])
    out.writerow(["theta_hat", repr(theta)])
    out.writerow(["bootstrap_sigma", repr(sigma)])
    out.writerow(["theta_floor", repr(floor)])
    out.writerow(["rho_at_origin", repr(rho0)])
    out.writerow(["pass", int(rec.passed)])
    return 0 if rec.passed else 1


def cmd_verify_lemmas(args) -> int:
    records = verify_all_lemmas(args.seed, args.trials)
    out = _writer()
    out.writerow(["name", "lhs", "rhs", "tolerance", "pass"])
    for r in records:
        out.writerow([r.name, repr(r.lhs), repr(r.rhs), repr(r.tolerance), int(r.passed)])
    return 0 if all(r.passed for r in records) else 1


COMMANDS = {
    "train-online": cmd_train_online,
    "train-batch": cmd_train_batch,
    "risk-curve": cmd_risk_curve,
    "check-assumptions": cmd_check_assumptions,
    "verify-lemmas": cmd_verify_lemmas,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (DataError, OSError) as exc:
        print(f"expconcave {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
