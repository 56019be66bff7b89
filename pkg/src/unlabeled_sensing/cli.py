"""Command line front end.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .bounds import TheoryConstants, threshold_report
from .dsv import format_value
from .errors import NumericalError
from .model import ModelParams, SensingInstance, Spectrum, generate, make_rng, residual
from .permutation import hamming
from .solvers import AdmmConfig, admm_solve, oracle_ml

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _csv(conv):
    def parse(text: str):
        try:
            return [conv(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


def _add_model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--p", type=int, default=10)
    g.add_argument("--m", type=int, default=5)
    g.add_argument("--h", type=int, default=10)
    g.add_argument("--snr", type=float, default=10.0)
    g.add_argument("--spectrum", default="fullrank",
                   help="rank1 | fullrank | explicit:<v1,v2,...>")
    g.add_argument("--sigma-sq", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)


def _params(args) -> ModelParams:
    return ModelParams(n=args.n, p=args.p, m=args.m, h=args.h, snr=args.snr,
                       spectrum=Spectrum.parse(args.spectrum), sigma_sq=args.sigma_sq)


def _instance(args) -> SensingInstance:
    if args.instance_dir:
        return SensingInstance.read(args.instance_dir, args.tag)
    return generate(_params(args), make_rng(args.seed))


def _print_kv(items, out) -> None:
    for key, value in items:
        out.write(f"{key}={format_value(value)}\n")


def cmd_generate(args, out) -> int:
    inst = generate(_params(args), make_rng(args.seed))
    for path in inst.write(args.out_dir, args.tag):
        out.write(f"{path}\n")
    return EXIT_OK


def _report_solution(inst: SensingInstance, est, out, extra=()) -> None:
    d = hamming(est, inst.Pi_star)
    _print_kv([
        ("permutation", est.to_text()),
        ("hamming", d),
        ("recovered", d == 0),
        ("residual", residual(est, inst.X, inst.Y)),
        *extra,
    ], out)


def cmd_solve_oracle(args, out) -> int:
    inst = _instance(args)
    _report_solution(inst, oracle_ml(inst.X, inst.Y, inst.B_star), out)
    return EXIT_OK


def cmd_solve_admm(args, out) -> int:
    inst = _instance(args)
    cfg = AdmmConfig(rho=args.rho, t_max=args.t_max)
    trace = admm_solve(inst.X, inst.Y, cfg)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("t,hamming,residual\n")
            for t, d, res in trace.rows(inst.Pi_star):
                fh.write(f"{t},{d},{res!r}\n")
    _report_solution(inst, trace.final, out, [
        ("iterations", trace.iterations_run),
        ("converged", trace.converged),
        ("start", trace.start),
        ("rho", trace.rho),
    ])
    return EXIT_OK


def cmd_bounds(args, out) -> int:
    params = _params(args)
    consts = TheoryConstants(kappa=args.kappa, alpha0=args.alpha0, prop1_c=args.prop1_c,
                             eps=args.eps)
    report = threshold_report(params.signal(), params.sigma_sq, params.n, params.p,
                              D_values=args.D, h_max=args.h_max, consts=consts)
    items = report.items()
    _print_kv(items, out)
    out.write("\n")
    out.write(",".join(k for k, _ in items) + "\n")
    out.write(",".join(format_value(v) for _, v in items) + "\n")
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    spec = harness.parse_config(Path(args.config).read_text())
    if args.workers is not None:
        spec = harness.SweepSpec(**{**spec.__dict__, "workers": args.workers})
    target = args.output or spec.output
    if target:
        with open(target, "w") as fh:
            harness.write_sweep(spec, fh, timing=args.timing)
        out.write(f"{target}\n")
    else:
        harness.write_sweep(spec, out, timing=args.timing)
    return EXIT_OK


def cmd_table2(args, out) -> int:
    out.write(harness.emit_table2(args.n, args.rho, args.c))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unlabeled-sensing",
        description="Permutation recovery for multi-measurement unlabeled sensing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write one instance as DSV matrix files")
    _add_model_args(p)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--tag", default="instance")
    p.set_defaults(func=cmd_generate)

    for name, func in (("solve-oracle", cmd_solve_oracle), ("solve-admm", cmd_solve_admm)):
        p = sub.add_parser(name, help="estimate the permutation of one instance")
        _add_model_args(p)
        p.add_argument("--instance-dir", help="read {tag}_*.dsv files instead of generating")
        p.add_argument("--tag", default="instance")
        if name == "solve-admm":
            p.add_argument("--rho", type=float, default=None)
            p.add_argument("--t-max", type=int, default=100)
            p.add_argument("--trace", help="write per-iteration DSV rows here")
        p.set_defaults(func=func)

    p = sub.add_parser("bounds", help="evaluate recovery/failure thresholds")
    _add_model_args(p)
    p.add_argument("--D", type=_csv(int), default=[], help="Hamming radii, comma separated")
    p.add_argument("--h-max", type=int, default=None)
    d = TheoryConstants()
    p.add_argument("--kappa", type=float, default=d.kappa)
    p.add_argument("--alpha0", type=float, default=d.alpha0)
    p.add_argument("--prop1-c", type=float, default=d.prop1_c)
    p.add_argument("--eps", type=float, default=d.eps)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="run a Monte Carlo grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="append the wall_time column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table2", help="required snr per stable rank and log-det level")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=_csv(float), required=True)
    p.add_argument("--c", type=_csv(float), required=True)
    p.set_defaults(func=cmd_table2)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except harness.TrialError as exc:
        s = exc.seed
        sys.stderr.write(f"error: {exc}\nseed: master={s.master} cell={s.cell} trial={s.trial}\n")
        return EXIT_NUMERICAL
    except NumericalError as exc:
        seed = getattr(args, "seed", None)
        sys.stderr.write(f"error: {exc}\n" + (f"seed: {seed}\n" if seed is not None else ""))
        return EXIT_NUMERICAL
    except (ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
