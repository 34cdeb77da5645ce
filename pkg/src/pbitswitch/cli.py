"""Command-line front end: ``pbitswitch <command> ...``.

Exit codes: 0 success, 1 usage, 2 numeric precondition, 3 dimension cap.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import channels as ch
from . import construction as cons
from . import linalg as la
from .coherent import coherent_information, maximize_coherent_information
from .config import RunConfig, Tolerances
from .errors import DimensionCapError, LayoutError, PreconditionError
from .verify import KNOWN_FAULTS, SUITES, run_suite

log = logging.getLogger("pbitswitch")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        log.info("wrote %s", out)


# -- commands -----------------------------------------------------------------


def cmd_params(args, cfg: RunConfig) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    params = cons.pick_parameters(args.n)
    checks = cons.parameter_checks(params)
    _emit(cons.params_to_json(params, checks) + "\n", args.out)
    return EXIT_OK if all(checks.values()) else EXIT_NUMERIC


def _build_params(args) -> cons.ChannelParams:
    if args.params is not None:
        params = cons.ChannelParams.from_json(json.loads(Path(args.params).read_text()))
    else:
        params = cons.pick_parameters(1)
    overrides = {k: getattr(args, k) for k in ("d", "r", "m", "N", "q", "kappa", "p")}
    return params.replace(**{k: v for k, v in overrides.items() if v is not None})


def cmd_build(args, cfg: RunConfig) -> int:
    params = _build_params(args)
    zeta = cons.grouped_zeta(params.zeta, dim_cap=cfg.dim_cap)
    M = cons.build_M(params, dim_cap=cfg.dim_cap, choi_source=zeta)
    ch.save(M, args.out)
    if args.zeta_out:
        ch.save(zeta, args.zeta_out)
    print(f"in_dim {M.d_in}")
    print(f"out_dim {M.d_out}")
    return EXIT_OK


def cmd_coherent_info(args, cfg: RunConfig) -> int:
    channel = ch.load(args.channel, dim_cap=cfg.dim_cap)
    if not isinstance(channel, ch.QuantumChannel):
        raise UsageError(f"{args.channel} holds a state, not a channel")
    if args.optimize:
        res = maximize_coherent_information(
            channel, args.restarts, args.iters, tol=args.tol, seed=cfg.seed, dim_cap=cfg.dim_cap
        )
        value, report = res.value, dict(res.diagnostics, value=res.value)
    else:
        rho = ch.load(args.input)
        if isinstance(rho, ch.QuantumChannel):
            raise UsageError(f"{args.input} holds a channel, not a state")
        value = coherent_information(channel, rho)
        report = {"value": value}
    print(f"coherent_information {_fmt(value)}")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def cmd_ppt(args, cfg: RunConfig) -> int:
    obj = ch.load(args.file, dim_cap=cfg.dim_cap)
    if isinstance(obj, ch.QuantumChannel):
        state = ch.choi_state(obj)
        transposed = args.transpose or list(state.layout.labels[len(obj.out_layout.factors):])
    else:
        state = obj
        if not args.transpose:
            raise UsageError("--transpose is required for state files")
        transposed = args.transpose
    unknown = [lab for lab in transposed if lab not in state.layout.labels]
    if unknown:
        raise UsageError(f"unknown factors {unknown}; layout has {list(state.layout.labels)}")
    ch.check_dim_cap(state.dim, cfg.dim_cap, "partial transpose")
    pt = la.partial_transpose(state, transposed)
    low = float(np.linalg.eigvalsh(la.symmetrize(pt))[0])
    ok = low >= -args.tol
    print(f"min_eigenvalue {_fmt(low)}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK


def cmd_region(args, cfg: RunConfig) -> int:
    if args.n < 1 or args.grid < 2:
        raise UsageError("--n must be >= 1 and --grid >= 2")
    _emit(cons.reports_to_csv(cons.feasibility_scan(args.n, args.grid)), args.out)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    results = run_suite(args.suite, seed=cfg.seed, trials=args.trials, faults=args.inject_fault)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERIC


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pbitswitch", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim-cap", type=int, default=ch.DEFAULT_DIM_CAP)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("params", help="pick parameters for n uses and certify them")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("build", help="write the switched channel M as JSON")
    p.add_argument("--params", help="params JSON; defaults to the n=1 pick")
    for name, typ in (("d", int), ("r", int), ("m", int), ("N", int),
                      ("q", float), ("kappa", float), ("p", float)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--out", required=True)
    p.add_argument("--zeta-out", help="also write the grouped approximate pbit state")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("coherent-info", help="evaluate or maximize coherent information")
    p.add_argument("channel")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--input")
    mode.add_argument("--optimize", action="store_true")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--report")
    p.set_defaults(func=cmd_coherent_info)

    p = sub.add_parser("ppt", help="minimum partial-transpose eigenvalue")
    p.add_argument("file")
    p.add_argument("--transpose", nargs="+", help="factor labels to transpose")
    p.add_argument("--tol", type=float, default=la.PSD_TOL)
    p.set_defaults(func=cmd_ppt)

    p = sub.add_parser("region", help="feasibility scan over (kappa, p)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, default=11)
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--inject-fault", action="append", default=[], choices=KNOWN_FAULTS,
                   help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        cfg = RunConfig(seed=args.seed, dim_cap=args.dim_cap, tolerances=Tolerances(),
                        out=getattr(args, "out", None), report=getattr(args, "report", None))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except DimensionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, LayoutError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
