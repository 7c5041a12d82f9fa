"""Command-line entry point: translate, optimize, check, run and gen."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bisim import check_theorem1, weak_barbed_bisim
from .encode import encode
from .generators import GenomeParams, InvalidParams, fig1_instance, gen_1000genomes
from .model import NotFound, ParseError, ValidationError, dumps_instance, load_instance
from .optimize import comm_stats, optimize
from .runtime import (
    ConnectionFailure,
    Deadlock,
    FrameCorruption,
    MetadataError,
    MetadataMissing,
    StepFailure,
    TcpOptions,
    compile_system,
    load_metadata,
    run_inproc,
    run_location_tcp,
)
from .semantics import ConfluenceViolation, StateSpaceExceeded, check_church_rosser
from .syntax import SwirlSyntaxError, parse_swirl, render_swirl

log = logging.getLogger("swirl")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class InputError(Exception):
    """Bad input file; exit code 2."""


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        log.info("wrote %s", out)


def _read_swirl(path: str):
    try:
        return parse_swirl(Path(path).read_text())
    except (SwirlSyntaxError, ValueError) as exc:
        raise InputError(f"{path}:{exc}") from None


def cmd_translate(args: argparse.Namespace) -> int:
    try:
        inst = load_instance(args.instance)
    except (ParseError, ValidationError, NotFound) as exc:
        raise InputError(f"{args.instance}: {type(exc).__name__}: {exc}") from None
    _emit(render_swirl(encode(inst)), args.output)
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    sys_ = _read_swirl(args.swirl)
    opt = optimize(sys_)
    _emit(render_swirl(opt), args.output)
    before, after = comm_stats(sys_), comm_stats(opt)
    pairs = sorted(set(before.per_pair) | set(after.per_pair))
    lines = [
        f"sends {before.sends} -> {after.sends}",
        f"recvs {before.recvs} -> {after.recvs}",
        f"execs {before.execs} -> {after.execs}",
    ]
    lines += [f"pair {s} {d} {before.per_pair[(s, d)]} -> {after.per_pair[(s, d)]}" for s, d in pairs]
    stats = "\n".join(lines) + "\n"
    if args.stats:
        Path(args.stats).write_text(stats)
    else:
        sys.stderr.write(stats)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    sys_ = _read_swirl(args.swirl)
    if args.confluence:
        rep = check_church_rosser(sys_, args.max_states)
        print(rep)
        return EXIT_OK if rep.ok else EXIT_FAILED
    if args.theorem1:
        res = check_theorem1(sys_, args.max_states, args.reduction)
    else:
        res = weak_barbed_bisim(sys_, _read_swirl(args.against), args.max_states, args.reduction)
    print(f"{res} states={res.states_a}/{res.states_b}")
    return EXIT_OK if res.related else EXIT_FAILED


def cmd_run(args: argparse.Namespace) -> int:
    sys_ = _read_swirl(args.swirl)
    try:
        meta = load_metadata(args.metadata)
    except (MetadataError, OSError) as exc:
        raise InputError(f"{args.metadata}: {exc}") from None
    bundle = compile_system(sys_, meta, "tcp" if args.tcp else "inproc")
    if args.tcp:
        opts = TcpOptions(args.retries, args.retry_delay, args.idle_timeout)
        report = run_location_tcp(bundle, args.loc, opts, args.workdir)
    else:
        report = run_inproc(bundle, args.workdir)
    _emit(report.text(), args.output)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    if args.fig1:
        inst = fig1_instance()
    else:
        try:
            inst = gen_1000genomes(GenomeParams.parse(args.genome))
        except InvalidParams as exc:
            raise InputError(str(exc)) from None
    _emit(dumps_instance(inst), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swirl", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="encode an instance file as a .swirl system")
    p.add_argument("instance")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("optimize", help="remove redundant communications")
    p.add_argument("swirl")
    p.add_argument("-o", "--output")
    p.add_argument("--stats", help="write the before/after message summary here instead of stderr")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("check", help="confluence or equivalence checks")
    p.add_argument("swirl")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--theorem1", action="store_true", help="system vs. its optimized form")
    mode.add_argument("--confluence", action="store_true", help="diamond property on the reachable LTS")
    mode.add_argument("--against", metavar="OTHER", help="system vs. another .swirl file")
    p.add_argument("--max-states", type=int, default=100_000)
    p.add_argument("--reduction", choices=["none", "tau-confluence"], default="none")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="compile and execute")
    p.add_argument("swirl")
    p.add_argument("metadata")
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--inproc", action="store_true")
    where.add_argument("--tcp", action="store_true")
    p.add_argument("--loc", help="location to run (with --tcp)")
    p.add_argument("-o", "--output")
    p.add_argument("--workdir")
    p.add_argument("--retries", type=int, default=10)
    p.add_argument("--retry-delay", type=float, default=0.5)
    p.add_argument("--idle-timeout", type=float, default=30.0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen", help="write a generated instance file")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--fig1", action="store_true")
    which.add_argument("--genome", metavar="n,m,a,b,c")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "tcp", False) and not args.loc:
        ap.error("--tcp requires --loc")
    try:
        return args.func(args)
    except (InputError, MetadataMissing, OSError) as exc:
        label = "MetadataMissing: " if isinstance(exc, MetadataMissing) else ""
        print(f"error: {label}{exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        Deadlock,
        ConnectionFailure,
        StepFailure,
        FrameCorruption,
        StateSpaceExceeded,
        ConfluenceViolation,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
