"""Command-line front end.

Subcommands: factor, truncate, tuxv, quality, bench, bias-experiment.  Exit
codes: 0 success, 1 usage error, 2 input parse/read error, 3 numerical
failure.  All numerical output is deterministic for a fixed seed; wall-clock
timing goes to comment lines suppressible with --no-timing.
"""

import argparse
import contextlib
import sys
import time
from dataclasses import dataclass

import threadpoolctl

from . import harness
from .matio import MatrixFormatError, PgmFormatError, load_matrix_market, load_pgm, save_pgm
from .qrcp import qr_blocked, qr_presorted, qrcp_blocked, qrcp_level2
from .randomized import DegenerateSampleError, RandomizedConfig, rqrcp, rsrqrcp, ssrqrcp
from .svd import NonConvergenceError
from .truncated import trqrcp, tuxv
from .analysis import BiasExperimentConfig, selection_bias_experiment


class UsageError(Exception):
    """Bad flags or inconsistent parameters; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Validated per-invocation parameters shared by the matrix commands."""

    input: str
    rank: int | None
    block: int
    padding: int
    seed: int
    threads: int
    output: str | None
    no_timing: bool

    def randomized(self):
        return RandomizedConfig(block=self.block, padding=self.padding, seed=self.seed)


_FACTOR_ALGOS = ("qrcp", "qrcp_level2", "qr", "qr_presorted", "rqrcp", "rsrqrcp")
_TRUNCATE_ALGOS = ("trqrcp", "ssrqrcp")


def _add_common(sp, needs_input=True):
    if needs_input:
        sp.add_argument("--input", "-i", required=True, help="matrix file (MatrixMarket or PGM)")
    sp.add_argument("--rank", "-k", type=int, default=None, help="target rank")
    sp.add_argument("--block", "-b", type=int, default=32, help="pivot block size")
    sp.add_argument("--pad", "-p", type=int, default=8, help="sample padding rows")
    sp.add_argument("--seed", type=int, default=0, help="random generator seed")
    sp.add_argument("--threads", type=int, default=0, help="cap BLAS threads (0 = leave alone)")
    sp.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    sp.add_argument("--no-timing", action="store_true", help="omit wall-clock comment lines")


def build_parser():
    p = _Parser(prog="rqrcp", description="Randomized column-pivoted QR toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("factor", help="full pivoted/unpivoted QR factorizations")
    sp.add_argument("--algo", choices=_FACTOR_ALGOS, default="qrcp")
    _add_common(sp)

    sp = sub.add_parser("truncate", help="leading-k factorization without trailing updates")
    sp.add_argument("--algo", choices=_TRUNCATE_ALGOS, default="trqrcp")
    sp.add_argument("--reconstruct", default=None, metavar="PGM",
                    help="write the rank-k reconstruction as a PGM image")
    _add_common(sp)

    sp = sub.add_parser("tuxv", help="approximate truncated SVD")
    sp.add_argument("--jmax", type=int, default=1, help="half-iterations of QR/LQ refinement")
    sp.add_argument("--svd-of-x", action="store_true", help="diagonalize the core matrix")
    sp.add_argument("--reconstruct", default=None, metavar="PGM",
                    help="write the rank-k reconstruction as a PGM image")
    _add_common(sp)

    sp = sub.add_parser("quality", help="truncation-error curves over a rank grid")
    sp.add_argument("--algos", default=",".join(harness.QUALITY_ALGOS),
                    help="comma-separated algorithm list")
    sp.add_argument("--ranks", default=None, help="comma-separated ascending ranks")
    sp.add_argument("--svd-sweeps", type=int, default=40, help="Jacobi sweep cap")
    _add_common(sp)

    sp = sub.add_parser("bench", help="one-shot counter/time benchmark")
    sp.add_argument("--algos", default="qr,qrcp,rqrcp,rsrqrcp",
                    help="comma-separated algorithm list")
    sp.add_argument("--svd-sweeps", type=int, default=40, help="Jacobi sweep cap")
    _add_common(sp)

    sp = sub.add_parser("bias-experiment", help="sketch-pivot selection quality Monte Carlo")
    sp.add_argument("--rank", "-k", type=int, default=32)
    sp.add_argument("--pad", "-p", type=int, default=8)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o", default=None)
    return p


def _load_input(path):
    """Sniff the format from the magic bytes: PGM or MatrixMarket."""
    try:
        with open(path, "rb") as fh:
            magic = fh.read(2)
    except OSError as exc:
        raise MatrixFormatError(f"{path}: {exc.strerror or exc}") from exc
    if magic in (b"P2", b"P5"):
        return load_pgm(path)
    return load_matrix_market(path)


def _open_output(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline="", encoding="ascii"), True


def _emit(path, write):
    stream, close = _open_output(path)
    try:
        write(stream)
    finally:
        if close:
            stream.close()


def _run_config(args):
    cfg = RunConfig(
        input=args.input,
        rank=args.rank,
        block=args.block,
        padding=args.pad,
        seed=args.seed,
        threads=args.threads,
        output=args.output,
        no_timing=args.no_timing,
    )
    if cfg.block < 1:
        raise UsageError("--block must be >= 1")
    if cfg.padding < 1:
        raise UsageError("--pad must be >= 1")
    if cfg.rank is not None and cfg.rank < 1:
        raise UsageError("--rank must be >= 1")
    if cfg.threads < 0:
        raise UsageError("--threads must be >= 0")
    return cfg


def _check_rank(cfg, A, required=False):
    kmax = min(A.shape)
    if cfg.rank is None:
        if required:
            raise UsageError("this command needs an explicit --rank")
        return None
    if cfg.rank > kmax:
        raise UsageError(f"--rank {cfg.rank} exceeds min(m, n) = {kmax}")
    return cfg.rank


def _cmd_factor(args):
    cfg = _run_config(args)
    A = _load_input(cfg.input)
    k = _check_rank(cfg, A)
    algo = args.algo
    if algo in ("rqrcp", "rsrqrcp") and cfg.block + cfg.padding > A.shape[0]:
        raise UsageError(
            f"sample rows {cfg.block + cfg.padding} exceed matrix rows {A.shape[0]}"
        )
    with _threads(cfg.threads):
        if algo == "qrcp":
            f = qrcp_blocked(A, k=k, b=cfg.block)
        elif algo == "qrcp_level2":
            f = qrcp_level2(A, k=k)
        elif algo == "qr":
            f = qr_blocked(A, k=k, b=cfg.block)
        elif algo == "qr_presorted":
            f = qr_presorted(A, k=k, b=cfg.block)
        elif algo == "rqrcp":
            f = rqrcp(A, k=k, config=cfg.randomized())
        else:
            f = rsrqrcp(A, k=k, config=cfg.randomized())
    _emit(cfg.output, lambda s: harness.write_factor_csv(f, s))
    return 0


def _cmd_truncate(args):
    cfg = _run_config(args)
    A = _load_input(cfg.input)
    k = _check_rank(cfg, A, required=True)
    ell = k + cfg.padding if args.algo == "ssrqrcp" else cfg.block + cfg.padding
    if ell > A.shape[0]:
        raise UsageError("sample rows exceed matrix rows; lower --block/--pad")
    with _threads(cfg.threads):
        if args.algo == "trqrcp":
            f = trqrcp(A, k, cfg.randomized())
        else:
            f = ssrqrcp(A, k, cfg.randomized())
        if args.reconstruct:
            approx = f.perm.restore(f.q_factor() @ f.R[: f.rank, :])
            save_pgm(approx, args.reconstruct)
    _emit(cfg.output, lambda s: harness.write_factor_csv(f, s))
    return 0


def _cmd_tuxv(args):
    cfg = _run_config(args)
    if args.jmax < 1:
        raise UsageError("--jmax must be >= 1")
    A = _load_input(cfg.input)
    k = _check_rank(cfg, A, required=True)
    if cfg.block + cfg.padding > A.shape[0]:
        raise UsageError("sample rows exceed matrix rows; lower --block/--pad")
    with _threads(cfg.threads):
        t = tuxv(A, k, cfg.randomized(), j_max=args.jmax, svd_of_x=args.svd_of_x)
        if args.reconstruct:
            save_pgm(t.approx(), args.reconstruct)
    _emit(cfg.output, lambda s: harness.write_tuxv_csv(t, s))
    return 0


def _parse_list(raw, what, allowed=None):
    items = [t.strip() for t in raw.split(",") if t.strip()]
    if not items:
        raise UsageError(f"empty {what} list")
    if allowed is not None:
        bad = [t for t in items if t not in allowed]
        if bad:
            raise UsageError(f"unknown {what} {bad[0]!r} (choose from {', '.join(allowed)})")
    return items


def _cmd_quality(args):
    cfg = _run_config(args)
    algos = _parse_list(args.algos, "algorithm", allowed=harness.QUALITY_ALGOS + ("qr",))
    A = _load_input(cfg.input)
    if args.ranks is not None:
        try:
            ranks = [int(t) for t in _parse_list(args.ranks, "rank")]
        except ValueError as exc:
            raise UsageError(f"bad --ranks: {exc}") from exc
    else:
        ranks = None
    if "svd" in algos and min(A.shape) > 512:
        raise UsageError("svd oracle is desk-scale only (min(m, n) <= 512)")
    if cfg.block + cfg.padding > A.shape[0] and set(algos) & {"rqrcp", "rsrqrcp", "trqrcp", "tuxv"}:
        raise UsageError("sample rows exceed matrix rows; lower --block/--pad")
    with _threads(cfg.threads):
        t0 = time.perf_counter()
        try:
            curve = harness.quality_sweep(
                A, ranks=ranks, algorithms=algos, config=cfg.randomized(),
                svd_sweeps=args.svd_sweeps,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        seconds = time.perf_counter() - t0
    _emit(cfg.output, lambda s: curve.write_csv(s, seconds=None if cfg.no_timing else seconds))
    return 0


def _cmd_bench(args):
    cfg = _run_config(args)
    algos = _parse_list(args.algos, "algorithm",
                        allowed=harness.BENCH_ALGOS + ("qrcp_level2", "ssrqrcp"))
    A = _load_input(cfg.input)
    k = _check_rank(cfg, A)
    with _threads(cfg.threads):
        try:
            rows = harness.bench(A, algorithms=algos, k=k, config=cfg.randomized(),
                                 svd_sweeps=args.svd_sweeps)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    _emit(cfg.output, lambda s: harness.write_bench_csv(rows, s, timing=not cfg.no_timing))
    return 0


def _cmd_bias(args):
    try:
        config = BiasExperimentConfig(
            k=args.rank, padding=args.pad, trials=args.trials, seed=args.seed
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    phi, expectation = selection_bias_experiment(config)
    _emit(args.output, lambda s: harness.write_bias_csv(phi, expectation, s))
    return 0


def _threads(count):
    if count and count > 0:
        return threadpoolctl.threadpool_limits(limits=count)
    return contextlib.nullcontext()


_COMMANDS = {
    "factor": _cmd_factor,
    "truncate": _cmd_truncate,
    "tuxv": _cmd_tuxv,
    "quality": _cmd_quality,
    "bench": _cmd_bench,
    "bias-experiment": _cmd_bias,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rqrcp: error: {exc}", file=sys.stderr)
        return 1
    except (MatrixFormatError, PgmFormatError) as exc:
        print(f"rqrcp: parse error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"rqrcp: i/o error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergenceError, DegenerateSampleError) as exc:
        print(f"rqrcp: numerical failure: {exc}", file=sys.stderr)
        return 3
