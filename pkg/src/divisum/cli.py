"""Command-line front end.

One command per invocation: ``sieve`` emits pointwise tables, ``sum``
evaluates summatory functions by the sieve oracle or the fast paths,
``verify`` checks the Mobius-weighted square-divisor identity pointwise,
``envelope`` certifies error-envelope claims, ``fit`` recovers the
log-polynomial coefficients from exact mean-square data, and ``bench``
times the fast paths against pinned baselines.

Exit statuses: 0 success, 2 usage error, 3 computation error.  Errors are
single lines on stderr.  Identical invocations produce byte-identical
output; timing fields are suppressed under ``--deterministic``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field

from . import asymptotic, serialize, summatory
from .tables import (
    DEFAULT_MEMORY_CAP,
    DIVISOR,
    DIVISOR_SQUARED,
    MOBIUS,
    CoverageError,
    FunctionKind,
    SizingError,
    divisor_k,
    sieve as build_table,
    verify_convolution_range,
)

__all__ = ["EXIT_OK", "EXIT_USAGE", "EXIT_COMPUTE", "RunConfig", "main", "run"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3

MEMORY_CAP_ENV = "DIVISUM_MEMORY_CAP"

# suite -> (argument, baseline seconds); a run is a failing regression when
# it exceeds twice its baseline.
BENCH_SUITES = {
    "hyperbola": (10**10, 0.5),
    "d4": (10**9, 10.0),
    "s": (10**9, 30.0),
}

_COMMANDS = ("sieve", "sum", "verify", "envelope", "fit", "bench")


class UsageError(ValueError):
    """Bad command line or out-of-domain request parameters."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


@dataclass
class RunConfig:
    """Validated description of one invocation."""

    command: str
    function: FunctionKind | None = None
    limit: int | None = None
    x: int | None = None
    method: str = "fast"
    identity: str = "convolution"
    claim: str | None = None
    suite: str | None = None
    x_min: int | None = None
    x_max: int | None = None
    points: int | None = None
    fmt: str = "csv"
    output: str = "-"
    deterministic: bool = False
    memory_cap: int = DEFAULT_MEMORY_CAP
    lines: list[str] = field(default_factory=list)

    def emit(self, text: str) -> None:
        self.lines.append(text)


def _parse_function(token: str, *, allow_mobius: bool) -> FunctionKind:
    if token == "mu":
        if not allow_mobius:
            raise UsageError("function mu is not summable here; use sieve")
        return MOBIUS
    if token == "d":
        return DIVISOR
    if token == "d2":
        return DIVISOR_SQUARED
    if token.startswith("dk:"):
        try:
            k = int(token[3:])
        except ValueError:
            raise UsageError(f"bad divisor order in {token!r}") from None
        if k < 1:
            raise UsageError(f"divisor order must be >= 1, got {k}")
        return divisor_k(k)
    raise UsageError(f"unknown function {token!r}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="divisum", description=__doc__, add_help=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", default="-", metavar="PATH")
    common.add_argument("--deterministic", action="store_true")
    common.add_argument("--memory-cap", type=int, metavar="BYTES")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("sieve", parents=[common], help="pointwise table of mu/d/dk:K/d2")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--fn", required=True, metavar="{mu|d|dk:K|d2}")

    p = sub.add_parser("sum", parents=[common], help="summatory value at x")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--fn", required=True, metavar="{d|dk:K|d2}")
    p.add_argument("--method", choices=("sieve", "fast"), default="fast")

    p = sub.add_parser("verify", parents=[common], help="pointwise identity check")
    p.add_argument("--identity", choices=("convolution",), default="convolution")
    p.add_argument("--limit", type=int, required=True)

    p = sub.add_parser("envelope", parents=[common], help="normalized error ratios")
    p.add_argument("--claim", required=True, metavar="{eq3:K|eq4|d3|d4|s|mobius}")
    p.add_argument("--xmin", type=int, required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--points", type=int, required=True)

    p = sub.add_parser("fit", parents=[common], help="recover log-poly coefficients")
    p.add_argument("--xmin", type=int, required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--points", type=int, required=True)

    p = sub.add_parser("bench", parents=[common], help="time the fast paths")
    p.add_argument("--suite", choices=tuple(BENCH_SUITES), required=True)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command is None:
        raise UsageError("a command is required (sieve, sum, verify, envelope, fit, bench)")
    cap = args.memory_cap
    if cap is None:
        env = os.environ.get(MEMORY_CAP_ENV)
        if env is not None:
            try:
                cap = int(env)
            except ValueError:
                raise UsageError(f"{MEMORY_CAP_ENV} must be an integer, got {env!r}")
    if cap is None:
        cap = DEFAULT_MEMORY_CAP
    if cap < 1:
        raise UsageError(f"memory cap must be positive, got {cap}")
    cfg = RunConfig(
        command=args.command,
        fmt=args.format,
        output=args.output,
        deterministic=args.deterministic,
        memory_cap=cap,
    )
    if args.command == "sieve":
        if args.limit < 1:
            raise UsageError(f"--limit must be >= 1, got {args.limit}")
        cfg.limit = args.limit
        cfg.function = _parse_function(args.fn, allow_mobius=True)
    elif args.command == "sum":
        if args.x < 1:
            raise UsageError(f"--x must be >= 1, got {args.x}")
        cfg.x = args.x
        cfg.function = _parse_function(args.fn, allow_mobius=False)
        cfg.method = args.method
    elif args.command == "verify":
        if args.limit < 1:
            raise UsageError(f"--limit must be >= 1, got {args.limit}")
        cfg.identity = args.identity
        cfg.limit = args.limit
    elif args.command in ("envelope", "fit"):
        if args.points < 2:
            raise UsageError(f"--points must be >= 2, got {args.points}")
        if args.xmin < 2:
            raise UsageError(f"--xmin must be >= 2, got {args.xmin}")
        if args.xmax <= args.xmin:
            raise UsageError("--xmax must exceed --xmin")
        cfg.x_min, cfg.x_max, cfg.points = args.xmin, args.xmax, args.points
        if args.command == "envelope":
            claim = args.claim
            if claim not in asymptotic.CLAIMS:
                raise UsageError(f"unknown claim {claim!r}")
            cfg.claim = claim
        else:
            if args.points < 8:
                raise UsageError(f"fit needs --points >= 8, got {args.points}")
    else:
        cfg.suite = args.suite
    return cfg


def _run_sieve(cfg: RunConfig) -> int:
    table = build_table(cfg.function, cfg.limit, memory_cap=cfg.memory_cap)
    if cfg.fmt == "json":
        cfg.emit(
            serialize.dumps_json(
                {
                    "function": cfg.function.label,
                    "limit": cfg.limit,
                    "values": [str(int(v)) for v in table.values],
                }
            )
        )
    else:
        rows = ["n,value"] + [f"{n},{int(v)}" for n, v in enumerate(table.values, 1)]
        cfg.emit("\n".join(rows))
    return EXIT_OK


def _fast_summatory(fn: FunctionKind, x: int, cap: int) -> summatory.SummatoryValue:
    if fn == DIVISOR_SQUARED:
        return summatory.mean_square_summatory(x, memory_cap=cap)
    if fn == DIVISOR or fn == divisor_k(2):
        return summatory.divisor_summatory_hyperbola(x)
    if fn == divisor_k(4):
        return summatory.d4_summatory(x, memory_cap=cap)
    return summatory.dk_summatory_recursive(fn.k, x, memory_cap=cap)


def _run_sum(cfg: RunConfig) -> int:
    start = time.perf_counter()
    if cfg.method == "sieve":
        result = summatory.summatory_oracle(cfg.function, cfg.x, memory_cap=cfg.memory_cap)
    else:
        result = _fast_summatory(cfg.function, cfg.x, cfg.memory_cap)
    elapsed_ms = None
    if not cfg.deterministic:
        elapsed_ms = 1000.0 * (time.perf_counter() - start)
    record = summatory.result_record(cfg.function.label, result, elapsed_ms)
    if cfg.fmt == "json":
        cfg.emit(serialize.dumps_json(record))
    else:
        keys = list(record)
        cfg.emit(",".join(keys))
        cfg.emit(",".join(serialize.format_float(record[k]) if isinstance(record[k], float) else str(record[k]) for k in keys))
    return EXIT_OK


def _run_verify(cfg: RunConfig) -> int:
    passed = verify_convolution_range(cfg.limit, memory_cap=cfg.memory_cap)
    ok = passed == cfg.limit
    summary = f"{passed}/{cfg.limit} ok" if ok else f"{passed}/{cfg.limit} FAILED"
    if cfg.fmt == "json":
        cfg.emit(
            serialize.dumps_json(
                {
                    "identity": cfg.identity,
                    "limit": cfg.limit,
                    "passed": passed,
                    "ok": ok,
                    "summary": summary,
                }
            )
        )
    else:
        cfg.emit(summary)
    if not ok:
        print(
            f"error: computation: identity {cfg.identity} failed at "
            f"{cfg.limit - passed} of {cfg.limit} points",
            file=sys.stderr,
        )
        return EXIT_COMPUTE
    return EXIT_OK


def _run_envelope(cfg: RunConfig) -> int:
    xs = asymptotic.geometric_samples(cfg.x_min, cfg.x_max, cfg.points)
    report = asymptotic.envelope(cfg.claim, xs)
    if cfg.fmt == "json":
        cfg.emit(serialize.dumps_json(report.to_json_dict()))
    else:
        cfg.emit(serialize.csv_text(report.csv_rows()).rstrip("\n"))
    return EXIT_OK


def _run_fit(cfg: RunConfig) -> int:
    xs = asymptotic.geometric_samples(cfg.x_min, cfg.x_max, cfg.points)
    samples = [
        (x, summatory.mean_square_summatory(x, memory_cap=cfg.memory_cap).value)
        for x in xs
    ]
    report = asymptotic.fit_log_poly(samples)
    if cfg.fmt == "json":
        cfg.emit(serialize.dumps_json(report.to_json_dict()))
    else:
        cfg.emit(serialize.csv_text(report.csv_rows()).rstrip("\n"))
    return EXIT_OK


def _run_bench(cfg: RunConfig) -> int:
    x, baseline_s = BENCH_SUITES[cfg.suite]
    start = time.perf_counter()
    if cfg.suite == "hyperbola":
        result = summatory.divisor_summatory_hyperbola(x)
    elif cfg.suite == "d4":
        result = summatory.d4_summatory(x, memory_cap=cfg.memory_cap)
    else:
        result = summatory.mean_square_summatory(x, memory_cap=cfg.memory_cap)
    elapsed_ms = 1000.0 * (time.perf_counter() - start)
    limit_ms = 2000.0 * baseline_s
    ok = elapsed_ms <= limit_ms
    record = {
        "suite": cfg.suite,
        "x": x,
        "value": str(result.value),
        "elapsed_ms": elapsed_ms,
        "baseline_ms": 1000.0 * baseline_s,
        "limit_ms": limit_ms,
        "ok": ok,
    }
    if cfg.fmt == "json":
        cfg.emit(serialize.dumps_json(record))
    else:
        keys = list(record)
        cfg.emit(",".join(keys))
        cfg.emit(
            ",".join(
                serialize.format_float(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else str(v)
                for v in record.values()
            )
        )
    if not ok:
        print(
            f"error: computation: bench regression: {cfg.suite} took "
            f"{elapsed_ms:.0f} ms, over 2x baseline {1000 * baseline_s:.0f} ms",
            file=sys.stderr,
        )
        return EXIT_COMPUTE
    return EXIT_OK


_RUNNERS = {
    "sieve": _run_sieve,
    "sum": _run_sum,
    "verify": _run_verify,
    "envelope": _run_envelope,
    "fit": _run_fit,
    "bench": _run_bench,
}


def run(cfg: RunConfig) -> int:
    """Dispatch a validated config; returns the exit status and fills
    ``cfg.lines`` with the report."""
    return _RUNNERS[cfg.command](cfg)


def _write_output(cfg: RunConfig) -> None:
    text = "\n".join(cfg.lines)
    if text and not text.endswith("\n"):
        text += "\n"
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="") as handle:
            handle.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config_from_args(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        status = run(cfg)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SizingError, CoverageError, asymptotic.ConditioningError) as exc:
        print(f"error: computation: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ValueError, OverflowError, RuntimeError) as exc:
        print(f"error: computation: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    _write_output(cfg)
    return status


if __name__ == "__main__":
    sys.exit(main())
