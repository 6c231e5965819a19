"""Command-line interface: ``renyicap {gen,solve,sweep,trace,scale,verify}``.

Exit codes: 0 success, 1 input error, 2 iteration cap reached before the
gap tolerance, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .channel import (
    ChannelError,
    gen_commuting_channel,
    gen_noiseless_channel,
    gen_random_channel,
    load_channel,
    prepare,
    random_stochastic_matrix,
    save_channel,
)
from .solver import SolverConfig, solve

log = logging.getLogger("renyicap")

EXIT_OK, EXIT_INPUT, EXIT_MAXITER, EXIT_VERIFY = 0, 1, 2, 3

SWEEP_COLUMNS = ["alpha", "capacity", "iterations", "runtime_s", "gap_final", "stop_reason"]
TRACE_COLUMNS = ["t", "S", "gap", "eta_t", "kl_step", "S_pre_safeguard"]
SCALE_COLUMNS = ["varied", "n", "d", "repeats", "runtime_median_s"]


class InputError(ValueError):
    pass


def parse_alphas(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    spec = spec.strip()
    if not spec:
        raise InputError("empty alpha list")
    if ":" in spec:
        try:
            start, stop, step = (float(v) for v in spec.split(":"))
        except ValueError as exc:
            raise InputError(f"bad alpha range {spec!r}; expected start:stop:step") from exc
        if step <= 0 or stop < start:
            raise InputError(f"bad alpha range {spec!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        alphas = [round(start + k * step, 12) for k in range(count)]
    else:
        try:
            alphas = [float(v) for v in spec.split(",") if v.strip()]
        except ValueError as exc:
            raise InputError(f"bad alpha list {spec!r}") from exc
    if not alphas:
        raise InputError("empty alpha list")
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise InputError(f"alpha must lie in (0,1), got {a}")
    return sorted(set(alphas))


def parse_int_list(spec: str) -> list[int]:
    try:
        return [int(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad integer list {spec!r}") from exc


def _log_base(name: str) -> float:
    return math.e if name == "e" else 2.0


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(rows: list[dict], columns: list[str], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    if out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue(), encoding="utf-8")


def _config(args, alpha: float, trace_every: int = 0) -> SolverConfig:
    eta = args.eta if args.eta == "auto" else float(args.eta)
    return SolverConfig(
        alpha=alpha,
        eta=eta,
        delta_floor=args.delta,
        tol=args.tol,
        max_iters=args.max_iters,
        stepsize_mode=args.stepsize,
        trace_every=trace_every,
        analysis_delta=args.analysis_delta,
    )


def _load(path) -> object:
    try:
        return load_channel(path)
    except OSError as exc:
        raise InputError(f"cannot read channel file: {exc}") from exc


# -- commands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.kind == "random":
        ch = gen_random_channel(args.n, args.d, args.epsilon, args.seed)
    elif args.kind == "noiseless":
        ch = gen_noiseless_channel(args.n)
    else:
        if args.matrix:
            P = np.asarray(json.loads(Path(args.matrix).read_text()), dtype=float)
        else:
            P = random_stochastic_matrix(args.n, args.d, args.seed)
        ch = gen_commuting_channel(P)
    save_channel(ch, args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    ch = prepare(_load(args.channel), args.alpha)
    cfg = _config(args, args.alpha)
    cfg.validate(ch.n)
    t0 = time.perf_counter()
    res = solve(ch, cfg)
    doc = res.to_dict(_log_base(args.log_base))
    doc["runtime_s"] = time.perf_counter() - t0
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK if res.stop_reason == "tolerance" else EXIT_MAXITER


def _sweep_one(channel, alpha: float, args) -> dict:
    t0 = time.perf_counter()
    try:
        res = solve(prepare(channel, alpha), _config(args, alpha))
    except Exception as exc:  # recorded as an error row; the sweep goes on
        log.error("alpha=%g failed: %s", alpha, exc)
        return {"alpha": alpha, "capacity": float("nan"), "iterations": 0,
                "runtime_s": time.perf_counter() - t0, "gap_final": float("nan"),
                "stop_reason": "error"}
    return {
        "alpha": alpha,
        "capacity": res.capacity / math.log(_log_base(args.log_base)),
        "iterations": res.iterations,
        "runtime_s": time.perf_counter() - t0,
        "gap_final": res.gap_final,
        "stop_reason": res.stop_reason,
    }


def _map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]


def cmd_sweep(args) -> int:
    alphas = parse_alphas(args.alphas)
    channel = _load(args.channel)
    rows = _map(_sweep_one, [(channel, a, args) for a in alphas], args.workers)
    _write_csv(rows, SWEEP_COLUMNS, args.out)
    reasons = {r["stop_reason"] for r in rows}
    if "error" in reasons:
        return EXIT_INPUT
    return EXIT_MAXITER if "max_iters" in reasons else EXIT_OK


def cmd_trace(args) -> int:
    if args.trace_every < 1:
        raise InputError("--trace-every must be >= 1")
    ch = prepare(_load(args.channel), args.alpha)
    res = solve(ch, _config(args, args.alpha, trace_every=args.trace_every))
    rows = [
        {"t": r.t, "S": r.s, "gap": r.gap, "eta_t": r.eta, "kl_step": r.kl_step,
         "S_pre_safeguard": r.s_pre_safeguard}
        for r in res.trace
    ]
    _write_csv(rows, TRACE_COLUMNS, args.out)
    return EXIT_OK if res.stop_reason == "tolerance" else EXIT_MAXITER


def _time_solve(n: int, d: int, args) -> float:
    ch = prepare(gen_random_channel(n, d, args.epsilon, args.seed), args.alpha)
    cfg = _config(args, args.alpha)
    t0 = time.perf_counter()
    solve(ch, cfg)
    return time.perf_counter() - t0


def cmd_scale(args) -> int:
    if args.repeats < 1:
        raise InputError("--repeats must be >= 1")
    if not 0.0 < args.alpha < 1.0:
        raise InputError(f"alpha must lie in (0,1), got {args.alpha}")
    cases = [("alphabet", n, args.fixed_d) for n in parse_int_list(args.n_list)]
    cases += [("dimension", args.fixed_n, d) for d in parse_int_list(args.d_list)]
    jobs = [(n, d, args) for _, n, d in cases for _ in range(args.repeats)]
    times = _map(_time_solve, jobs, args.workers)
    rows = []
    for k, (varied, n, d) in enumerate(cases):
        runs = times[k * args.repeats : (k + 1) * args.repeats]
        rows.append({"varied": varied, "n": n, "d": d, "repeats": args.repeats,
                     "runtime_median_s": statistics.median(runs)})
    alphabet = [r["runtime_median_s"] for r in rows if r["varied"] == "alphabet"]
    if any(b < a for a, b in zip(alphabet, alphabet[1:])):
        log.warning("median runtime is not monotone in the alphabet size: %s", alphabet)
    _write_csv(rows, SCALE_COLUMNS, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    extra = None
    if args.channel:
        try:
            extra = load_channel(args.channel)
        except (OSError, ChannelError) as exc:
            print(f"FAIL  channel file {args.channel}: {exc}")
            if args.json:
                Path(args.json).write_text(json.dumps({"passed": False, "error": str(exc)}, indent=2))
            return EXIT_VERIFY
    sizes = []
    for item in args.sizes.split(","):
        try:
            n, d = (int(v) for v in item.lower().split("x"))
        except ValueError as exc:
            raise InputError(f"bad size {item!r}; expected NxD") from exc
        sizes.append((n, d))
    report = run_suite(seeds=args.seeds, sizes=sizes, extra=extra)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  ({c.detail})")
    print(f"{sum(c.passed for c in report.checks)}/{len(report.checks)} properties passed")
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.passed else EXIT_VERIFY


# -- argument parsing -------------------------------------------------------

def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-8, help="duality-gap tolerance")
    p.add_argument("--max-iters", type=int, default=30000)
    p.add_argument("--delta", type=float, default=1e-11, help="probability floor")
    p.add_argument("--eta", default="auto", help="stepsize, or 'auto' for 1/L")
    p.add_argument("--stepsize", choices=["constant", "adaptive"], default="adaptive")
    p.add_argument("--analysis-delta", type=float, default=1e-3,
                   help="truncation level for the reported curvature constants")
    p.add_argument("--log-base", choices=["e", "2"], default="e")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renyicap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a channel file")
    p.add_argument("--kind", choices=["random", "noiseless", "commuting"], default="random")
    p.add_argument("--n", type=int, required=True, help="alphabet size")
    p.add_argument("--d", type=int, default=None, help="output dimension (random/commuting)")
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--matrix", help="JSON file with a row-stochastic matrix (commuting)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="compute the capacity at one alpha")
    p.add_argument("channel")
    p.add_argument("--alpha", type=float, required=True)
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="capacity over a grid of alpha values (CSV)")
    p.add_argument("channel")
    p.add_argument("--alphas", default="0.1:0.9:0.1")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1)
    _solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="per-iteration convergence trace (CSV)")
    p.add_argument("channel")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--trace-every", type=int, default=1)
    _solver_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("scale", help="median runtime over alphabet sizes and dimensions (CSV)")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--n-list", default="10,20,40,80")
    p.add_argument("--d-list", default="4,6,8,10")
    p.add_argument("--fixed-n", type=int, default=10)
    p.add_argument("--fixed-d", type=int, default=6)
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1)
    _solver_flags(p)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--seeds", type=int, default=2)
    p.add_argument("--sizes", default="4x3,10x6")
    p.add_argument("--channel", help="also check this channel file")
    p.add_argument("--json", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "gen" and args.kind in ("random", "commuting") and args.d is None \
            and not (args.kind == "commuting" and args.matrix):
        parser.error("--d is required for this kind")
    try:
        return args.func(args)
    except (InputError, ValueError, ChannelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
