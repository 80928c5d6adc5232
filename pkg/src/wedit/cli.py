"""Command-line front end.

    wedit dist X Y [--unit | --weights FILE] [--k K] [--relaxed] [--approx EPS] [--json]
    wedit align X Y ...
    wedit sed X [--k K]
    wedit dynamic X Y --script FILE [--k K]
    wedit bench [--n N ...] [--k K ...] [--W W] [--reps R]
    wedit selftest [--quick]

X and Y are files (plain text or FASTA, first record) or inline strings.
Exit status: 2 for malformed input, 1 for a violated precondition, 0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from typing import List, Optional, Sequence

import numpy as np

from . import counters
from .align_graph import WeightFunction, brute_bm, full_dp
from .dynamic_solver import DynamicED, EditEvent, parse_script, recost
from .hierarchical import had_build
from .sed import PreconditionError, sed, sed_leq, sed_oracle
from .static_solver import DEFAULT, SolverConfig, approx_weights, solve


class InputError(ValueError):
    """Malformed command-line input (exit status 2)."""


# ---------------------------------------------------------------------------
# inputs


def read_sequence(arg: str) -> bytes:
    """Contents of a file (FASTA: first record) or the argument itself."""
    if not os.path.isfile(arg):
        return arg.encode("latin-1") if arg.isascii() else arg.encode("utf-8")
    with open(arg, "rb") as fh:
        raw = fh.read()
    lines = raw.splitlines()
    if lines and lines[0].lstrip().startswith(b">"):
        seq: List[bytes] = []
        seen = False
        for ln in lines:
            if ln.startswith(b">"):
                if seen:
                    break
                seen = True
                continue
            seq.append(ln.strip())
        return b"".join(seq)
    return b"".join(ln.strip(b"\r") for ln in lines)


def read_weights(args) -> WeightFunction:
    if args.weights is None:
        return WeightFunction.unit()
    try:
        with open(args.weights, "r", encoding="latin-1") as fh:
            return WeightFunction.parse(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read weight file: {exc}") from None
    except ValueError as exc:
        raise InputError(f"bad weight file: {exc}") from None


def check_alphabet(w: WeightFunction, *seqs: bytes) -> None:
    if w.alphabet is None:
        return
    allowed = set(w.alphabet)
    for s in seqs:
        bad = set(s) - allowed
        if bad:
            shown = bytes(sorted(bad)).decode("latin-1")
            raise InputError(f"characters {shown!r} are not in the weight alphabet")


def solver_config(args) -> SolverConfig:
    if args.relaxed and args.k is None:
        raise InputError("--relaxed needs --k")
    return SolverConfig(relaxed=True if args.relaxed else None)


# ---------------------------------------------------------------------------
# reports


def emit(args, command: str, k, lines: Sequence[str], alignment: Optional[dict] = None) -> None:
    if args.json:
        rep = {"command": command, "k": k}
        if alignment is not None:
            rep["alignment"] = alignment
        rep["counters"] = dict(sorted(counters.snapshot().items()))
        print(json.dumps(rep))
    else:
        for ln in lines:
            print(ln)


def _distance(args, x: bytes, y: bytes, w: WeightFunction):
    cfg = solver_config(args)
    if args.approx is not None:
        if args.approx <= 0:
            raise InputError("--approx needs a positive epsilon")
        _, a = solve(x, y, approx_weights(w, args.approx), cfg)
        d = recost(a, x, y, w)
    else:
        d, a = solve(x, y, w, cfg)
    if args.k is not None and d > args.k:
        raise PreconditionError(f"the distance exceeds --k {args.k}")
    return d, a


def cmd_dist(args) -> int:
    x, y = read_sequence(args.x), read_sequence(args.y)
    w = read_weights(args)
    check_alphabet(w, x, y)
    d, _ = _distance(args, x, y, w)
    emit(args, "dist", d, [str(d)])
    return 0


def cmd_align(args) -> int:
    x, y = read_sequence(args.x), read_sequence(args.y)
    w = read_weights(args)
    check_alphabet(w, x, y)
    d, a = _distance(args, x, y, w)
    pts = " ".join(f"({p},{q})" for p, q in a.points)
    cig = a.cigar(x, y)
    emit(args, "align", d, [str(d), pts, cig],
         alignment={"points": [list(p) for p in a.points], "cigar": cig})
    return 0


def cmd_sed(args) -> int:
    x = read_sequence(args.x)
    if args.k is None:
        v = sed(x)
        emit(args, "sed", v, [str(v)])
        return 0
    if args.k < 0:
        raise InputError("--k must be non-negative")
    res = sed_leq(x, args.k)
    if res is None:
        emit(args, "sed", f">{args.k}", [f">{args.k}"])
    else:
        emit(args, "sed", res[0], [str(res[0])])
    return 0


def cmd_dynamic(args) -> int:
    x, y = read_sequence(args.x), read_sequence(args.y)
    w = read_weights(args)
    check_alphabet(w, x, y)
    if args.script is None:
        raise InputError("dynamic needs --script")
    try:
        with open(args.script, "r", encoding="latin-1") as fh:
            events = parse_script(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read script: {exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    s = DynamicED(x, y, w, threshold=args.k)
    out: List = []
    for e in events:
        if e.char is not None:
            check_alphabet(w, bytes([e.char]))
        try:
            d, _ = s.apply(e)
        except IndexError as exc:
            raise InputError(f"event '{e}': {exc}") from None
        out.append(d if d is not None else f">{args.k}")
    emit(args, "dynamic", out, [str(v) for v in out])
    return 0


def _planted(n: int, k: int, rng: random.Random) -> tuple:
    x = bytes(rng.choice(b"acgt") for _ in range(n))
    y = bytearray(x)
    for _ in range(k):
        p = rng.randrange(len(y))
        op = rng.randrange(3)
        if op == 0:
            y[p] = rng.choice(b"acgt")
        elif op == 1:
            del y[p]
        else:
            y.insert(p, rng.choice(b"acgt"))
    return x, bytes(y)


def cmd_bench(args) -> int:
    rng = random.Random(args.seed)
    w = WeightFunction.uniform(args.W, args.W) if args.W > 1 else WeightFunction.unit()
    lines = ["n,k,W,wall_ms,op_counters"]
    rows = []
    for n in args.n:
        for k in args.k_list:
            x, y = _planted(n, k, rng)
            best = None
            snap = {}
            for _ in range(args.reps):
                counters.reset()
                t0 = time.perf_counter()
                d, _ = solve(x, y, w, DEFAULT)
                ms = (time.perf_counter() - t0) * 1000
                if best is None or ms < best:
                    best, snap = ms, counters.snapshot()
            ops = ";".join(f"{key}={val}" for key, val in sorted(snap.items()))
            lines.append(f"{n},{d},{w.W},{best:.3f},{ops}")
            rows.append({"n": n, "k": d, "W": w.W, "wall_ms": round(best, 3), "op_counters": snap})
    if args.json:
        print(json.dumps({"command": "bench", "k": [r["k"] for r in rows], "counters": rows}))
    else:
        print("\n".join(lines))
    return 0


def selftest(rounds: int = 60, seed: int = 0, out=sys.stdout) -> bool:
    """Small randomized runs of every solver against brute-force references."""
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    ok = True

    def report(name: str, bad: int, total: int) -> None:
        nonlocal ok
        ok &= bad == 0
        print(f"{'PASS' if bad == 0 else 'FAIL'} {name}: {total - bad}/{total}", file=out)

    def rand(alpha: bytes, n: int) -> bytes:
        return bytes(rng.choice(alpha) for _ in range(n))

    bad = 0
    for _ in range(rounds):
        w = WeightFunction.random(list(b"acgt"), rng.choice([1, 2, 5]), nrng)
        x = rand(b"acgt", rng.randint(0, 60))
        y = bytearray(x)
        for _ in range(rng.randint(0, 8)):
            if y:
                y[rng.randrange(len(y))] = rng.choice(b"acgt")
        d, a = solve(x, bytes(y), w)
        bad += d != full_dp(x, bytes(y), w) or a.cost(x, bytes(y), w) != d
    report("solve vs full DP", bad, rounds)

    bad = 0
    for _ in range(rounds):
        w = WeightFunction.random(list(b"ab"), rng.choice([1, 2, 3]), nrng)
        x, y = rand(b"ab", rng.randint(1, 6)), rand(b"ab", rng.randint(1, 6))
        bad += not np.array_equal(had_build(x, y, w).root.matrix, brute_bm(x, y, w))
    report("boundary matrices vs Dijkstra", bad, rounds)

    bad = 0
    for _ in range(rounds):
        x = rand(b"ab", rng.randint(0, 30))
        bad += sed(x) != sed_oracle(x)
    report("sed vs exhaustive DP", bad, rounds)

    bad = 0
    for _ in range(max(1, rounds // 6)):
        w = WeightFunction.random(list(b"ab"), rng.choice([1, 2]), nrng)
        x = rand(b"ab", rng.randint(1, 40))
        y = x
        s = DynamicED(x, y, w)
        for _ in range(30):
            side = rng.choice("XY")
            cur = x if side == "X" else y
            op = rng.choice(["ins", "del", "sub"]) if cur else "ins"
            e = EditEvent(side, op, rng.randrange(len(cur) + (op == "ins")), None if op == "del" else rng.choice(b"ab"))
            if side == "X":
                x = e.apply(x)
            else:
                y = e.apply(y)
            d, _ = s.apply(e)
            if d != full_dp(x, y, w):
                bad += 1
                break
    report("dynamic replay vs recomputation", bad, max(1, rounds // 6))
    return ok


def cmd_selftest(args) -> int:
    ok = selftest(rounds=20 if args.quick else 60, seed=args.seed, out=sys.stderr if args.json else sys.stdout)
    if args.json:
        print(json.dumps({"command": "selftest", "k": None, "counters": {"ok": ok}}))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wedit", description="Weighted edit distance: static, self and dynamic.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(q, two: bool = True, weights: bool = True) -> None:
        q.add_argument("x", help="first sequence: file (plain or FASTA) or inline string")
        if two:
            q.add_argument("y", help="second sequence")
        if weights:
            g = q.add_mutually_exclusive_group()
            g.add_argument("--unit", action="store_true", help="unit weights (default)")
            g.add_argument("--weights", metavar="FILE", help="weight-matrix file")
        q.add_argument("--k", type=int, help="distance cap (threshold for sed and dynamic)")
        q.add_argument("--json", action="store_true", help="print one JSON object")

    for name, fn in (("dist", cmd_dist), ("align", cmd_align)):
        q = sub.add_parser(name, help=f"{name} of two sequences")
        common(q)
        q.add_argument("--relaxed", action="store_true", help="relaxed boundary matrices (needs --k)")
        q.add_argument("--approx", type=float, metavar="EPS", help="solve under coarsened weights")
        q.set_defaults(fn=fn)

    q = sub.add_parser("sed", help="self-edit distance")
    common(q, two=False, weights=False)
    q.set_defaults(fn=cmd_sed)

    q = sub.add_parser("dynamic", help="replay an edit script")
    common(q)
    q.add_argument("--script", metavar="FILE", help="edit script, one event per line")
    q.set_defaults(fn=cmd_dynamic)

    q = sub.add_parser("bench", help="CSV timings on planted instances")
    q.add_argument("--n", type=int, nargs="+", default=[10000, 20000])
    q.add_argument("--k", dest="k_list", type=int, nargs="+", default=[16])
    q.add_argument("--W", type=int, default=1)
    q.add_argument("--reps", type=int, default=3)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=cmd_bench)

    q = sub.add_parser("selftest", help="run the randomized oracle suites")
    q.add_argument("--quick", action="store_true")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    counters.reset()
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"wedit: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"wedit: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
