"""Command-line front end.

Exit codes: 0 for YES or success, 1 for NO, 2 for any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cluster import ARBITRARY, VERTEX, ClusterQuery, ClusterWitness, decide_full
from .errors import ParameterError
from .freespace import FreeSpaceConfig, build_diagram, min_resolvable_d
from .generate import KINDS, generate
from .geom import Trajectory, packedness_lower_bound
from .reachability import extract_boundary_critical_points

PHASES = ("simplify", "near_pairs", "cells", "graph", "sweep")
BENCH_COLUMNS = ("n", *(f"{p}_s" for p in PHASES), "cells", "critical_points")


class InputError(ParameterError):
    """Unreadable or malformed trajectory file."""


@dataclass(frozen=True)
class TrajectoryFile:
    """A CSV trajectory: one ``x,y`` pair per line, optional ``x,y`` header, blank lines ignored."""

    path: Path
    points: np.ndarray

    @classmethod
    def read(cls, path) -> "TrajectoryFile":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"cannot read {path}: {exc}") from exc
        return cls(path, parse_csv(text, str(path)))

    def write(self) -> None:
        write_csv(self.path, self.points)

    def trajectory(self) -> Trajectory:
        return Trajectory(self.points)


def parse_csv(text: str, name: str = "<input>") -> np.ndarray:
    rows = []
    first = True
    for lineno, row in enumerate(csv.reader(text.splitlines()), 1):
        if not row or all(not f.strip() for f in row):
            continue
        fields = [f.strip() for f in row]
        if first and [f.lower() for f in fields] == ["x", "y"]:
            first = False
            continue
        first = False
        if len(fields) != 2:
            raise InputError(f"{name}:{lineno}: expected 2 fields, got {len(fields)}")
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError as exc:
            raise InputError(f"{name}:{lineno}: {exc}") from exc
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InputError(f"{name}:{lineno}: non-finite coordinate")
        rows.append((x, y))
    if len(rows) < 2:
        raise InputError(f"{name}: need at least 2 points, got {len(rows)}")
    return np.asarray(rows, dtype=float)


def write_csv(path, points) -> None:
    lines = ["x,y"] + [f"{float(x)!r},{float(y)!r}" for x, y in np.asarray(points, dtype=float)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def witness_dict(w: ClusterWitness | None, l_used: float, perturbed: bool) -> dict | None:
    if w is None:
        return None
    return {
        "reference": list(w.reference),
        "members": [list(m) for m in w.members],
        "l": l_used,
        "perturbed": perturbed,
    }


@dataclass
class RunReport:
    """JSON-serialisable summary of one decision run."""

    answer: str
    witness: dict | None
    timings: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    perturbed: bool = False
    l_used: float = 0.0
    packedness: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}")
        if not v > 0 or (isinstance(v, float) and not math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


def _add_query(p, with_d: bool = True) -> None:
    p.add_argument("--m", type=_positive(int), required=True)
    p.add_argument("--l", type=_positive(float), required=True)
    if with_d:
        p.add_argument("--d", type=_positive(float), required=True)
    p.add_argument("--eps", type=_positive(float), required=True)
    p.add_argument("--mode", choices=(VERTEX, ARBITRARY), default=VERTEX)


def cmd_decide(args) -> int:
    T = TrajectoryFile.read(args.input).trajectory()
    q = ClusterQuery(args.m, args.l, args.d, args.eps, args.mode)
    r = decide_full(T, q)
    print("YES" if r.answer else "NO")
    if r.perturbed:
        print(f"note: l perturbed to {r.l_used!r}", file=sys.stderr)
    wd = witness_dict(r.witness, r.l_used, r.perturbed)
    if args.witness:
        Path(args.witness).write_text(json.dumps(wd, indent=2) + "\n", encoding="utf-8")
    if args.report:
        pk = packedness_lower_bound(T, args.packedness_samples) if args.packedness_samples > 0 else None
        rep = RunReport("YES" if r.answer else "NO", wd, dict(r.timings), dict(r.counts),
                        r.perturbed, r.l_used, pk)
        Path(args.report).write_text(rep.to_json() + "\n", encoding="utf-8")
    return 0 if r.answer else 1


def cmd_freespace(args) -> int:
    from .plotting import render_freespace

    P = TrajectoryFile.read(args.p).trajectory()
    Q = TrajectoryFile.read(args.q).trajectory()
    fsd = build_diagram(P, Q, FreeSpaceConfig(args.d, args.eps))
    pts = [c.position for c in extract_boundary_critical_points(fsd)]
    fig = render_freespace(fsd, args.svg, points=pts)
    fig.clf()
    print(f"{len(fsd)} cells, {len(pts)} critical points -> {args.svg}")
    return 0


def cmd_gen(args) -> int:
    pts = generate(args.kind, args.n, args.seed)
    write_csv(args.out, pts)
    return 0


def cmd_packedness(args) -> int:
    T = TrajectoryFile.read(args.input).trajectory()
    print(f"{packedness_lower_bound(T, args.samples):.6g}")
    return 0


def bench_rows(kind: str, sizes, q: ClusterQuery, reps: int, seed: int = 0) -> list[dict]:
    rows = []
    for n in sizes:
        T = Trajectory(generate(kind, n, seed))
        runs = []
        for _ in range(reps):
            t0 = time.perf_counter()
            r = decide_full(T, q)
            runs.append((r, time.perf_counter() - t0))
        row = {"size": n}
        for p in PHASES:
            row[p] = statistics.median(r.timings.get(p, 0.0) for r, _ in runs)
        row["total"] = statistics.median(t for _, t in runs)
        c = runs[0][0].counts
        row["n_cells"] = c.get("cells", 0)
        row["critical_points"] = c.get("boundary_points", 0) + c.get("internal_points", 0)
        rows.append(row)
    return rows


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise ParameterError(f"bad --sizes: {exc}") from exc
    if not sizes or min(sizes) < 2:
        raise ParameterError("--sizes needs integers >= 2")
    q = ClusterQuery(args.m, args.l, args.d, args.eps, args.mode)
    rows = bench_rows(args.kind, sizes, q, args.reps, args.seed)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(BENCH_COLUMNS)
    for r in rows:
        out.writerow([r["size"], *(f"{r[p]:.6f}" for p in PHASES), r["n_cells"], r["critical_points"]])
    if args.plot:
        from .plotting import render_bench

        render_bench(rows, args.plot)
    return 0


def bisect_d(T: Trajectory, m: int, l: float, eps: float, mode: str, lo: float, hi: float,
             iters: int = 30) -> float | None:
    """Smallest ``d`` in ``[lo, hi]`` (up to bisection resolution) with a YES answer."""
    if not decide_full(T, ClusterQuery(m, l, hi, eps, mode)).answer:
        return None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if decide_full(T, ClusterQuery(m, l, mid, eps, mode)).answer:
            hi = mid
        else:
            lo = mid
    return hi


def cmd_bisect(args) -> int:
    T = TrajectoryFile.read(args.input).trajectory()
    hi = args.hi if args.hi is not None else T.total_length
    lo = max(args.lo if args.lo is not None else 0.0, min_resolvable_d(T, T))
    if not (0 < lo < hi):
        raise ParameterError("need 0 < --lo < --hi")
    d = bisect_d(T, args.m, args.l, args.eps, args.mode, lo, hi, args.iters)
    if d is None:
        print("NO")
        return 1
    print(f"{d!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sctraj", description="Approximate subtrajectory clustering.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide a cluster query")
    p.add_argument("--input", required=True)
    _add_query(p)
    p.add_argument("--witness")
    p.add_argument("--report")
    p.add_argument("--packedness-samples", type=int, default=8,
                   help="estimator samples for the report (0 skips the estimate)")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("freespace", help="render the simplified free space to SVG")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--d", type=_positive(float), required=True)
    p.add_argument("--eps", type=_positive(float), required=True)
    p.add_argument("--svg", required=True)
    p.set_defaults(func=cmd_freespace)

    p = sub.add_parser("gen", help="write a test curve")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=_positive(int), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("packedness", help="packedness lower bound of a trajectory")
    p.add_argument("--input", required=True)
    p.add_argument("--samples", type=_positive(int), default=16)
    p.set_defaults(func=cmd_packedness)

    p = sub.add_parser("bench", help="phase timings over input sizes (CSV on stdout)")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--sizes", required=True)
    _add_query(p)
    p.add_argument("--reps", type=_positive(int), default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bisect-d", help="smallest d with a YES answer")
    p.add_argument("--input", required=True)
    _add_query(p, with_d=False)
    p.add_argument("--lo", type=_positive(float), help="lower end (default: numerical resolution)")
    p.add_argument("--hi", type=_positive(float))
    p.add_argument("--iters", type=_positive(int), default=30)
    p.set_defaults(func=cmd_bisect)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args)
    except (ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
