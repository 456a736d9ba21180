#!/usr/bin/env python3
"""Run every verification suite over the bundled sessions and print a table.

    python3 scripts/run_acceptance.py [--jobs N] [--out results.json]
"""
import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from gmpy2 import mpq

from twistlog.session import dump_json, load_session
from twistlog.suites import exit_code, run_suite

HERE = Path(__file__).parent / "sessions"


@dataclass
class Run:
    session: str
    suite: str
    cutoff: str | None = None
    m_range: str | None = None
    n_range: int | None = None


@dataclass
class Plan:
    runs: list = field(default_factory=lambda: [
        Run("even2.json", "heisenberg", m_range="7/3"),
        Run("even1.json", "virasoro", m_range="3"),
        Run("odd1.json", "virasoro", m_range="3"),
        Run("even2.json", "borcherds", cutoff="4", m_range="3/2", n_range=2),
        Run("even2.json", "equivariance", cutoff="2"),
        Run("odd2.json", "equivariance", cutoff="2"),
        Run("even2.json", "nproduct", cutoff="2"),
        Run("odd2.json", "locality", cutoff="2"),
        Run("mixed.json", "translation"),
        Run("mixed.json", "nproduct"),
    ])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    rows, worst = [], 0
    for run in Plan().runs:
        spec = load_session(HERE / run.session)
        if run.cutoff:
            spec = spec.with_overrides(cutoff=mpq(run.cutoff))
        rep = run_suite(run.suite, spec, m_range=mpq(run.m_range) if run.m_range else None,
                        n_range=run.n_range, jobs=args.jobs)
        rc = exit_code(rep)
        worst = max(worst, rc == 1)
        c = rep["counts"]
        extra = f" c={rep['central_charge']['recomputed']}" if "central_charge" in rep else ""
        print(f"{run.session:11s} {run.suite:13s} checked={c['checked']:>7d} failed={c['failed']} "
              f"skipped={c['inconclusive']:>3d} {rep['wall_time_ns'] // 10 ** 6:>6d}ms{extra}")
        rows.append(dict(asdict(run), counts=c, exit=rc))
    if args.out:
        Path(args.out).write_text(dump_json(rows))
    return 1 if worst else 0


if __name__ == "__main__":
    sys.exit(main())
