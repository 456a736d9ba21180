"""twistlog command line: build | verify | spectrum | report."""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .fock import SpecError
from .scalars import format_q
from .session import dump_json, load_session, parse_rational
from .suites import SUITES, default_jobs, exit_code, operator_manifest, run_suite
from .virasoro import JordanError, spectrum

USAGE_ERROR = 2


def _session(args):
    spec = load_session(args.spec)
    cutoff = parse_rational(args.cutoff, "--cutoff") if args.cutoff is not None else None
    return spec.with_overrides(cutoff=cutoff, zero_cap=args.zero_cap)


def _emit(obj, out) -> None:
    text = dump_json(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_build(args) -> int:
    spec = _session(args)
    module = spec.build()
    basis = {
        "session": spec.to_dict(),
        "dim": module.dim,
        "conductor": spec.module_spec().M,
        "vacuum_weight": format_q(module.vacuum_weight()),
        "variables": [{"label": list(lab), "energy": format_q(e)}
                      for lab, e in zip(module.var_labels, module.var_energy)],
        "basis": module.basis_json(),
    }
    if not args.out:
        _emit(basis, None)
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "basis.json").write_text(dump_json(basis))
    (out / "operators.json").write_text(dump_json(operator_manifest(module)))
    print(f"wrote {module.dim} basis vectors to {out}", file=sys.stderr)
    return 0


def _jobs(args) -> int:
    return args.jobs if args.jobs is not None else default_jobs()


def cmd_verify(args) -> int:
    spec = _session(args)
    m_range = parse_rational(args.m_range, "--m-range") if args.m_range is not None else None
    n_range = int(args.n_range) if args.n_range is not None else None
    report = run_suite(args.suite, spec, m_range=m_range, n_range=n_range, jobs=_jobs(args), cache=args.cache)
    _emit(report, args.out)
    c = report["counts"]
    print(f"{args.suite}: checked={c['checked']} failed={c['failed']} inconclusive={c['inconclusive']}",
          file=sys.stderr)
    return exit_code(report)


def cmd_spectrum(args) -> int:
    spec = _session(args)
    module = spec.build()
    levels = None
    if args.levels:
        levels = [parse_rational(x, "--levels") for x in args.levels.split(",")]
        over = [x for x in levels if x > spec.cutoff]
        if over:
            raise SpecError(f"level {format_q(over[0])} is beyond the cutoff {format_q(spec.cutoff)}")
    try:
        out = spectrum(module, levels)
    except JordanError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return 3
    out["session"] = spec.to_dict()
    _emit(out, args.out)
    return 0


def cmd_report(args) -> int:
    spec = _session(args)
    suites = args.suite.split(",") if args.suite else list(SUITES)
    t0 = time.perf_counter_ns()
    rows, codes = [], []
    for s in suites:
        rep = run_suite(s, spec, jobs=_jobs(args), cache=args.cache)
        rc = exit_code(rep)
        codes.append(rc)
        rows.append({"suite": s, "exit": rc, **rep["counts"]})
        print(f"{s:13s} checked={rep['counts']['checked']:>8d} failed={rep['counts']['failed']} "
              f"inconclusive={rep['counts']['inconclusive']}", file=sys.stderr)
    _emit({"session": spec.to_dict(), "suites": rows, "wall_time_ns": time.perf_counter_ns() - t0}, args.out)
    if 1 in codes:
        return 1
    return 3 if 3 in codes else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistlog", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--spec", required=True, help="session JSON file")
        sp.add_argument("--out", help="output path (directory for build)")
        sp.add_argument("--cutoff", help="override the energy cutoff, e.g. 7/2")
        sp.add_argument("--zero-cap", type=int, help="override the zero-energy degree cap")
        sp.add_argument("--jobs", type=int, help="worker processes (default: $TWISTLOG_JOBS or 1)")

    b = sub.add_parser("build", help="enumerate the basis and write mode operators")
    common(b)
    b.set_defaults(fn=cmd_build)

    v = sub.add_parser("verify", help="run one verification suite")
    common(v)
    v.add_argument("--suite", required=True, choices=SUITES)
    v.add_argument("--m-range", help="bound on mode exponents (rational) or on Virasoro indices")
    v.add_argument("--n-range", help="bound on n (Borcherds), Virasoro second index, or locality order")
    v.add_argument("--cache", help="operators.json (or build directory) to load mode operators from")
    v.set_defaults(fn=cmd_verify)

    s = sub.add_parser("spectrum", help="L0 generalized eigenvalues and Jordan partitions")
    common(s)
    s.add_argument("--levels", help="comma-separated energies, default all")
    s.set_defaults(fn=cmd_spectrum)

    r = sub.add_parser("report", help="run several suites and summarize")
    common(r)
    r.add_argument("--suite", help="comma-separated suites, default all")
    r.add_argument("--cache", help="operator cache as for verify")
    r.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return USAGE_ERROR
    try:
        return args.fn(args)
    except (SpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
