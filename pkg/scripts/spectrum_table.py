#!/usr/bin/env python3
"""L0 Jordan partitions per energy level for a family of single-block sessions."""
import argparse
import sys

from gmpy2 import mpq

from twistlog.fock import BlockSpec, FockModule, ModuleSpec
from twistlog.scalars import format_q
from twistlog.virasoro import JordanError, spectrum


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cutoff", default="2")
    ap.add_argument("--max-ell", type=int, default=3)
    args = ap.parse_args(argv)
    D = mpq(args.cutoff)
    for kind in ("even", "odd"):
        for ell in range(1, args.max_ell + 1):
            for alpha0 in ([mpq(-1, q) for q in (2, 3, 4)] if kind == "even" else [mpq(-1, 2)]):
                mod = FockModule(ModuleSpec((BlockSpec(kind, ell, alpha0),), D))
                try:
                    sp = spectrum(mod)
                except JordanError as exc:
                    print(f"{kind} ell={ell} alpha0={format_q(alpha0)}: {exc}")
                    continue
                parts = " ".join(f"{lv['energy']}:{lv['partition']}" for lv in sp["levels"]
                                 if max(lv["partition"]) > 1)
                print(f"{kind} ell={ell} alpha0={format_q(alpha0):5s} h={sp['vacuum_weight']:7s} "
                      f"dim={mod.dim:4d} non-semisimple: {parts or '-'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
