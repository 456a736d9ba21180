import sys
from functools import lru_cache

from gmpy2 import mpq
from hypothesis import HealthCheck, settings

from twistlog.fock import BlockSpec, FockModule, ModuleSpec

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@lru_cache(maxsize=None)
def module(kind, ell, alpha0, cutoff, zero_cap=0, **params):
    blk = BlockSpec(kind, ell, mpq(alpha0), **{k: mpq(v) for k, v in params.items()})
    return FockModule(ModuleSpec((blk,), mpq(cutoff), zero_cap))


def unit(mod, g):
    return mod.tp.basis_vector(g)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
