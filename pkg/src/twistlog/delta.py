"""Truncated two-variable series and the shifted delta function."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from gmpy2 import mpq

from . import linalg as la
from .scalars import as_q, factorial, frac_part
from .twist import TwistPair

__all__ = ["TwoVarSeries", "shifted_delta", "delta_from_representative"]


@dataclass
class TwoVarSeries:
    """Finite sum of c * z1^p1 zeta1^k1 z2^p2 zeta2^k2 with p1 in [lo1, hi1].

    Coefficients are matrices on h (tuples of tuples).  The window records the
    range of p1 over which the stored terms are complete.
    """

    dim: int
    terms: dict = field(default_factory=dict)
    lo1: mpq = mpq(0)
    hi1: mpq = mpq(0)

    def add(self, key: tuple, c) -> None:
        key = (as_q(key[0]), key[1], as_q(key[2]), key[3])
        cur = self.terms.get(key)
        new = c if cur is None else la.matadd(cur, c)
        if la.is_zero(new):
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    def times_z12(self) -> TwoVarSeries:
        """Multiply by z1 - z2; the window shrinks by one at the top."""
        out = TwoVarSeries(self.dim, {}, self.lo1 + 1, self.hi1)
        for (p1, k1, p2, k2), c in self.terms.items():
            out.add((p1 + 1, k1, p2, k2), c)
            out.add((p1, k1, p2 + 1, k2), la.matscale(-1, c))
        return out

    def interior(self, margin: int = 1) -> dict:
        lo, hi = self.lo1 + margin, self.hi1 - margin
        return {k: c for k, c in self.terms.items() if lo <= k[0] <= hi}

    def __eq__(self, other) -> bool:
        return isinstance(other, TwoVarSeries) and self.terms == other.terms


def _exp_terms(tp: TwistPair):
    """(a, b, matrix) with e^{(zeta2 - zeta1) N} = sum zeta1^a zeta2^b matrix."""
    d = tp.dim
    powers = [la.identity(d)]
    while not la.is_zero(powers[-1]):
        powers.append(la.matmul(tp.N, powers[-1]))
    out = []
    for a in range(len(powers)):
        for b in range(len(powers) - a):
            P = powers[a + b]
            if la.is_zero(P):
                continue
            c = mpq((-1) ** a, factorial(a) * factorial(b))
            out.append((a, b, la.matscale(c, P)))
    return out


def shifted_delta(alpha, tp: TwistPair, lo, hi) -> TwoVarSeries:
    """Sum over m in alpha + Z, lo <= m <= hi, of z1^{-m-1} z2^m e^{(zeta2 - zeta1) N}."""
    alpha, lo, hi = as_q(alpha), as_q(lo), as_q(hi)
    out = TwoVarSeries(tp.dim, {}, -hi - 1, -lo - 1)
    exp = _exp_terms(tp)
    m = lo + frac_part(alpha - lo)
    while m <= hi:
        for a, b, c in exp:
            out.add((-m - 1, a, m, b), c)
        m += 1
    return out


def delta_from_representative(m0, tp: TwistPair, lo_n: int, hi_n: int) -> TwoVarSeries:
    """z1^{-m0} z2^{m0} delta(z1, z2) e^{(zeta2 - zeta1) N} with delta summed over lo_n <= n <= hi_n."""
    m0 = as_q(m0)
    plain = TwoVarSeries(tp.dim, {}, -hi_n - 1 - m0, -lo_n - 1 - m0)
    exp = _exp_terms(tp)
    for n in range(lo_n, hi_n + 1):
        for a, b, c in exp:
            plain.add((mpq(-n - 1) - m0, a, mpq(n) + m0, b), c)
    return plain
