"""Twisted affinization: elements a t^m plus the central element K."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from gmpy2 import mpq

from .scalars import as_q, frac_part
from .twist import TwistPair

__all__ = [
    "LoopElement",
    "LieStructure",
    "CosetError",
    "bracket",
    "cocycle",
    "triangular_part",
    "abelian",
    "sl2_with_nilpotent",
]


class CosetError(ValueError):
    pass


@dataclass(frozen=True)
class LoopElement:
    """Finite sum of c * v_i t^m plus a central coefficient of K."""

    terms: Mapping[tuple[int, mpq], object] = field(default_factory=dict)
    central: object = mpq(0)

    def __post_init__(self):
        clean = {}
        for (i, m), c in self.terms.items():
            key = (int(i), as_q(m))
            c = clean.get(key, 0) + c
            if c:
                clean[key] = c
            else:
                clean.pop(key, None)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def mono(cls, i: int, m, c=1) -> LoopElement:
        return cls({(i, as_q(m)): mpq(c)})

    @classmethod
    def K(cls, c=1) -> LoopElement:
        return cls({}, mpq(c))

    def __add__(self, other: LoopElement) -> LoopElement:
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return LoopElement(t, self.central + other.central)

    def __neg__(self) -> LoopElement:
        return LoopElement({k: -c for k, c in self.terms.items()}, -self.central)

    def __sub__(self, other: LoopElement) -> LoopElement:
        return self + (-other)

    def scale(self, c) -> LoopElement:
        return LoopElement({k: c * v for k, v in self.terms.items()}, c * self.central)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LoopElement):
            return NotImplemented
        return self.terms == other.terms and self.central == other.central

    def __hash__(self):
        return hash((tuple(self.terms.items()), self.central))

    def __bool__(self) -> bool:
        return bool(self.terms) or bool(self.central)

    def __repr__(self) -> str:
        parts = [f"{c}*v{i + 1}t^{m}" for (i, m), c in self.terms.items()]
        if self.central:
            parts.append(f"{self.central}*K")
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class LieStructure:
    """Lie algebra on h with structure constants ``consts[(i, j)] = {k: c}``."""

    tp: TwistPair
    consts: Mapping[tuple[int, int], Mapping[int, object]] = field(default_factory=dict)
    level: object = mpq(1)
    dual_coxeter: mpq = mpq(0)

    def lie(self, a: Iterable, b: Iterable) -> tuple:
        a, b = tuple(a), tuple(b)
        out = [mpq(0)] * self.tp.dim
        for (i, j), row in self.consts.items():
            if a[i] and b[j]:
                for k, c in row.items():
                    out[k] += a[i] * b[j] * c
        return tuple(out)

    def is_abelian(self) -> bool:
        return not any(c for row in self.consts.values() for c in row.values())

    def violations(self) -> list[str]:
        d = self.tp.dim
        e = [self.tp.basis_vector(i) for i in range(d)]
        out = []
        for i in range(d):
            for j in range(d):
                if any(x + y for x, y in zip(self.lie(e[i], e[j]), self.lie(e[j], e[i]))):
                    out.append(f"antisymmetry fails at ({i}, {j})")
                for k in range(d):
                    jac = [mpq(0)] * d
                    for x, y, z in ((i, j, k), (j, k, i), (k, i, j)):
                        jac = [p + q for p, q in zip(jac, self.lie(e[x], self.lie(e[y], e[z])))]
                    if any(jac):
                        out.append(f"Jacobi fails at ({i}, {j}, {k})")
                    lhs = self.tp.space.form(self.lie(e[i], e[j]), e[k])
                    rhs = self.tp.space.form(e[i], self.lie(e[j], e[k]))
                    if lhs != rhs:
                        out.append(f"form not invariant at ({i}, {j}, {k})")
        return out


def abelian(tp: TwistPair, level=1) -> LieStructure:
    return LieStructure(tp, {}, as_q(level), mpq(0))


def sl2_with_nilpotent() -> LieStructure:
    """sl2 in the basis (e, h, f) with N = ad e and the trace form (e|f) = 1, (h|h) = 2."""
    from .twist import QuadraticSpace

    G = ((0, 0, 1), (0, 2, 0), (1, 0, 0))
    # N e = 0, N h = -2e, N f = h
    N = ((0, -2, 0), (0, 0, 1), (0, 0, 0))
    tp = TwistPair(QuadraticSpace(G, ("e", "h", "f")), (0, 0, 0), N)
    consts = {
        (0, 1): {0: mpq(-2)}, (1, 0): {0: mpq(2)},
        (0, 2): {1: mpq(1)}, (2, 0): {1: mpq(-1)},
        (1, 2): {2: mpq(-2)}, (2, 1): {2: mpq(2)},
    }
    return LieStructure(tp, consts, mpq(1), mpq(2))


def _check_coset(tp: TwistPair, i: int, m) -> None:
    if frac_part(m - tp.alpha[i]):
        raise CosetError(f"exponent {m} not in the coset of v{i + 1} ({tp.alpha[i]} + Z)")


def cocycle(ls: LieStructure, i: int, m, j: int, n) -> mpq:
    """delta_{m,-n} ((m + N) v_i | v_j)."""
    m, n = as_q(m), as_q(n)
    if m + n:
        return mpq(0)
    tp = ls.tp
    a = tp.basis_vector(i)
    ma = tuple(m * x + y for x, y in zip(a, tp.apply_N(a)))
    return tp.space.form(ma, tp.basis_vector(j))


def bracket(x: LoopElement, y: LoopElement, ls: LieStructure) -> LoopElement:
    tp = ls.tp
    for el in (x, y):
        for i, m in el.terms:
            _check_coset(tp, i, m)
    terms: dict = {}
    central = mpq(0)
    for (i, m), c in x.terms.items():
        for (j, n), d in y.terms.items():
            for k, s in enumerate(ls.lie(tp.basis_vector(i), tp.basis_vector(j))):
                if s:
                    terms[(k, m + n)] = terms.get((k, m + n), 0) + c * d * s
            central += c * d * cocycle(ls, i, m, j, n)
    return LoopElement(terms, central)


def triangular_part(x: LoopElement, tp: TwistPair) -> str:
    """'plus', 'zero' or 'minus' for a single term or K.

    Exponents are rational, so the sign of m decides; the imaginary-part
    tie-break for purely imaginary exponents never fires.
    """
    if not x.terms:
        return "zero"
    if len(x.terms) != 1:
        raise ValueError("triangular_part expects a single term")
    (i, m), _ = next(iter(x.terms.items()))
    _check_coset(tp, i, m)
    if m > 0:
        return "plus"
    if m < 0:
        return "minus"
    if tp.alpha[i] != 0:
        raise CosetError(f"v{i + 1} t^0 requires v{i + 1} in the sigma-fixed subspace")
    return "zero"

