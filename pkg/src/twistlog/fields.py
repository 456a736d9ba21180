"""Truncated logarithmic fields and the identity checks built on them.

A :class:`LogField` stores operators ``f[(m, k)]`` multiplying ``z^(-m-1) zeta^k``.
Its weight ``w`` fixes the energy shift of every component, ``w - m``; for
fields of generators w = 0, so the component at m shifts energy by -m.
Components with shift above the cutoff cannot reach the truncated space and are
not stored; those with shift below ``-cutoff`` vanish identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from . import linalg as la
from .fock import FockModule
from .scalars import Scalar, binom_rational, factorial, frac_part, root_of_unity
from .sparse import SparseOperator, WindowError
from .twist import operator_binom

__all__ = [
    "LogField",
    "LocalityError",
    "CheckResult",
    "field_of",
    "identity_field",
    "restrict_zeta_zero",
    "annihilation_split",
    "normally_ordered",
    "nth_product",
    "D_z",
    "partial_zeta",
    "D_zeta",
    "shift_z",
    "check_locality",
    "BorcherdsEngine",
    "borcherds_check",
    "phi_equivariance_check",
    "translation_check",
    "propagator_check",
]


class LocalityError(ArithmeticError):
    """The two orderings in the n-th product formula disagree."""


@dataclass
class CheckResult:
    name: str
    checked: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)
    inconclusive: int = 0

    @property
    def failed(self) -> int:
        return len(self.failures)

    @property
    def ok(self) -> bool:
        return not self.failures

    def merge(self, other: CheckResult) -> CheckResult:
        self.checked += other.checked
        self.passed += other.passed
        self.failures += other.failures
        self.inconclusive += other.inconclusive
        return self

    def compare(self, lhs: SparseOperator, rhs: SparseOperator, tag: dict,
                window: Iterable[int] | None = None) -> bool:
        w = lhs.window & rhs.window
        if window is not None:
            w &= frozenset(window)
        if not w:
            self.inconclusive += 1
            return True
        self.checked += len(w)
        diff = lhs.first_difference(rhs, w)
        if diff is None:
            self.passed += len(w)
            return True
        bad = sum(1 for c in w if lhs.cols.get(c, {}) != rhs.cols.get(c, {}))
        self.passed += len(w) - bad
        c, r, x, y = diff
        self.failures.append(dict(tag, vector=c, row=r, lhs=str(x), rhs=str(y), bad_vectors=bad))
        return False


def _rng(lo, hi, coset) -> list[mpq]:
    """All m = coset (mod 1) with lo <= m <= hi."""
    c = frac_part(coset)
    start = lo + frac_part(c - lo)
    out = []
    m = mpq(start)
    while m <= hi:
        out.append(m)
        m += 1
    return out


class LogField:
    def __init__(self, module: FockModule, comps: Mapping[tuple, SparseOperator], weight,
                 cosets: Iterable, m_lo=None):
        self.module = module
        self.weight = mpq(weight)
        self.cosets = frozenset(frac_part(c) for c in cosets)
        self.m_lo = None if m_lo is None else mpq(m_lo)
        self.comps = {(mpq(m), k): op for (m, k), op in comps.items()}

    @property
    def dim(self) -> int:
        return self.module.dim

    @property
    def cutoff(self):
        return self.module.spec.cutoff

    def zeta_degree(self) -> int:
        ks = [k for (m, k), op in self.comps.items() if op.cols]
        return max(ks) if ks else 0

    def zeta_degrees(self) -> list[int]:
        return sorted({k for _, k in self.comps})

    def shift_of(self, m) -> mpq:
        return self.weight - m

    def component(self, m, k: int) -> SparseOperator:
        m = mpq(m)
        op = self.comps.get((m, k))
        if op is not None:
            return op
        shift = self.weight - m
        if frac_part(m) not in self.cosets or k < 0:
            return SparseOperator.zero(self.dim, shift)
        if self.m_lo is not None and m < self.m_lo:
            return SparseOperator.zero(self.dim, shift, window=())
        return SparseOperator.zero(self.dim, shift)

    def exponents(self) -> list[mpq]:
        return sorted({m for m, _ in self.comps})

    def m_range(self) -> list[mpq]:
        """Exponents whose components can act nontrivially on the truncated space."""
        D = self.cutoff
        out = []
        for c in sorted(self.cosets):
            out += _rng(self.weight - D, self.weight + D, c)
        return sorted(out)

    def _like(self, comps, weight=None, cosets=None, m_lo="same") -> LogField:
        return LogField(self.module, comps, self.weight if weight is None else weight,
                        self.cosets if cosets is None else cosets,
                        self.m_lo if m_lo == "same" else m_lo)

    def __add__(self, other: LogField) -> LogField:
        if self.weight != other.weight:
            raise ValueError("adding fields of different weight")
        keys = set(self.comps) | set(other.comps)
        lo = _max_lo(self.m_lo, other.m_lo)
        comps = {key: self.component(*key) + other.component(*key) for key in keys}
        return self._like(comps, cosets=self.cosets | other.cosets, m_lo=lo)

    def __neg__(self) -> LogField:
        return self.scale(-1)

    def __sub__(self, other: LogField) -> LogField:
        return self + (-other)

    def scale(self, c) -> LogField:
        return self._like({key: op.scale(c) for key, op in self.comps.items()})

    def restrict_columns(self, cols: Iterable[int]) -> LogField:
        cols = frozenset(cols)
        return self._like({key: op.restrict(cols) for key, op in self.comps.items()})

    def compare(self, other: LogField, result: CheckResult, tag: dict | None = None) -> CheckResult:
        """Componentwise comparison on common windows, within the non-truncated range."""
        tag = tag or {}
        if self.weight != other.weight:
            result.failures.append(dict(tag, reason=f"weights {self.weight} != {other.weight}"))
            return result
        lo = _max_lo(self.m_lo, other.m_lo)
        for key in sorted(set(self.comps) | set(other.comps)):
            if lo is not None and key[0] < lo:
                continue
            result.compare(self.component(*key), other.component(*key),
                           dict(tag, m=str(key[0]), k=key[1]))
        return result

    def __repr__(self) -> str:
        return f"LogField(weight={self.weight}, comps={len(self.comps)}, zeta_degree={self.zeta_degree()})"


def _max_lo(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


# ----------------------------------------------------------------------- builders


def field_of(module: FockModule, a: Sequence) -> LogField:
    """Y(a, z) on the truncated module; component (m, k) is (-1)^k/k! (N^k a) t^m."""
    tp = module.tp
    D = module.spec.cutoff
    a = tuple(mpq(x) for x in a)
    cosets = {tp.alpha[g] for g, x in enumerate(a) if x}
    comps = {}
    vk, k = a, 0
    while any(vk):
        c = mpq((-1) ** k, factorial(k))
        for co in cosets:
            for m in _rng(-D, D, co):
                op = module.mode_vec(vk, m)
                if op.cols or k == 0:
                    comps[(m, k)] = op.scale(c)
        vk = tp.apply_N(vk)
        k += 1
    return LogField(module, comps, 0, cosets, m_lo=-D)


def identity_field(module: FockModule) -> LogField:
    return LogField(module, {(mpq(-1), 0): SparseOperator.identity(module.dim)}, -1, [0], None)


def restrict_zeta_zero(f: LogField) -> LogField:
    return f._like({key: op for key, op in f.comps.items() if key[1] == 0})


def annihilation_split(f: LogField) -> tuple[LogField, LogField]:
    """(creation part, annihilation part): z^g with g >= 0 versus g < 0, where g = -m-1."""
    plus = {key: op for key, op in f.comps.items() if key[0] <= -1}
    minus = {key: op for key, op in f.comps.items() if key[0] > -1}
    return f._like(plus), f._like(minus)


def D_z(f: LogField) -> LogField:
    """(d/dz + z^-1 d/dzeta) f."""
    comps = {}
    for (m, k), op in f.comps.items():
        # z^{-m-1} zeta^k -> (-m-1) z^{-m-2} zeta^k + k z^{-m-2} zeta^{k-1}
        for key, c in (((m + 1, k), -m - 1), ((m + 1, k - 1), mpq(k))):
            if c and key[1] >= 0:
                term = op.scale(c)
                comps[key] = comps[key] + term if key in comps else term
    lo = None if f.m_lo is None else f.m_lo + 1
    return f._like(comps, weight=f.weight + 1, m_lo=lo)


def partial_zeta(f: LogField) -> LogField:
    comps = {}
    for (m, k), op in f.comps.items():
        if k:
            comps[(m, k - 1)] = op.scale(mpq(k))
    return f._like(comps)


def D_zeta(f: LogField) -> LogField:
    """(z d/dz + d/dzeta) f."""
    comps = {}
    for (m, k), op in f.comps.items():
        for key, c in (((m, k), -m - 1), ((m, k - 1), mpq(k))):
            if c and key[1] >= 0:
                term = op.scale(c)
                comps[key] = comps[key] + term if key in comps else term
    return f._like(comps)


def shift_z(f: LogField, p) -> LogField:
    """Multiply by z^p."""
    p = mpq(p)
    lo = None if f.m_lo is None else f.m_lo - p
    return f._like({(m - p, k): op for (m, k), op in f.comps.items()},
                   weight=f.weight - p, cosets=[c - p for c in f.cosets], m_lo=lo)


# ----------------------------------------------------------------------- products


@lru_cache(maxsize=None)
def _dz_power(p: mpq, k: int, r: int) -> tuple[tuple[int, mpq], ...]:
    """D^(r) (z^p zeta^k) = z^(p-r) * sum c_j zeta^j, returned as ((j, c_j), ...)."""
    cur = {k: mpq(1)}
    for t in range(r):
        q = p - t
        nxt: dict = {}
        for j, c in cur.items():
            if q:
                nxt[j] = nxt.get(j, 0) + c * q
            if j:
                nxt[j - 1] = nxt.get(j - 1, 0) + c * j
        cur = {j: c for j, c in nxt.items() if c}
    f = factorial(r)
    return tuple(sorted((j, c / f) for j, c in cur.items()))


def _pair_coefficient(f: LogField, g: LogField, p1, k1, p2, k2, N: int, form: str) -> SparseOperator:
    """Coefficient of z1^p1 zeta1^k1 z2^p2 zeta2^k2 in z12^N f(z1) g(z2) (form 'A')
    or z12^N g(z2) f(z1) (form 'B')."""
    out = None
    for s in range(N + 1):
        c = binom_rational(N, s) * (-1) ** s
        m1 = N - s - p1 - 1
        m2 = s - p2 - 1
        A, B = f.component(m1, k1), g.component(m2, k2)
        term = (A @ B) if form == "A" else (B @ A)
        term = term.scale(c)
        out = term if out is None else out + term
    return out


def nth_product(f: LogField, g: LogField, n: int, N: int, *, components: Iterable | None = None,
                zetas: Iterable[int] | None = None, check: bool = True) -> LogField:
    """f_(n) g via D_{z1}^(N-1-n) (z12^N f(z1) g(z2)) at z1 = z2.

    ``components`` restricts the output exponents M (coefficient of z^(-M-1)),
    ``zetas`` the output zeta-degrees.  With ``check`` both orderings of the
    product are computed wherever exact and must agree.
    """
    module = f.module
    D = module.spec.cutoff
    w_out = f.weight + g.weight - n
    cosets = {frac_part(a + b) for a in f.cosets for b in g.cosets}
    if n >= N:
        return LogField(module, {}, w_out, cosets, w_out - D)
    r = N - 1 - n
    if components is None:
        targets = []
        for c in sorted(cosets):
            targets += _rng(w_out - D, w_out + D, c)
    else:
        targets = sorted({mpq(M) for M in components if frac_part(M) in cosets})
    zetas = None if zetas is None else set(zetas)
    lo1, lo2 = -D - 1 - f.weight, -D - 1 - g.weight
    kf = sorted({k for _, k in f.comps}) or [0]
    kg = sorted({k for _, k in g.comps}) or [0]
    comps: dict = {}
    for M in targets:
        P = -M - 1
        total = P + r
        for cf in sorted(f.cosets):
            # p1 = -m1 - 1 + integer
            for p1 in _rng(lo1, total - lo2, frac_part(-cf - 1)):
                p2 = total - p1
                if frac_part(-p2 - 1) not in g.cosets:
                    continue
                form = "A" if p2 <= p1 else "B"
                for k1 in kf:
                    dz = _dz_power(p1, k1, r)
                    if zetas is not None and not any(j + k2 in zetas for j, _ in dz for k2 in kg):
                        continue
                    for k2 in kg:
                        if zetas is not None and not any(j + k2 in zetas for j, _ in dz):
                            continue
                        F = _pair_coefficient(f, g, p1, k1, p2, k2, N, form)
                        if check:
                            other = _pair_coefficient(f, g, p1, k1, p2, k2, N, "B" if form == "A" else "A")
                            diff = F.first_difference(other)
                            if diff is not None:
                                raise LocalityError(
                                    f"orderings differ at p1={p1}, k1={k1}, p2={p2}, k2={k2}, N={N}: {diff}")
                        for j, c in dz:
                            K = j + k2
                            if zetas is not None and K not in zetas:
                                continue
                            term = F.scale(c)
                            key = (M, K)
                            comps[key] = comps[key] + term if key in comps else term
    for M in targets:
        for K in (zetas if zetas is not None else [0]):
            comps.setdefault((M, K), SparseOperator.zero(module.dim, w_out - M))
    return LogField(module, comps, w_out, cosets, w_out - D)


def normally_ordered(f: LogField, g: LogField, *, components: Iterable | None = None) -> LogField:
    """:f(z) g(z): = f(z)_+ g(z) + g(z) f(z)_-."""
    module = f.module
    D = module.spec.cutoff
    w_out = f.weight + g.weight + 1
    cosets = {frac_part(a + b) for a in f.cosets for b in g.cosets}
    if components is None:
        targets = []
        for c in sorted(cosets):
            targets += _rng(w_out - D, w_out + D, c)
    else:
        targets = sorted({mpq(M) for M in components})
    kf = sorted({k for _, k in f.comps}) or [0]
    kg = sorted({k for _, k in g.comps}) or [0]
    comps: dict = {}
    for M in targets:
        for cf in sorted(f.cosets):
            # m2 = M - 1 - m1 must satisfy m2 <= w_g + D
            for m1 in _rng(M - 1 - g.weight - D, f.weight + D, cf):
                m2 = M - 1 - m1
                for k1 in kf:
                    A = f.component(m1, k1)
                    for k2 in kg:
                        B = g.component(m2, k2)
                        term = (A @ B) if m1 <= -1 else (B @ A)
                        key = (M, k1 + k2)
                        comps[key] = comps[key] + term if key in comps else term
        comps.setdefault((M, 0), SparseOperator.zero(module.dim, w_out - M))
    return LogField(module, comps, w_out, cosets, w_out - D)


# ----------------------------------------------------------------------- checks


def _pairs_window(f: LogField, g: LogField, N: int, extra: int = 0):
    D = f.cutoff
    lo1, lo2 = -D - 1 - f.weight, -D - 1 - g.weight
    for cf in sorted(f.cosets):
        for cg in sorted(g.cosets):
            for p1 in _rng(lo1, lo1 + 2 * D + N + 2 + extra, frac_part(-cf - 1)):
                for p2 in _rng(lo2, lo2 + 2 * D + N + 2 + extra, frac_part(-cg - 1)):
                    yield p1, p2


def check_locality(f: LogField, g: LogField, N: int, vectors: Iterable[int] | None = None) -> CheckResult:
    """Compare z12^N f(z1) g(z2) with z12^N g(z2) f(z1) coefficientwise on exact columns."""
    res = CheckResult("locality")
    vec = None if vectors is None else frozenset(vectors)
    kf = sorted({k for _, k in f.comps}) or [0]
    kg = sorted({k for _, k in g.comps}) or [0]
    for p1, p2 in _pairs_window(f, g, N):
        for k1 in kf:
            for k2 in kg:
                A = _pair_coefficient(f, g, p1, k1, p2, k2, N, "A")
                B = _pair_coefficient(f, g, p1, k1, p2, k2, N, "B")
                res.compare(A, B, dict(p1=str(p1), k1=k1, p2=str(p2), k2=k2, N=N), vec)
    if not res.checked:
        raise WindowError("no exact coefficients available for the locality check")
    return res


class BorcherdsEngine:
    """Both sides of the twisted Borcherds identity for generators a, b of h."""

    def __init__(self, module: FockModule, check_locality: bool = False):
        self.module = module
        self.tp = module.tp
        self.check = check_locality
        self._fields: dict = {}
        self._composite: dict = {}

    def basis_field(self, g: int) -> LogField:
        if g not in self._fields:
            self._fields[g] = field_of(self.module, self.tp.basis_vector(g))
        return self._fields[g]

    def composite_mode(self, g: int, h: int, q: int, M) -> SparseOperator:
        """Mode ((v_g)_(q) v_h)_(M+N) for q < 0, as the zeta^0 coefficient of Y(v_g)_(q) Y(v_h)."""
        M = mpq(M)
        key = (g, h, q, M)
        if key not in self._composite:
            fld = nth_product(self.basis_field(g), self.basis_field(h), q, 2,
                              components=[M], zetas=[0], check=self.check)
            self._composite[key] = fld.component(M, 0)
        return self._composite[key]

    def lhs(self, a: Sequence, b: Sequence, m, k, n: int) -> SparseOperator:
        mod, D = self.module, self.module.spec.cutoff
        m, k = mpq(m), mpq(k)
        out = SparseOperator.zero(mod.dim, -(m + k + n))
        i = 0
        while k + i <= D and (n < 0 or i <= n):
            c = binom_rational(n, i) * (-1) ** i
            if c:
                out = out + (mod.mode_vec(a, m + n - i) @ mod.mode_vec(b, k + i)).scale(c)
            i += 1
        i = 0
        sign = (-1) ** (n % 2)
        while m + i <= D and (n < 0 or i <= n):
            c = binom_rational(n, i) * (-1) ** i * sign
            if c:
                out = out - (mod.mode_vec(b, k + n - i) @ mod.mode_vec(a, m + i)).scale(c)
            i += 1
        return out

    def rhs(self, a: Sequence, b: Sequence, m, k, n: int) -> SparseOperator:
        mod, tp = self.module, self.tp
        m, k = mpq(m), mpq(k)
        out = SparseOperator.zero(mod.dim, -(m + k + n))
        for j in range(0, 2 - n):
            q = n + j
            aj = la.matvec(operator_binom(tp, m, j), a)
            M = m + k - j
            if q == 1:
                if M == -1:
                    out = out + SparseOperator.identity(mod.dim, tp.space.form(aj, b))
            elif q < 0:
                for g, x in enumerate(aj):
                    if not x:
                        continue
                    for h, y in enumerate(b):
                        if y:
                            out = out + self.composite_mode(g, h, q, M).scale(x * y)
            # q == 0: [a, b] = 0 in h
        return out

    def residual(self, a: Sequence, b: Sequence, m, k, n: int) -> SparseOperator:
        L, R = self.lhs(a, b, m, k, n), self.rhs(a, b, m, k, n)
        return L - R


def borcherds_check(engine: BorcherdsEngine, a: Sequence, b: Sequence, m, k, n: int, v: int) -> dict:
    """Residual LHS - RHS applied to basis vector v (raises if v is outside the exact window)."""
    res = engine.residual(a, b, m, k, n)
    return res.apply({v: mpq(1)})


def phi_equivariance_check(module: FockModule, a: Sequence, *, field_fn=None, M: int | None = None) -> CheckResult:
    """Y(phi a, z) against the monodromy action on Y(a, z), as tau-polynomials."""
    field_fn = field_fn or field_of
    tp = module.tp
    M = M or module.spec.M
    tau = Scalar.tau(M)
    a = tuple(mpq(x) for x in a)
    # phi a = sigma e^{-tau N} a
    coeff = [Scalar.rational(M, 0)] * tp.dim
    vk, k = a, 0
    while any(vk):
        c = (-tau) ** k * mpq(1, factorial(k))
        for l, x in enumerate(vk):
            if x:
                coeff[l] = coeff[l] + c * x
        vk = tp.apply_N(vk)
        k += 1
    coeff = [c * tp.sigma_eigenvalue(l, M) for l, c in enumerate(coeff)]
    lhs = None
    for l, c in enumerate(coeff):
        if c:
            term = field_fn(module, tp.basis_vector(l)).scale(c)
            lhs = term if lhs is None else lhs + term
    f = field_fn(module, a)
    comps = {}
    for (m, kk), _ in f.comps.items():
        total = None
        for (m2, k2), op in f.comps.items():
            if m2 != m or k2 < kk:
                continue
            t = op.scale(tau ** (k2 - kk) * binom_rational(k2, kk))
            total = t if total is None else total + t
        comps[(m, kk)] = total.scale(root_of_unity(-m - 1, M))
    rhs = f._like(comps)
    return lhs.compare(rhs, CheckResult("equivariance"), dict(a=[str(x) for x in a]))


def translation_check(module: FockModule, a: Sequence | None = None, *, f: LogField | None = None) -> CheckResult:
    """a_(-2) 1 as a field against D_z Y(a, z)."""
    f = f if f is not None else field_of(module, a)
    lhs = nth_product(f, identity_field(module), -2, 0)
    return lhs.compare(D_z(f), CheckResult("translation"))


def propagator_check(module: FockModule, a: Sequence, b: Sequence, check: bool = True) -> CheckResult:
    """:Y(a)Y(b): against Y(a_(-1) b) + z^-2 (binom(S + N, 2) a | b) for generators a, b."""
    tp = module.tp
    fa, fb = field_of(module, a), field_of(module, b)
    direct = normally_ordered(fa, fb)
    prod = nth_product(fa, fb, -1, 2, check=check)
    S_N = la.matadd(tp.S(), tp.N)
    # binom(S + N, 2) = (S + N)(S + N - 1)/2
    B2 = la.matscale(mpq(1, 2), la.matmul(S_N, la.matsub(S_N, la.identity(tp.dim))))
    c = tp.space.form(la.matvec(B2, a), b)
    expected = prod + shift_z(identity_field(module), -2).scale(c) if c else prod
    return direct.compare(expected, CheckResult("normal_order"))

