"""Exact scalars: rationals, cyclotomic numbers and the formal symbol tau.

A :class:`Scalar` is a polynomial in ``tau`` (which stands for ``2*pi*i`` and is
never evaluated) whose coefficients live in the cyclotomic field Q(omega_M),
stored as residues modulo the M-th cyclotomic polynomial.  Rationals are
:class:`gmpy2.mpq` throughout; there is no floating point in this package.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence, Union

from gmpy2 import gcd, mpq

Q = mpq
MPQ = type(mpq(0))
Rational = Union[int, mpq]

__all__ = [
    "Q",
    "as_q",
    "format_q",
    "binom_rational",
    "factorial",
    "frac_part",
    "cyclotomic_polynomial",
    "Scalar",
    "ConductorError",
    "root_of_unity",
    "ZetaPoly",
    "shift_zeta",
]


class ConductorError(ValueError):
    """A root of unity or scalar does not fit the session conductor."""


def as_q(x) -> mpq:
    """Coerce ints, mpq, Fractions and ``"p/q"`` strings to mpq."""
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty rational")
        if "/" in s:
            num, den = s.split("/", 1)
            if int(den) == 0:
                raise ZeroDivisionError(f"zero denominator in {x!r}")
            return mpq(int(num), int(den))
        return mpq(int(s))
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return mpq(x)


def format_q(x) -> str:
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def frac_part(x) -> mpq:
    """x mod 1, in [0, 1)."""
    x = mpq(x)
    return x - (x.numerator // x.denominator)


def factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def binom_rational(m, j: int) -> mpq:
    """Generalized binomial coefficient m(m-1)...(m-j+1)/j! for rational m."""
    if j < 0:
        raise ValueError("j must be non-negative")
    m = mpq(m)
    num = mpq(1)
    for i in range(j):
        num *= m - i
    return num / factorial(j)


# --------------------------------------------------------------------------
# integer / rational polynomial helpers (coefficient lists, low degree first)


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod_int(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    # den monic
    num = list(num)
    out = [0] * max(len(num) - len(den) + 1, 0)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    return out, _trim(num[: len(den) - 1])


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n (low degree first)."""
    if n < 1:
        raise ValueError("n must be positive")
    p = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            p, rem = _poly_divmod_int(p, list(cyclotomic_polynomial(d)))
            assert not rem
    return tuple(p)


@lru_cache(maxsize=None)
def _power_table(M: int) -> tuple[tuple[mpq, ...], ...]:
    """Residues of x^e mod Phi_M for 0 <= e < 2*phi(M)."""
    phi = cyclotomic_polynomial(M)
    deg = len(phi) - 1
    rows = []
    cur = [mpq(0)] * deg
    cur[0] = mpq(1)
    for _ in range(2 * max(deg, 1) + M):
        rows.append(tuple(cur))
        # multiply by x
        top = cur[-1]
        cur = [mpq(0)] + cur[:-1]
        if top:
            for i in range(deg):
                cur[i] -= top * phi[i]
    return tuple(rows)


def _cyc_zero(M: int) -> tuple[mpq, ...]:
    return (mpq(0),) * (len(cyclotomic_polynomial(M)) - 1)


def _cyc_mul(M: int, a: Sequence[mpq], b: Sequence[mpq]) -> tuple[mpq, ...]:
    deg = len(a)
    prod = [mpq(0)] * (2 * deg)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    prod[i + j] += x * y
    table = _power_table(M)
    out = list(prod[:deg])
    for e in range(deg, 2 * deg):
        c = prod[e]
        if c:
            row = table[e]
            for i in range(deg):
                out[i] += c * row[i]
    return tuple(out)


def _qpoly_divmod(num: list, den: list) -> tuple[list, list]:
    num = [mpq(c) for c in num]
    den = _trim([mpq(c) for c in den])
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    out = [mpq(0)] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1] / lead
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    return _trim(out), _trim(num[: len(den) - 1])


def _qpoly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _qpoly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def _cyc_inverse(M: int, a: Sequence[mpq]) -> tuple[mpq, ...]:
    # extended Euclid: s*a + t*Phi = 1
    r0, r1 = [mpq(c) for c in cyclotomic_polynomial(M)], _trim(list(a))
    if not r1:
        raise ZeroDivisionError("inverse of zero")
    s0, s1 = [], [mpq(1)]
    while r1:
        quo, rem = _qpoly_divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, _qpoly_sub(s0, _qpoly_mul(quo, s1))
    # r0 is a nonzero constant since Phi_M is irreducible
    assert len(r0) == 1
    inv = [c / r0[0] for c in s0]
    _, inv = _qpoly_divmod(inv, [mpq(c) for c in cyclotomic_polynomial(M)])
    out = list(_cyc_zero(M))
    for i, c in enumerate(inv):
        out[i] = c
    return tuple(out)


# --------------------------------------------------------------------------


class Scalar:
    """Element of Q(omega_M)[tau].

    ``coeffs[t]`` is the cyclotomic coefficient of ``tau**t``, a tuple of
    phi(M) rationals in the power basis 1, omega, omega^2, ...
    """

    __slots__ = ("M", "coeffs", "_hash")

    def __init__(self, M: int, coeffs: Iterable[Sequence]):
        if M < 1 or M % 4:
            raise ConductorError(f"conductor must be a positive multiple of 4, got {M}")
        deg = len(cyclotomic_polynomial(M)) - 1
        cs = []
        for c in coeffs:
            c = tuple(mpq(x) for x in c)
            if len(c) != deg:
                raise ValueError(f"cyclotomic coefficient needs {deg} entries, got {len(c)}")
            cs.append(c)
        while cs and not any(cs[-1]):
            cs.pop()
        self.M = M
        self.coeffs = tuple(cs)
        self._hash = None

    # constructors
    @classmethod
    def rational(cls, M: int, q) -> Scalar:
        z = list(_cyc_zero(M))
        z[0] = as_q(q)
        return cls(M, [z])

    @classmethod
    def tau(cls, M: int) -> Scalar:
        one = list(_cyc_zero(M))
        one[0] = mpq(1)
        return cls(M, [_cyc_zero(M), one])

    @classmethod
    def omega(cls, M: int, e: int = 1) -> Scalar:
        return cls(M, [_power_table(M)[e % M]])

    # coercion
    def _coerce(self, other) -> Scalar | None:
        if isinstance(other, Scalar):
            if other.M != self.M:
                raise ConductorError(f"mixing conductors {self.M} and {other.M}")
            return other
        if isinstance(other, (int, MPQ)) and not isinstance(other, bool):
            return Scalar.rational(self.M, other)
        return None

    # structure
    @property
    def tau_degree(self) -> int:
        return len(self.coeffs) - 1

    def is_rational(self) -> bool:
        return len(self.coeffs) == 0 or (len(self.coeffs) == 1 and not any(self.coeffs[0][1:]))

    def to_rational(self) -> mpq:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0][0] if self.coeffs else mpq(0)

    def tau_coefficient(self, t: int) -> Scalar:
        if t < len(self.coeffs):
            return Scalar(self.M, [self.coeffs[t]])
        return Scalar(self.M, [])

    # arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        z = _cyc_zero(self.M)
        out = []
        for t in range(n):
            a = self.coeffs[t] if t < len(self.coeffs) else z
            b = o.coeffs[t] if t < len(o.coeffs) else z
            out.append(tuple(x + y for x, y in zip(a, b)))
        return Scalar(self.M, out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.M, [tuple(-x for x in c) for c in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return Scalar(self.M, [])
        z = _cyc_zero(self.M)
        out = [z] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not any(a):
                continue
            for j, b in enumerate(o.coeffs):
                if not any(b):
                    continue
                p = _cyc_mul(self.M, a, b)
                out[i + j] = tuple(x + y for x, y in zip(out[i + j], p))
        return Scalar(self.M, out)

    __rmul__ = __mul__

    def inverse(self) -> Scalar:
        if not self.coeffs:
            raise ZeroDivisionError("inverse of zero scalar")
        if len(self.coeffs) > 1:
            raise ZeroDivisionError("tau is transcendental: only tau-free scalars are invertible")
        return Scalar(self.M, [_cyc_inverse(self.M, self.coeffs[0])])

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Scalar.rational(self.M, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison
    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        try:
            o = self._coerce(other)
        except ConductorError:
            return False
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.to_rational()) if self.is_rational() else hash((self.M, self.coeffs))
        return self._hash

    def __repr__(self) -> str:
        return f"Scalar({self.M}, {self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for t, c in enumerate(self.coeffs):
            for e, x in enumerate(c):
                if not x:
                    continue
                mono = "*".join(
                    s for s in (
                        f"w^{e}" if e > 1 else ("w" if e == 1 else ""),
                        f"tau^{t}" if t > 1 else ("tau" if t == 1 else ""),
                    ) if s
                )
                parts.append(format_q(x) + ("*" + mono if mono else ""))
        return " + ".join(parts)


def root_of_unity(m, M: int) -> Scalar:
    """exp(2*pi*i*m) as a power of omega_M; m must have denominator dividing M."""
    m = as_q(m)
    if M % m.denominator:
        raise ConductorError(f"denominator of {format_q(m)} does not divide conductor {M}")
    e = int((m * M).numerator) % M
    return Scalar.omega(M, e)


def default_conductor(denominators: Iterable[int]) -> int:
    M = 4
    for d in denominators:
        M = int(M * d // gcd(M, d))
    return M


# --------------------------------------------------------------------------


class ZetaPoly:
    """Univariate polynomial in the log variable zeta with exact coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = list(coeffs)
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __getitem__(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __add__(self, other):
        if not isinstance(other, ZetaPoly):
            other = ZetaPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return ZetaPoly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return ZetaPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, ZetaPoly):
            other = ZetaPoly([other])
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, ZetaPoly):
            return ZetaPoly(c * other for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return ZetaPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return ZetaPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZetaPoly):
            other = ZetaPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self[k] == other[k] for k in range(n))

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, value):
        out = 0
        for c in reversed(self.coeffs):
            out = out * value + c
        return out

    def __repr__(self) -> str:
        return f"ZetaPoly({[str(c) for c in self.coeffs]})"


def shift_zeta(p: ZetaPoly, amount) -> ZetaPoly:
    """Substitute zeta -> zeta + amount and re-expand."""
    out = [0] * len(p.coeffs)
    for k, c in enumerate(p.coeffs):
        if c:
            # (zeta + amount)^k = sum_j binom(k, j) amount^(k-j) zeta^j
            apow = 1
            for j in range(k, -1, -1):
                out[j] = out[j] + c * binom_rational(k, j) * apow
                apow = apow * amount
    return ZetaPoly(out)
