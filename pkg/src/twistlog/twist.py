"""Twist data (h, form, sigma, N) for twisted Heisenberg blocks.

Vectors in h are tuples of rationals in the basis v_1..v_d.  Matrices use the
column convention: ``N[r][c]`` is the coefficient of v_r in N v_c.

sigma is never stored as a matrix.  Each basis vector carries the
representative ``alpha[i]`` in (-1, 0] of its mode coset, and
sigma v_i = exp(-2 pi i alpha[i]) v_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from . import linalg as la
from .scalars import Scalar, ZetaPoly, as_q, factorial, frac_part, root_of_unity

__all__ = [
    "QuadraticSpace",
    "BlockDecl",
    "TwistPair",
    "TwistError",
    "build_even_block",
    "build_odd_block",
    "direct_sum",
    "exp_zeta_N",
    "operator_binom",
    "log_unipotent",
    "exp_nilpotent",
    "check_canonical_blocks",
    "coset_rep",
]


class TwistError(ValueError):
    pass


def coset_rep(x) -> mpq:
    """Representative of x + Z in (-1, 0]."""
    f = frac_part(x)
    return f - 1 if f else mpq(0)


@dataclass(frozen=True)
class QuadraticSpace:
    gram: la.Matrix
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        g = tuple(tuple(mpq(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"v{i + 1}" for i in range(len(g))))
        if any(len(r) != len(g) for r in g):
            raise TwistError("Gram matrix must be square")
        if g != la.transpose(g):
            raise TwistError("Gram matrix must be symmetric")
        if g:
            try:
                la.inverse(g)
            except ZeroDivisionError:
                raise TwistError("Gram matrix must be nonsingular") from None

    @property
    def dim(self) -> int:
        return len(self.gram)

    def form(self, a: Sequence, b: Sequence) -> mpq:
        return sum((x * self.gram[i][j] * y for i, x in enumerate(a) if x
                    for j, y in enumerate(b) if y), mpq(0))

    def dual_basis(self) -> la.Matrix:
        """Row i holds the coordinates of v^i, with (v^i | v_j) = delta_ij."""
        return la.transpose(la.inverse(self.gram))


@dataclass(frozen=True)
class BlockDecl:
    kind: str  # "even", "odd" or "general"
    ell: int
    alpha0: mpq
    offset: int
    dim: int


@dataclass(frozen=True)
class TwistPair:
    space: QuadraticSpace
    alpha: tuple[mpq, ...]
    N: la.Matrix
    blocks: tuple[BlockDecl, ...] = field(default=())
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        d = self.space.dim
        object.__setattr__(self, "alpha", tuple(as_q(a) for a in self.alpha))
        object.__setattr__(self, "N", tuple(tuple(mpq(x) for x in r) for r in self.N))
        if len(self.alpha) != d or len(self.N) != d or any(len(r) != d for r in self.N):
            raise TwistError("dimension mismatch")
        for a in self.alpha:
            if not (-1 < a <= 0):
                raise TwistError(f"coset representative {a} outside (-1, 0]")
        if not self.blocks:
            object.__setattr__(self, "blocks", (BlockDecl("general", 0, mpq(0), 0, d),))
        problems = self.invariant_violations() if self.strict else []
        if problems:
            raise TwistError("; ".join(problems))

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def gram(self) -> la.Matrix:
        return self.space.gram

    def S(self) -> la.Matrix:
        d = self.dim
        return tuple(tuple(self.alpha[i] if i == j else mpq(0) for j in range(d)) for i in range(d))

    def apply_N(self, a: Sequence) -> tuple:
        return la.matvec(self.N, a)

    def sigma_eigenvalue(self, i: int, M: int) -> Scalar:
        return root_of_unity(-self.alpha[i], M)

    def nilpotency_index(self) -> int:
        """Smallest k with N^k = 0."""
        p = la.identity(self.dim)
        for k in range(self.dim + 1):
            if la.is_zero(p):
                return k
            p = la.matmul(p, self.N)
        return self.dim + 1

    def basis_vector(self, i: int) -> tuple:
        return tuple(mpq(1) if j == i else mpq(0) for j in range(self.dim))

    def invariant_violations(self) -> list[str]:
        d, G, N = self.dim, self.gram, self.N
        out = []
        if not la.is_zero(la.matpow(N, d)):
            out.append("N is not nilpotent")
        for r in range(d):
            for c in range(d):
                if N[r][c] and self.alpha[r] != self.alpha[c]:
                    out.append(f"N does not preserve the eigenspace of v{c + 1}")
                if G[r][c] and frac_part(self.alpha[r] + self.alpha[c]):
                    out.append(f"form pairs v{r + 1}, v{c + 1} across non-dual eigenspaces")
        # (Na|b) + (a|Nb) = 0
        NtG = la.matmul(la.transpose(N), G)
        if not la.is_zero(la.matadd(NtG, la.transpose(NtG))):
            out.append("N is not skew for the form")
        return out


def _even_data(ell: int, alpha0) -> tuple[la.Matrix, tuple, la.Matrix]:
    d = 2 * ell
    G = [[mpq(1) if i + j == 2 * ell + 1 else mpq(0) for j in range(1, d + 1)] for i in range(1, d + 1)]
    N = [[mpq(0)] * d for _ in range(d)]
    for i in range(1, ell):
        N[i][i - 1] = mpq(1)  # N v_i = v_{i+1}
        N[ell + i][ell + i - 1] = mpq(-1)  # N v_{l+i} = -v_{l+i+1}
    dual = -alpha0 - 1 if alpha0 else mpq(0)
    alpha = (alpha0,) * ell + (dual,) * ell
    return tuple(map(tuple, G)), alpha, tuple(map(tuple, N))


def build_even_block(ell: int, alpha0) -> TwistPair:
    alpha0 = as_q(alpha0)
    if ell < 1:
        raise TwistError("ell must be positive")
    if not (-1 < alpha0 <= 0):
        raise TwistError(f"alpha0 = {alpha0} outside (-1, 0]")
    G, alpha, N = _even_data(ell, alpha0)
    return TwistPair(QuadraticSpace(G), alpha, N, (BlockDecl("even", ell, alpha0, 0, 2 * ell),))


def _odd_data(ell: int, alpha0) -> tuple[la.Matrix, tuple, la.Matrix]:
    d = 2 * ell - 1
    G = [[mpq(1) if i + j == 2 * ell else mpq(0) for j in range(1, d + 1)] for i in range(1, d + 1)]
    N = [[mpq(0)] * d for _ in range(d)]
    for i in range(1, d):
        N[i][i - 1] = mpq((-1) ** (i + 1))
    return tuple(map(tuple, G)), (alpha0,) * d, tuple(map(tuple, N))


def build_odd_block(ell: int, alpha0) -> TwistPair:
    alpha0 = as_q(alpha0)
    if ell < 1:
        raise TwistError("ell must be positive")
    if alpha0 not in (0, mpq(-1, 2)):
        raise TwistError(f"odd blocks need alpha0 in {{0, -1/2}}, got {alpha0}")
    G, alpha, N = _odd_data(ell, alpha0)
    return TwistPair(QuadraticSpace(G), alpha, N, (BlockDecl("odd", ell, alpha0, 0, 2 * ell - 1),))


def _block_diag(mats: Sequence[la.Matrix]) -> la.Matrix:
    d = sum(len(m) for m in mats)
    out = [[mpq(0)] * d for _ in range(d)]
    o = 0
    for m in mats:
        for i, row in enumerate(m):
            for j, x in enumerate(row):
                out[o + i][o + j] = x
        o += len(m)
    return tuple(map(tuple, out))


def direct_sum(*pairs: TwistPair) -> TwistPair:
    blocks, labels, alpha, off = [], [], [], 0
    for b, tp in enumerate(pairs):
        for decl in tp.blocks:
            blocks.append(BlockDecl(decl.kind, decl.ell, decl.alpha0, decl.offset + off, decl.dim))
        labels += [f"b{b}.{lab}" for lab in tp.space.labels]
        alpha += tp.alpha
        off += tp.dim
    space = QuadraticSpace(_block_diag([tp.gram for tp in pairs]), tuple(labels))
    return TwistPair(space, tuple(alpha), _block_diag([tp.N for tp in pairs]), tuple(blocks))


def exp_zeta_N(tp: TwistPair, a: Sequence) -> tuple[ZetaPoly, ...]:
    """Coordinates of e^{zeta N} a as polynomials in zeta."""
    terms = []
    v = tuple(mpq(x) for x in a)
    k = 0
    while any(v):
        terms.append(tuple(x / factorial(k) for x in v))
        v = tp.apply_N(v)
        k += 1
    return tuple(ZetaPoly(t[i] for t in terms) for i in range(tp.dim))


def operator_binom(tp: TwistPair, m, j: int) -> la.Matrix:
    """The matrix binom(m + N, j) = prod_{i<j} (m - i + N) / j!."""
    if j < 0:
        raise ValueError("j must be non-negative")
    m = as_q(m)
    d = tp.dim
    out = la.identity(d)
    for i in range(j):
        out = la.matmul(out, la.matadd(la.matscale(m - i, la.identity(d)), tp.N))
    return la.matscale(mpq(1, factorial(j)), out)


def _generic_identity(d: int, like):
    one = like ** 0 if hasattr(like, "M") else mpq(1)
    zero = one - one
    return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))


def _generic_matmul(a, b):
    n = len(b)
    return tuple(
        tuple(sum((row[t] * b[t][c] for t in range(n) if row[t] and b[t][c]), row[0] - row[0])
              for c in range(len(b[0])))
        for row in a
    )


def _first_entry(U):
    return U[0][0] if U and U[0] else mpq(0)


def log_unipotent(U: la.Matrix) -> la.Matrix:
    """Logarithm of a unipotent matrix via the terminating Mercator series."""
    d = len(U)
    one = _generic_identity(d, _first_entry(U))
    X = tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(U, one))
    power = X
    out = X
    for k in range(2, d + 2):
        power = _generic_matmul(power, X)
        if not any(x for r in power for x in r):
            return out
        c = mpq((-1) ** (k + 1), k)
        out = tuple(tuple(o + c * p for o, p in zip(r, s)) for r, s in zip(out, power))
    raise TwistError("U - I is not nilpotent")


def exp_nilpotent(X: la.Matrix) -> la.Matrix:
    d = len(X)
    out = _generic_identity(d, _first_entry(X))
    power = out
    for k in range(1, d + 2):
        power = _generic_matmul(power, X)
        if not any(x for r in power for x in r):
            return out
        c = mpq(1, factorial(k))
        out = tuple(tuple(o + c * p for o, p in zip(r, s)) for r, s in zip(out, power))
    raise TwistError("matrix is not nilpotent")


def check_canonical_blocks(tp: TwistPair) -> bool:
    """True iff tp coincides with the direct sum of its declared canonical blocks."""
    rebuilt = []
    for decl in tp.blocks:
        try:
            if decl.kind == "even":
                rebuilt.append(build_even_block(decl.ell, decl.alpha0))
            elif decl.kind == "odd":
                rebuilt.append(build_odd_block(decl.ell, decl.alpha0))
            else:
                return False
        except TwistError:
            return False
    if sorted(d.offset for d in tp.blocks) != [d.offset for d in tp.blocks]:
        return False
    ref = direct_sum(*rebuilt)
    return ref.gram == tp.gram and ref.N == tp.N and ref.alpha == tp.alpha
