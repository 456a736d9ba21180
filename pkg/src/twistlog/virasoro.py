"""Sugawara Virasoro operators on truncated twisted Heisenberg modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq

from .fields import CheckResult, D_z, LogField, field_of
from .fock import FockModule
from .linalg import rank
from .scalars import Scalar, binom_rational, factorial, format_q, root_of_unity
from .sparse import SparseOperator, WindowError

__all__ = [
    "VirasoroFamily",
    "sugawara_mode",
    "l0_mode",
    "virasoro_relation_check",
    "central_charge",
    "l_action_check",
    "jordan_structure",
    "spectrum",
    "exp_l0_conjugation_check",
    "JordanError",
]


class JordanError(ValueError):
    pass


def _ceil(x: mpq) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: mpq) -> int:
    return x.numerator // x.denominator


def _block_sugawara(module: FockModule, b: int, k: int, swap: bool = False) -> SparseOperator:
    blk = module.spec.blocks[b]
    D, al = module.spec.cutoff, blk.alpha0
    out = SparseOperator.zero(module.dim, -k)
    if blk.kind == "even":
        pairs = [(i, 2 * blk.ell + 1 - i) for i in range(1, blk.ell + 1)]
        pref = mpq(1)
    else:
        pairs = [(i, 2 * blk.ell - i) for i in range(1, 2 * blk.ell)]
        pref = mpq(1, 2)
    # e1 = al + n + k, e2 = -al - n; a term vanishes once its larger exponent exceeds D
    for n in range(_ceil(-al - D), _floor(D - al - k) + 1):
        e1, e2 = al + n + k, -al - n
        for i, j in pairs:
            A, B = module.mode(b, i, e1), module.mode(b, j, e2)
            first_A = e1 >= e2
            if swap:
                first_A = not first_A
            term = (B @ A) if first_A else (A @ B)
            out = out + term
    return out.scale(pref)


def sugawara_mode(module: FockModule, k: int, *, swap: bool = False) -> SparseOperator:
    """L_k for k != 0 as a sum of commuting products of modes.

    Each product applies the factor with the larger exponent first; ``swap``
    reverses that choice (the two agree because the factors commute).
    """
    if k == 0:
        raise ValueError("use l0_mode for k = 0")
    out = SparseOperator.zero(module.dim, -k)
    for b in range(len(module.spec.blocks)):
        out = out + _block_sugawara(module, b, k, swap)
    return out


def l0_mode(module: FockModule) -> SparseOperator:
    return module.l0


@dataclass
class VirasoroFamily:
    module: FockModule
    c: mpq = mpq(0)
    modes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = mpq(self.module.tp.dim)

    def L(self, k: int) -> SparseOperator:
        if k not in self.modes:
            self.modes[k] = l0_mode(self.module) if k == 0 else sugawara_mode(self.module, k)
        return self.modes[k]


def virasoro_relation_check(fam: VirasoroFamily, m: int, n: int, c=None) -> CheckResult:
    """[L_m, L_n] - (m - n) L_{m+n} - delta_{m,-n} (m^3 - m) c / 12 on the common window."""
    c = fam.c if c is None else mpq(c)
    res = CheckResult("virasoro")
    A, B = fam.L(m), fam.L(n)
    lhs = A @ B - B @ A
    rhs = fam.L(m + n).scale(m - n)
    if m + n == 0:
        rhs = rhs + SparseOperator.identity(fam.module.dim, mpq(m ** 3 - m) * c / 12)
    res.compare(lhs, rhs, dict(m=m, n=n))
    return res


def central_charge(fam: VirasoroFamily) -> mpq:
    """c from ([L_2, L_-2] - 4 L_0) |0> = (c/2) |0>."""
    L2, Lm2 = fam.L(2), fam.L(-2)
    vac = fam.module.vacuum()
    v = Lm2.apply(vac)
    x = L2.apply(v)
    y = Lm2.apply(L2.apply(vac))
    z = fam.L(0).apply(vac)
    coeff = x.get(0, 0) - y.get(0, 0) - 4 * z.get(0, 0)
    return 2 * coeff


def l_action_check(module: FockModule, a: Sequence, *, weight=1, l0: SparseOperator | None = None,
                   lm1: SparseOperator | None = None) -> tuple[CheckResult, CheckResult]:
    """[L_-1, Y(a)] = D_z Y(a) and [L_0, Y(a)] = (z d/dz + d/dzeta + weight) Y(a), componentwise."""
    f = field_of(module, a)
    l0 = module.l0 if l0 is None else l0
    lm1 = sugawara_mode(module, -1) if lm1 is None else lm1
    r1, r0 = CheckResult("L-1"), CheckResult("L0")
    dz = D_z(f)
    for (m, k), op in sorted(f.comps.items()):
        r1.compare(lm1 @ op - op @ lm1, dz.component(m, k), dict(m=str(m), k=k))
        expected = op.scale(weight - 1 - m) + f.component(m, k + 1).scale(k + 1)
        r0.compare(l0 @ op - op @ l0, expected, dict(m=str(m), k=k))
    return r1, r0


def _level_block(module: FockModule, energy) -> tuple[list[int], mpq, list[dict]]:
    idx = module.level_indices(energy)
    if not idx:
        raise JordanError(f"no basis vectors at energy {format_q(energy)}")
    L0 = module.l0
    missing = [i for i in idx if i not in L0.window]
    if missing:
        raise JordanError(f"L0 is not exact on level {format_q(energy)} (truncation)")
    lam = module.vacuum_weight() + energy
    pos = {i: t for t, i in enumerate(idx)}
    rows = []
    for i in idx:
        col = dict(L0.column(i))
        col[i] = col.get(i, 0) - lam
        col = {r: x for r, x in col.items() if x}
        if any(r not in pos for r in col):
            raise JordanError("L0 does not preserve the energy level")
        rows.append({pos[r]: x for r, x in col.items()})
    return idx, lam, rows


def jordan_structure(module: FockModule, energy) -> list[int]:
    """Jordan block sizes of L0 on one energy level (descending)."""
    idx, lam, cols = _level_block(module, energy)
    d = len(idx)

    def apply(vecs):
        out = []
        for v in vecs:
            w: dict = {}
            for t, x in v.items():
                for r, y in cols[t].items():
                    w[r] = w.get(r, 0) + x * y
            out.append({r: x for r, x in w.items() if x})
        return out

    ranks = [d]
    power = [{t: mpq(1)} for t in range(d)]
    while ranks[-1]:
        power = apply(power)
        rk = rank(power)
        if rk == ranks[-1]:
            raise JordanError(f"L0 - {format_q(lam)} is not nilpotent on level {format_q(energy)}")
        ranks.append(rk)
    ranks.append(0)
    # number of blocks of size >= s is ranks[s-1] - ranks[s]
    at_least = [ranks[s - 1] - ranks[s] for s in range(1, len(ranks))]
    sizes = []
    for s in range(len(at_least), 0, -1):
        exact = at_least[s - 1] - (at_least[s] if s < len(at_least) else 0)
        sizes += [s] * exact
    return sizes


def spectrum(module: FockModule, levels: Iterable | None = None) -> dict:
    """Generalized eigenvalues and Jordan partitions of L0 per energy level."""
    levels = module.distinct_energies() if levels is None else [mpq(x) for x in levels]
    h = module.vacuum_weight()
    out = {"vacuum_weight": format_q(h), "levels": []}
    for e in levels:
        if e > module.spec.cutoff:
            raise JordanError(f"level {format_q(e)} beyond cutoff")
        out["levels"].append({
            "energy": format_q(e),
            "eigenvalue": format_q(h + e),
            "dimension": len(module.level_indices(e)),
            "partition": jordan_structure(module, e),
        })
    return out


def _nilpotent_part(module: FockModule) -> SparseOperator:
    L0 = module.l0
    h = module.vacuum_weight()
    diag = SparseOperator(module.dim, 0, {i: {i: h + e} for i, e in enumerate(module.energies) if h + e})
    return L0 - diag


def _exp_tau(NL: SparseOperator, M: int, sign: int) -> SparseOperator:
    """exp(sign * tau * NL) as an operator with Scalar entries."""
    dim = NL.dim
    tau = Scalar.tau(M) * sign
    out = SparseOperator.identity(dim, Scalar.rational(M, 1))
    power = SparseOperator.identity(dim)
    for k in range(1, dim + 2):
        power = NL @ power
        if not power.cols:
            return out
        out = out + power.scale(tau ** k * mpq(1, factorial(k)))
    raise JordanError("nilpotent part of L0 is not nilpotent on the truncation")


def exp_l0_conjugation_check(module: FockModule, a: Sequence, *, weight=1) -> CheckResult:
    """e^{tau L0} Y(a) e^{-tau L0} against e^{tau (D_zeta + weight)} Y(a), tau = 2 pi i.

    Each component has a definite energy shift, so the semisimple part of L0
    contributes only root_of_unity(shift); the unipotent part is a tau-polynomial.
    """
    M = module.spec.M
    NL = _nilpotent_part(module)
    if not NL.window:
        raise WindowError("L0 has no exact columns")
    Ep, Em = _exp_tau(NL, M, 1), _exp_tau(NL, M, -1)
    tau = Scalar.tau(M)
    f = field_of(module, a)
    res = CheckResult("exp_l0")
    for (m, k), op in sorted(f.comps.items()):
        lhs = (Ep @ op @ Em).scale(root_of_unity(op.shift, M))
        rhs = None
        for (m2, k2), op2 in f.comps.items():
            if m2 == m and k2 >= k:
                t = op2.scale(tau ** (k2 - k) * binom_rational(k2, k))
                rhs = t if rhs is None else rhs + t
        rhs = rhs.scale(root_of_unity(-m - 1 + mpq(weight), M))
        res.compare(lhs, rhs, dict(m=str(m), k=k))
    return res
