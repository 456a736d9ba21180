"""Truncated twisted Heisenberg Verma modules realised as polynomial spaces.

Each block contributes creation variables ``x[j, n]`` (block-local index j,
level n); a basis vector is a monomial in these variables.  Modes v_j t^m act as
multiplication, differentiation or a scalar according to the block's case table.
The energy of a variable is minus the t-exponent of the mode that creates it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from gmpy2 import mpq

from .loop import CosetError
from .scalars import as_q, default_conductor, format_q, frac_part
from .sparse import SparseOperator
from .twist import TwistPair, build_even_block, build_odd_block, direct_sum

__all__ = [
    "BlockSpec",
    "ModuleSpec",
    "FockModule",
    "build_basis",
    "mode_action",
    "l0_closed_form",
    "SpecError",
]

HALF = mpq(1, 2)


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class BlockSpec:
    kind: str
    ell: int
    alpha0: mpq
    a1: mpq = mpq(0)
    a2: mpq = mpq(0)
    a: mpq = mpq(0)

    def __post_init__(self):
        object.__setattr__(self, "alpha0", as_q(self.alpha0))
        for name in ("a1", "a2", "a"):
            object.__setattr__(self, name, as_q(getattr(self, name)))
        if self.kind not in ("even", "odd"):
            raise SpecError(f"unknown block kind {self.kind!r}")
        if self.ell < 1:
            raise SpecError("ell must be positive")
        if self.kind == "even" and not (-1 < self.alpha0 <= 0):
            raise SpecError(f"even block needs -1 < alpha0 <= 0, got {format_q(self.alpha0)}")
        if self.kind == "odd" and self.alpha0 not in (0, -HALF):
            raise SpecError(f"odd block needs alpha0 in {{0, -1/2}}, got {format_q(self.alpha0)}")
        degenerate = self.alpha0 == 0
        if (self.a1 or self.a2) and not (degenerate and self.kind == "even"):
            raise SpecError("a1, a2 only apply to even blocks with alpha0 = 0")
        if self.a and not (degenerate and self.kind == "odd"):
            raise SpecError("a only applies to odd blocks with alpha0 = 0")

    @property
    def dim(self) -> int:
        return 2 * self.ell if self.kind == "even" else 2 * self.ell - 1

    def twist_pair(self) -> TwistPair:
        if self.kind == "even":
            return build_even_block(self.ell, self.alpha0)
        return build_odd_block(self.ell, self.alpha0)

    # -------------------------------------------------------------- variables
    def variable_energy(self, j: int, n: int):
        """Energy of x[j, n], or None if the case table has no such variable."""
        ell, al = self.ell, self.alpha0
        if not (1 <= j <= self.dim) or n < 0:
            return None
        if al == 0:
            if n >= 1:
                return mpq(n)
            return mpq(0) if j <= ell - 1 else None
        if self.kind == "odd":
            return n + HALF
        if j <= ell:
            return n - al
        return n + al if n >= 1 else None

    def variables(self, cutoff) -> list[tuple[int, int, mpq]]:
        out = []
        for j in range(1, self.dim + 1):
            n = 0
            while True:
                e = self.variable_energy(j, n)
                if e is not None:
                    if e > cutoff:
                        break
                    out.append((j, n, e))
                n += 1
                if n > cutoff + 2:
                    break
        return sorted(out)

    # -------------------------------------------------------------- case tables
    def coset(self, j: int) -> mpq:
        if self.kind == "even" and j > self.ell and self.alpha0 != 0:
            return -self.alpha0 - 1
        return self.alpha0

    def mode_terms(self, j: int, m) -> list[tuple[object, str, tuple[int, int] | None]]:
        """Terms (coeff, kind, (j', n)) of v_j t^m; kind is 'x', 'd' or '1'."""
        m = as_q(m)
        ell, al = self.ell, self.alpha0
        if not (1 <= j <= self.dim):
            raise CosetError(f"index {j} outside block of dimension {self.dim}")
        if frac_part(m - self.coset(j)):
            raise CosetError(f"exponent {format_q(m)} not in the coset of v{j}")
        if self.kind == "even":
            if al != 0:
                if j <= ell:
                    i = j
                    if m <= al:
                        return [(mpq(1), "x", (i, int(al - m)))]
                    n = int(m - al - 1)
                    out = [(m, "d", (2 * ell + 1 - i, n + 1))]
                    if i != ell:
                        out.append((mpq(1), "d", (2 * ell - i, n + 1)))
                    return out
                i = j - ell
                if m <= -al - 1:
                    return [(mpq(1), "x", (j, int(-al - m)))]
                n = int(m + al)
                out = [(m, "d", (ell + 1 - i, n))]
                if i != ell:
                    out.append((mpq(-1), "d", (ell - i, n)))
                return out
            # alpha0 = 0
            if m < 0:
                return [(mpq(1), "x", (j, int(-m)))]
            if m > 0:
                n = int(m)
                if j <= ell:
                    out = [(m, "d", (2 * ell + 1 - j, n))]
                    if j != ell:
                        out.append((mpq(1), "d", (2 * ell - j, n)))
                    return out
                i = j - ell
                out = [(m, "d", (ell + 1 - i, n))]
                if i != ell:
                    out.append((mpq(-1), "d", (ell - i, n)))
                return out
            if j < ell:
                return [(mpq(1), "x", (j, 0))]
            if j == ell:
                return [(self.a1, "1", None)]
            if j < 2 * ell:
                return [(mpq(-1), "d", (2 * ell - j, 0))]
            return [(self.a2, "1", None)]
        # odd blocks
        top = 2 * ell - 1
        if al != 0:
            if m < 0:
                return [(mpq(1), "x", (j, int(-m - HALF)))]
            n = int(m - HALF)
            out = [(m, "d", (2 * ell - j, n))]
            if j != top:
                out.append((mpq((-1) ** (j + 1)), "d", (top - j, n)))
            return out
        if m < 0:
            return [(mpq(1), "x", (j, int(-m)))]
        if m > 0:
            n = int(m)
            out = [(m, "d", (2 * ell - j, n))]
            if j != top:
                out.append((mpq((-1) ** (j + 1)), "d", (top - j, n)))
            return out
        if j <= ell - 1:
            return [(mpq(1), "x", (j, 0))]
        if j < top:
            i = j - ell + 1
            return [(mpq((-1) ** (ell - i)), "d", (ell - i, 0))]
        return [(self.a, "1", None)]

    def l0_cross(self, j: int) -> mpq:
        """Coefficient of x[j, n] d[j-1, n] in the closed-form L0 (0 if absent)."""
        if self.kind == "odd":
            return mpq((-1) ** (j + 1)) if j >= 2 else mpq(0)
        if 2 <= j <= self.ell:
            return mpq(-1)
        if j >= self.ell + 2:
            return mpq(1)
        return mpq(0)

    def l0_extra(self) -> tuple[list, mpq]:
        """Zero-mode terms (coeff, xs, ds) of the closed-form L0 and its constant."""
        ell, al = self.ell, self.alpha0
        if self.kind == "even":
            if al != 0:
                return [], -mpq(ell, 2) * (al * al + al)
            if ell == 1:
                return [], self.a1 * self.a2
            return [(self.a2, ((1, 0),), ()), (-self.a1, (), ((ell - 1, 0),))], mpq(0)
        if al != 0:
            return [], mpq(2 * ell - 1, 16)
        if ell == 1:
            return [], self.a * self.a / 2
        return [(HALF, (), ((ell - 1, 0), (ell - 1, 0))), (self.a, ((1, 0),), ())], mpq(0)


@dataclass(frozen=True)
class ModuleSpec:
    blocks: tuple[BlockSpec, ...]
    cutoff: mpq
    zero_cap: int = 0
    level: mpq = mpq(1)
    conductor: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "cutoff", as_q(self.cutoff))
        if not self.blocks:
            raise SpecError("at least one block is required")
        if self.cutoff < 0:
            raise SpecError("cutoff must be non-negative")
        if self.zero_cap < 0:
            raise SpecError("zero_cap must be non-negative")
        if as_q(self.level) != 1:
            raise SpecError("only level 1 is supported")
        if self.conductor is not None:
            M = self.conductor
            if M < 1 or M % 4 or any(M % b.alpha0.denominator for b in self.blocks):
                raise SpecError(f"conductor {M} must be divisible by 4 and by every alpha0 denominator")

    @property
    def M(self) -> int:
        if self.conductor is not None:
            return self.conductor
        return default_conductor(b.alpha0.denominator for b in self.blocks)

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def twist_pair(self) -> TwistPair:
        return direct_sum(*(b.twist_pair() for b in self.blocks))

    def offsets(self) -> tuple[int, ...]:
        out, o = [], 0
        for b in self.blocks:
            out.append(o)
            o += b.dim
        return tuple(out)

    def locate(self, g: int) -> tuple[int, int]:
        """Global basis index of h -> (block, local 1-based index)."""
        for b, (o, blk) in enumerate(zip(self.offsets(), self.blocks)):
            if g < o + blk.dim:
                return b, g - o + 1
        raise IndexError(g)


def _monomial_str(labels, exps) -> str:
    parts = []
    for (b, j, n), e in zip(labels, exps):
        if e:
            parts.append(f"x{b}_{j}_{n}" + (f"^{e}" if e > 1 else ""))
    return "*".join(parts) or "1"


class FockModule:
    """Enumerated basis of the truncated module plus cached mode operators."""

    def __init__(self, spec: ModuleSpec):
        self.spec = spec
        self.tp = spec.twist_pair()
        labels, energies = [], []
        for b, blk in enumerate(spec.blocks):
            for j, n, e in blk.variables(spec.cutoff):
                labels.append((b, j, n))
                energies.append(e)
        self.var_labels: tuple = tuple(labels)
        self.var_energy: tuple = tuple(energies)
        self.var_index = {lab: i for i, lab in enumerate(labels)}
        self._enumerate()
        self._mode_cache: dict = {}

    # ---------------------------------------------------------------- basis
    def _enumerate(self) -> None:
        D, Z = self.spec.cutoff, self.spec.zero_cap
        nv = len(self.var_labels)
        found: list[tuple] = []
        exps = [0] * nv

        def rec(i: int, energy, zdeg: int) -> None:
            if i == nv:
                found.append(tuple(exps))
                return
            e = self.var_energy[i]
            k = 0
            while True:
                exps[i] = k
                rec(i + 1, energy + k * e, zdeg + (k if e == 0 else 0))
                k += 1
                if energy + k * e > D or (e == 0 and zdeg + k > Z):
                    break
            exps[i] = 0

        rec(0, mpq(0), 0)

        def key(ex):
            flat = tuple(i for i, k in enumerate(ex) for _ in range(k))
            return (self.energy_of(ex), flat)

        found.sort(key=key)
        self.monomials: tuple = tuple(found)
        self.index = {m: i for i, m in enumerate(found)}
        self.energies: tuple = tuple(self.energy_of(m) for m in found)
        self.zero_degree: tuple = tuple(self._zdeg(m) for m in found)

    def energy_of(self, exps: Sequence[int]):
        return sum((k * e for k, e in zip(exps, self.var_energy) if k), mpq(0))

    def _zdeg(self, exps):
        return sum(k for k, e in zip(exps, self.var_energy) if k and e == 0)

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def __len__(self) -> int:
        return self.dim

    def vacuum(self) -> dict:
        return {0: mpq(1)}

    def monomial_string(self, idx: int) -> str:
        return _monomial_str(self.var_labels, self.monomials[idx])

    def level_indices(self, energy) -> list[int]:
        energy = as_q(energy)
        return [i for i, e in enumerate(self.energies) if e == energy]

    def distinct_energies(self) -> list[mpq]:
        return sorted(set(self.energies))

    # ---------------------------------------------------------------- operators
    def poly_operator(self, terms: Iterable[tuple], shift) -> SparseOperator:
        """Sum of coeff * (prod x) (prod d) over terms given with global labels (b, j, n)."""
        cols: dict[int, dict] = {}
        window = set(range(self.dim))
        for coeff, xs, ds in terms:
            if not coeff:
                continue
            xi = []
            missing_x = False
            for lab in xs:
                if lab in self.var_index:
                    xi.append(self.var_index[lab])
                else:
                    missing_x = True
            di = []
            dead = False
            for lab in ds:
                if lab in self.var_index:
                    di.append(self.var_index[lab])
                else:
                    dead = True  # derivative in a variable no basis monomial contains
            if dead:
                continue
            for c, mono in enumerate(self.monomials):
                ex = list(mono)
                val = coeff
                for v in di:
                    if not ex[v]:
                        val = 0
                        break
                    val = val * ex[v]
                    ex[v] -= 1
                if not val:
                    continue
                if missing_x:
                    window.discard(c)
                    continue
                for v in xi:
                    ex[v] += 1
                r = self.index.get(tuple(ex))
                if r is None:
                    window.discard(c)
                    continue
                col = cols.setdefault(c, {})
                s = col.get(r, 0) + val
                if s:
                    col[r] = s
                else:
                    col.pop(r)
        return SparseOperator(self.dim, shift, cols, window)

    def mode(self, b: int, j: int, m) -> SparseOperator:
        """v_j t^m of block b (j is 1-based within the block)."""
        m = as_q(m)
        key = (b, j, m)
        op = self._mode_cache.get(key)
        if op is None:
            blk = self.spec.blocks[b]
            terms = []
            for c, kind, lab in blk.mode_terms(j, m):
                if kind == "x":
                    terms.append((c, ((b,) + lab,), ()))
                elif kind == "d":
                    terms.append((c, (), ((b,) + lab,)))
                else:
                    terms.append((c, (), ()))
            op = self.poly_operator(terms, -m)
            self._mode_cache[key] = op
        return op

    def mode_global(self, g: int, m) -> SparseOperator:
        b, j = self.spec.locate(g)
        return self.mode(b, j, m)

    def coset_of(self, g: int) -> mpq:
        return self.tp.alpha[g]

    def mode_vec(self, a: Sequence, m) -> SparseOperator:
        """(a t^m) for a vector a in h; components outside the coset of m are dropped."""
        m = as_q(m)
        out = SparseOperator.zero(self.dim, -m)
        for g, c in enumerate(a):
            if c and not frac_part(m - self.tp.alpha[g]):
                out = out + self.mode_global(g, m).scale(c)
        return out

    def l0_block(self, b: int) -> SparseOperator:
        blk = self.spec.blocks[b]
        terms = []
        for (bb, j, n), e in zip(self.var_labels, self.var_energy):
            if bb != b:
                continue
            lab = (b, j, n)
            terms.append((e, (lab,), (lab,)))
            terms.append((blk.l0_cross(j), (lab,), ((b, j - 1, n),)))
        extra, const = blk.l0_extra()
        for c, xs, ds in extra:
            terms.append((c, tuple((b,) + x for x in xs), tuple((b,) + d for d in ds)))
        op = self.poly_operator(terms, 0)
        if const:
            op = op + SparseOperator.identity(self.dim, const)
        return op

    @cached_property
    def l0(self) -> SparseOperator:
        op = SparseOperator.zero(self.dim, 0)
        for b in range(len(self.spec.blocks)):
            op = op + self.l0_block(b)
        return op

    def vacuum_weight(self) -> mpq:
        col = self.l0.column(0)
        return col.get(0, mpq(0))

    # ---------------------------------------------------------------- export
    def basis_json(self) -> list[dict]:
        return [
            {"index": i, "monomial": self.monomial_string(i), "energy": format_q(self.energies[i])}
            for i in range(self.dim)
        ]


def build_basis(spec: ModuleSpec) -> FockModule:
    return FockModule(spec)


def mode_action(module: FockModule, block: int, j: int, m) -> SparseOperator:
    return module.mode(block, j, m)


def l0_closed_form(module: FockModule, block: int | None = None) -> SparseOperator:
    return module.l0 if block is None else module.l0_block(block)
