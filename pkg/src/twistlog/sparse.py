"""Exact sparse operators on a truncated graded basis.

Every operator carries an exactness window: the set of input basis indices on
which its stored column equals the true (untruncated) image.  Products and sums
propagate windows, and :meth:`SparseOperator.apply` refuses inputs outside it.
"""
from __future__ import annotations

from typing import Iterable, Mapping

from gmpy2 import mpq

from .scalars import format_q

__all__ = ["SparseOperator", "WindowError", "Vector", "vec_add", "vec_scale", "vec_sub"]

Vector = dict  # basis index -> coefficient


class WindowError(ValueError):
    """Input lies outside an operator's exactness window."""


def vec_add(u: Mapping, v: Mapping) -> Vector:
    out = dict(u)
    for k, c in v.items():
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def vec_scale(c, v: Mapping) -> Vector:
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def vec_sub(u: Mapping, v: Mapping) -> Vector:
    return vec_add(u, vec_scale(-1, v))


class SparseOperator:
    __slots__ = ("dim", "shift", "cols", "window")

    def __init__(self, dim: int, shift, cols: Mapping[int, Mapping[int, object]] | None = None,
                 window: Iterable[int] | None = None):
        self.dim = dim
        self.shift = mpq(shift)
        self.cols = {c: dict(col) for c, col in (cols or {}).items() if col}
        self.window = frozenset(range(dim)) if window is None else frozenset(window)

    # ------------------------------------------------------------------ builders
    @classmethod
    def zero(cls, dim: int, shift=0, window: Iterable[int] | None = None) -> SparseOperator:
        return cls(dim, shift, {}, window)

    @classmethod
    def identity(cls, dim: int, scale=1) -> SparseOperator:
        if isinstance(scale, int):
            scale = mpq(scale)
        return cls(dim, 0, {i: {i: scale} for i in range(dim)} if scale else {})

    # ------------------------------------------------------------------ algebra
    def column(self, c: int) -> Mapping[int, object]:
        return self.cols.get(c, {})

    def apply(self, v: Mapping[int, object], strict: bool = True) -> Vector:
        out: Vector = {}
        for c, x in v.items():
            if not x:
                continue
            if strict and c not in self.window:
                raise WindowError(f"basis vector {c} outside the exactness window")
            for r, y in self.cols.get(c, {}).items():
                s = out.get(r, 0) + x * y
                if s:
                    out[r] = s
                else:
                    out.pop(r, None)
        return out

    def __matmul__(self, other: SparseOperator) -> SparseOperator:
        """Composition self after other."""
        cols = {}
        window = []
        for c in other.window:
            col = other.cols.get(c)
            if col is None:
                window.append(c)
                continue
            if all(r in self.window for r in col):
                window.append(c)
        for c, col in other.cols.items():
            out = self.apply(col, strict=False)
            if out:
                cols[c] = out
        return SparseOperator(self.dim, self.shift + other.shift, cols, window)

    def _combine(self, other: SparseOperator, sign) -> SparseOperator:
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        if self.cols and other.cols and self.shift != other.shift:
            raise ValueError(f"adding operators with shifts {self.shift} and {other.shift}")
        shift = self.shift if self.cols else other.shift
        cols = {c: dict(col) for c, col in self.cols.items()}
        for c, col in other.cols.items():
            tgt = cols.setdefault(c, {})
            for r, y in col.items():
                s = tgt.get(r, 0) + sign * y
                if s:
                    tgt[r] = s
                else:
                    tgt.pop(r, None)
        return SparseOperator(self.dim, shift, cols, self.window & other.window)

    def __add__(self, other: SparseOperator) -> SparseOperator:
        return self._combine(other, 1)

    def __sub__(self, other: SparseOperator) -> SparseOperator:
        return self._combine(other, -1)

    def __neg__(self) -> SparseOperator:
        return self.scale(-1)

    def scale(self, c) -> SparseOperator:
        if not c:
            return SparseOperator(self.dim, self.shift, {}, self.window)
        return SparseOperator(self.dim, self.shift,
                              {k: {r: c * y for r, y in col.items()} for k, col in self.cols.items()},
                              self.window)

    __rmul__ = scale

    def restrict(self, window: Iterable[int]) -> SparseOperator:
        return SparseOperator(self.dim, self.shift, self.cols, self.window & frozenset(window))

    def commutator(self, other: SparseOperator) -> SparseOperator:
        out = self @ other - other @ self
        if not out.window:
            raise WindowError("empty safe window for commutator")
        return out

    # ------------------------------------------------------------------ queries
    def nnz(self) -> int:
        return sum(len(c) for c in self.cols.values())

    def is_zero_on_window(self) -> bool:
        return not any(self.cols.get(c) for c in self.window)

    def equals_on(self, other: SparseOperator, window: Iterable[int] | None = None) -> bool:
        w = (self.window & other.window) if window is None else frozenset(window)
        return all(self.cols.get(c, {}) == other.cols.get(c, {}) for c in w)

    def first_difference(self, other: SparseOperator, window: Iterable[int] | None = None):
        w = sorted((self.window & other.window) if window is None else window)
        for c in w:
            a, b = self.cols.get(c, {}), other.cols.get(c, {})
            if a != b:
                r = min(k for k in set(a) | set(b) if a.get(k, 0) != b.get(k, 0))
                return c, r, a.get(r, 0), b.get(r, 0)
        return None

    def energy_consistent(self, energies) -> bool:
        return all(energies[r] == energies[c] + self.shift for c, col in self.cols.items() for r in col)

    def triplets(self) -> list[tuple[int, int, str]]:
        return sorted((r, c, _fmt(y)) for c, col in self.cols.items() for r, y in col.items())

    def __repr__(self) -> str:
        return f"SparseOperator(dim={self.dim}, shift={format_q(self.shift)}, nnz={self.nnz()}, window={len(self.window)})"


def _fmt(y) -> str:
    try:
        return format_q(y)
    except (TypeError, ValueError):
        return str(y)
