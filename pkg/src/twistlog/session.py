"""JSON session files: parsing, validation and deterministic serialization."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from gmpy2 import mpq

from .fock import BlockSpec, FockModule, ModuleSpec, SpecError
from .scalars import format_q

__all__ = ["SessionSpec", "parse_rational", "load_session", "dump_json"]

_RAT = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*([+-]?\d+))?\s*$")


def parse_rational(text, what: str = "value") -> mpq:
    if isinstance(text, bool):
        raise SpecError(f"{what}: expected a rational, got {text!r}")
    if isinstance(text, int):
        return mpq(text)
    if not isinstance(text, str):
        raise SpecError(f"{what}: rationals must be strings like \"p/q\", got {text!r}")
    mt = _RAT.match(text)
    if not mt:
        raise SpecError(f"{what}: cannot parse {text!r} as a rational")
    num, den = int(mt.group(1)), int(mt.group(2) or 1)
    if den == 0:
        raise SpecError(f"{what}: zero denominator in {text!r}")
    return mpq(num, den)


@dataclass(frozen=True)
class SessionSpec:
    blocks: tuple[BlockSpec, ...]
    cutoff: mpq
    zero_cap: int = 0
    conductor: int | None = None
    source: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, data: dict) -> SessionSpec:
        if not isinstance(data, dict):
            raise SpecError("session must be a JSON object")
        unknown = set(data) - {"blocks", "params", "cutoff", "zero_cap", "conductor"}
        if unknown:
            raise SpecError(f"unknown session keys: {sorted(unknown)}")
        raw_blocks = data.get("blocks")
        if not isinstance(raw_blocks, list) or not raw_blocks:
            raise SpecError("'blocks' must be a non-empty list")
        shared = data.get("params") or {}
        blocks = []
        for i, rb in enumerate(raw_blocks):
            if not isinstance(rb, dict):
                raise SpecError(f"block {i} must be an object")
            params = dict(shared)
            params.update(rb.get("params") or {})
            kw = {}
            for name in ("a1", "a2", "a"):
                if name in params:
                    kw[name] = parse_rational(params[name], f"block {i} {name}")
            ell = rb.get("ell")
            if not isinstance(ell, int) or isinstance(ell, bool):
                raise SpecError(f"block {i}: ell must be an integer")
            al = parse_rational(rb.get("alpha0", "0"), f"block {i} alpha0")
            # shared params only reach blocks where they make sense
            if not rb.get("params"):
                if not (rb.get("kind") == "even" and al == 0):
                    kw.pop("a1", None)
                    kw.pop("a2", None)
                if not (rb.get("kind") == "odd" and al == 0):
                    kw.pop("a", None)
            blocks.append(BlockSpec(rb.get("kind"), ell, al, **kw))
        cutoff = parse_rational(data.get("cutoff", "0"), "cutoff")
        zc = data.get("zero_cap", 0)
        if not isinstance(zc, int) or isinstance(zc, bool):
            raise SpecError("zero_cap must be an integer")
        cond = data.get("conductor")
        if cond is not None and (not isinstance(cond, int) or isinstance(cond, bool)):
            raise SpecError("conductor must be an integer")
        out = cls(tuple(blocks), cutoff, zc, cond, data)
        out.module_spec()  # validates
        return out

    def module_spec(self) -> ModuleSpec:
        return ModuleSpec(self.blocks, self.cutoff, self.zero_cap, conductor=self.conductor)

    def with_overrides(self, cutoff=None, zero_cap=None) -> SessionSpec:
        s = self
        if cutoff is not None:
            s = replace(s, cutoff=mpq(cutoff))
        if zero_cap is not None:
            s = replace(s, zero_cap=int(zero_cap))
        s.module_spec()
        return s

    def build(self) -> FockModule:
        return FockModule(self.module_spec())

    def to_dict(self) -> dict:
        blocks = []
        for b in self.blocks:
            d = {"kind": b.kind, "ell": b.ell, "alpha0": format_q(b.alpha0)}
            params = {n: format_q(getattr(b, n)) for n in ("a1", "a2", "a") if getattr(b, n)}
            if params:
                d["params"] = params
            blocks.append(d)
        out = {"blocks": blocks, "cutoff": format_q(self.cutoff), "zero_cap": self.zero_cap}
        if self.conductor is not None:
            out["conductor"] = self.conductor
        return out


def load_session(path) -> SessionSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return SessionSpec.from_dict(data)


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True) + "\n"
