"""Verification suites: task lists, per-process workers and report aggregation."""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from gmpy2 import mpq

from .fields import (BorcherdsEngine, CheckResult, D_z, LocalityError, check_locality, field_of,
                     identity_field, nth_product, phi_equivariance_check, propagator_check,
                     translation_check, _rng)
from .fock import FockModule, SpecError
from .loop import LoopElement, abelian, bracket
from .scalars import format_q
from .session import SessionSpec, parse_rational
from .sparse import SparseOperator, WindowError
from .virasoro import (JordanError, VirasoroFamily, central_charge, exp_l0_conjugation_check,
                       l_action_check, virasoro_relation_check)

__all__ = ["SUITES", "run_suite", "operator_manifest", "load_operator_cache", "default_jobs"]

SUITES = ("heisenberg", "virasoro", "borcherds", "equivariance", "locality", "nproduct", "translation")


# --------------------------------------------------------------------- operator cache


def _mode_keys(module: FockModule):
    D = module.spec.cutoff
    for b, blk in enumerate(module.spec.blocks):
        for j in range(1, blk.dim + 1):
            for m in _rng(-D, D, blk.coset(j)):
                yield b, j, m


def _op_record(op: SparseOperator) -> dict:
    return {
        "shift": format_q(op.shift),
        "window_complement": sorted(set(range(op.dim)) - op.window),
        "entries": [list(t) for t in op.triplets()],
    }


def operator_manifest(module: FockModule) -> dict:
    modes = []
    for b, j, m in _mode_keys(module):
        rec = {"block": b, "j": j, "m": format_q(m)}
        rec.update(_op_record(module.mode(b, j, m)))
        modes.append(rec)
    return {"dim": module.dim, "modes": modes, "L0": _op_record(module.l0)}


def _op_from_record(dim: int, rec: dict) -> SparseOperator:
    cols: dict = {}
    for r, c, x in rec["entries"]:
        cols.setdefault(int(c), {})[int(r)] = parse_rational(x, "operator entry")
    window = set(range(dim)) - set(rec["window_complement"])
    return SparseOperator(dim, parse_rational(rec["shift"], "shift"), cols, window)


def load_operator_cache(module: FockModule, path) -> int:
    """Seed the module's mode cache from an operators.json written by ``build``."""
    p = Path(path)
    if p.is_dir():
        p = p / "operators.json"
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{p}: invalid operator cache ({exc.msg})") from None
    if data.get("dim") != module.dim:
        raise SpecError(f"operator cache has dimension {data.get('dim')}, module has {module.dim}")
    for rec in data["modes"]:
        key = (rec["block"], rec["j"], parse_rational(rec["m"], "m"))
        module._mode_cache[key] = _op_from_record(module.dim, rec)
    return len(data["modes"])


# --------------------------------------------------------------------- worker state

_STATE: dict = {}


def _init_worker(session: dict, cache) -> None:
    spec = SessionSpec.from_dict(session)
    module = spec.build()
    if cache:
        load_operator_cache(module, cache)
    _STATE.clear()
    _STATE.update(module=module, spec=spec)


def _module() -> FockModule:
    return _STATE["module"]


def _engine() -> BorcherdsEngine:
    if "engine" not in _STATE:
        _STATE["engine"] = BorcherdsEngine(_module())
    return _STATE["engine"]


def _family() -> VirasoroFamily:
    if "family" not in _STATE:
        _STATE["family"] = VirasoroFamily(_module())
    return _STATE["family"]


def _field(g: int):
    fields = _STATE.setdefault("fields", {})
    if g not in fields:
        fields[g] = field_of(_module(), _module().tp.basis_vector(g))
    return fields[g]


# --------------------------------------------------------------------- tasks


def _heisenberg_pair(g: int, h: int, R: mpq) -> CheckResult:
    mod = _module()
    tp = mod.tp
    ls = abelian(tp)
    res = CheckResult("heisenberg")
    for m in _rng(-R, R, tp.alpha[g]):
        A = mod.mode_global(g, m)
        for k in _rng(-R, R, tp.alpha[h]):
            B = mod.mode_global(h, k)
            lhs = A @ B - B @ A
            br = bracket(LoopElement.mono(g, m), LoopElement.mono(h, k), ls)
            rhs = SparseOperator.identity(mod.dim, br.central) if br.central else SparseOperator.zero(mod.dim, 0)
            for (i, e), c in br.terms.items():
                rhs = rhs + mod.mode_global(i, e).scale(c)
            res.compare(lhs, rhs, dict(a=g, b=h, m=str(m), k=str(k)))
    return res


def _energy_law(g: int, R: mpq) -> CheckResult:
    """[L0, v t^m] = -m v t^m - (N v) t^m."""
    mod = _module()
    tp = mod.tp
    res = CheckResult("energy")
    v = tp.basis_vector(g)
    Nv = tp.apply_N(v)
    for m in _rng(-R, R, tp.alpha[g]):
        A = mod.mode_global(g, m)
        lhs = mod.l0 @ A - A @ mod.l0
        rhs = A.scale(-m) - mod.mode_vec(Nv, m)
        res.compare(lhs, rhs, dict(a=g, m=str(m), law="L0"))
    return res


def _virasoro_pair(m: int, n: int) -> CheckResult:
    return virasoro_relation_check(_family(), m, n)


def _central() -> CheckResult:
    fam = _family()
    res = CheckResult("central_charge")
    c = central_charge(fam)
    res.checked = 1
    _STATE["c"] = c
    if c == fam.c:
        res.passed = 1
    else:
        res.failures.append(dict(check="central_charge", lhs=format_q(c), rhs=format_q(fam.c)))
    return res


def _l_action(g: int) -> CheckResult:
    r1, r0 = l_action_check(_module(), _module().tp.basis_vector(g), lm1=_family().L(-1))
    return r1.merge(r0)


def _exp_l0(g: int) -> CheckResult:
    return exp_l0_conjugation_check(_module(), _module().tp.basis_vector(g))


def _borcherds(g: int, h: int, n: int, R: mpq) -> CheckResult:
    eng = _engine()
    mod = _module()
    tp = mod.tp
    a, b = tp.basis_vector(g), tp.basis_vector(h)
    res = CheckResult("borcherds")
    for m in _rng(-R, R, tp.alpha[g]):
        for k in _rng(-R, R, tp.alpha[h]):
            r = eng.residual(a, b, m, k, n)
            res.compare(r, SparseOperator.zero(mod.dim, r.shift), dict(a=g, b=h, m=str(m), k=str(k), n=n))
    return res


def _equivariance(g: int) -> CheckResult:
    mod = _module()
    return phi_equivariance_check(mod, mod.tp.basis_vector(g))


def _locality(g: int, h: int, N: int) -> CheckResult:
    return check_locality(_field(g), _field(h), N)


def _nproduct_identity(g: int) -> CheckResult:
    mod = _module()
    f, I = _field(g), identity_field(mod)
    res = CheckResult("nproduct")
    for n in (0, 1, 2):
        zero = f._like({}, weight=f.weight + I.weight - n)
        nth_product(f, I, n, 2).compare(zero, res, dict(a=g, n=n, rule="a_(n)1 = 0"))
    d1 = D_z(f)
    nth_product(f, I, -2, 2).compare(d1, res, dict(a=g, n=-2, rule="a_(-2)1 = Da"))
    nth_product(f, I, -3, 2).compare(D_z(d1).scale(mpq(1, 2)), res, dict(a=g, n=-3, rule="a_(-3)1 = D^(2)a"))
    return res


def _nproduct_pair(g: int, h: int) -> CheckResult:
    mod = _module()
    tp = mod.tp
    f, fg = _field(g), _field(h)
    res = CheckResult("nproduct")
    pair = tp.space.form(tp.basis_vector(g), tp.basis_vector(h))
    I = identity_field(mod)
    nth_product(f, fg, 1, 2).compare(I.scale(pair) if pair else I._like({}), res,
                                     dict(a=g, b=h, n=1, rule="a_(1)b = (a|b) 1"))
    nth_product(f, fg, 0, 2).compare(I._like({}, weight=f.weight + fg.weight), res,
                                     dict(a=g, b=h, n=0, rule="a_(0)b = 0"))
    res.merge(propagator_check(mod, tp.basis_vector(g), tp.basis_vector(h)))
    return res


def _translation(g: int) -> CheckResult:
    return translation_check(_module(), f=_field(g))


_TASKS = {
    "heisenberg": _heisenberg_pair,
    "energy": _energy_law,
    "virasoro": _virasoro_pair,
    "central": _central,
    "laction": _l_action,
    "exp_l0": _exp_l0,
    "borcherds": _borcherds,
    "equivariance": _equivariance,
    "locality": _locality,
    "nproduct_identity": _nproduct_identity,
    "nproduct_pair": _nproduct_pair,
    "translation": _translation,
}


def _run_task(task: tuple) -> tuple[tuple, CheckResult, dict]:
    name, *args = task
    try:
        res = _TASKS[name](*args)
    except (WindowError, JordanError) as exc:
        res = CheckResult(name, inconclusive=1)
        res.failures = []
        return task, res, {"inconclusive_reason": str(exc)}
    except LocalityError as exc:
        res = CheckResult(name)
        res.failures.append(dict(task=name, args=[str(x) for x in args], error=str(exc)))
        return task, res, {}
    extra = {"c": format_q(_STATE["c"])} if name == "central" and "c" in _STATE else {}
    return task, res, extra


# --------------------------------------------------------------------- planning


def plan(suite: str, module: FockModule, m_range=None, n_range=None) -> tuple[list[tuple], dict]:
    d = module.tp.dim
    D = module.spec.cutoff
    gens = range(d)
    pairs = [(g, h) for g in gens for h in gens]
    if suite == "heisenberg":
        R = mpq(m_range) if m_range is not None else max(D - 1, mpq(0))
        tasks = [("heisenberg", g, h, R) for g, h in pairs] + [("energy", g, R) for g in gens]
        return tasks, {"m_range": format_q(R)}
    if suite == "virasoro":
        R = int(m_range) if m_range is not None else 3
        Rn = int(n_range) if n_range is not None else R
        tasks = [("central",)]
        tasks += [("virasoro", m, n) for m in range(-R, R + 1) for n in range(-Rn, Rn + 1)]
        tasks += [("laction", g) for g in gens] + [("exp_l0", g) for g in gens]
        return tasks, {"m_range": R, "n_range": Rn}
    if suite == "borcherds":
        R = mpq(m_range) if m_range is not None else mpq(3, 2)
        Rn = int(n_range) if n_range is not None else 2
        tasks = [("borcherds", g, h, n, R) for g, h in pairs for n in range(-Rn, Rn + 1)]
        return tasks, {"m_range": format_q(R), "n_range": Rn}
    if suite == "equivariance":
        return [("equivariance", g) for g in gens], {}
    if suite == "locality":
        N = int(n_range) if n_range is not None else 2
        return [("locality", g, h, N) for g, h in pairs], {"N": N}
    if suite == "nproduct":
        tasks = [("nproduct_identity", g) for g in gens] + [("nproduct_pair", g, h) for g, h in pairs]
        return tasks, {}
    if suite == "translation":
        return [("translation", g) for g in gens], {}
    raise SpecError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


def default_jobs() -> int:
    env = os.environ.get("TWISTLOG_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SpecError(f"TWISTLOG_JOBS must be an integer, got {env!r}") from None
    return 1


def _sort_key(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, default=str)


def run_suite(suite: str, spec: SessionSpec, *, m_range=None, n_range=None, jobs: int = 1,
              cache=None) -> dict:
    t0 = time.perf_counter_ns()
    session = spec.to_dict()
    _init_worker(session, cache)
    tasks, params = plan(suite, _module(), m_range, n_range)
    total = CheckResult(suite)
    extra: dict = {}
    reasons = set()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(session, cache)) as ex:
            results = list(ex.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]
    for task, res, ext in results:
        total.merge(res)
        if "inconclusive_reason" in ext:
            reasons.add(ext.pop("inconclusive_reason"))
        extra.update(ext)
    failures = sorted(total.failures, key=_sort_key)
    report = {
        "suite": suite,
        "session": session,
        "parameters": dict(params, tasks=len(tasks), cache=bool(cache)),
        "counts": {"checked": total.checked, "passed": total.passed, "failed": len(failures),
                   "inconclusive": total.inconclusive},
        "failures": failures,
        "wall_time_ns": time.perf_counter_ns() - t0,
    }
    if suite == "virasoro":
        report["central_charge"] = {"expected": format_q(_family().c), "recomputed": extra.get("c")}
    if reasons:
        report["inconclusive_reasons"] = sorted(reasons)
    return report


def exit_code(report: dict) -> int:
    c = report["counts"]
    if c["failed"]:
        return 1
    if not c["checked"]:
        return 3
    return 0
