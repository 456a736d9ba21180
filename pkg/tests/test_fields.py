import pytest
from gmpy2 import mpq

from conftest import module, unit
from twistlog.fields import (BorcherdsEngine, D_z, LocalityError, annihilation_split, borcherds_check,
                             check_locality, field_of, identity_field, normally_ordered, nth_product,
                             partial_zeta, phi_equivariance_check, propagator_check, restrict_zeta_zero,
                             translation_check)
from twistlog.scalars import factorial
from twistlog.sparse import SparseOperator, WindowError

half, third = mpq(1, 2), mpq(1, 3)


def zero_like(f, weight=None):
    return f._like({}, weight=weight)


def assert_fields_equal(f, g):
    res = f.compare(g, _result())
    assert res.ok and res.checked > 0, res.failures[:3]


def _result():
    from twistlog.fields import CheckResult
    return CheckResult("t")


def test_field_of_flat_block():
    mod = module("even", 1, -half, 2)
    f = field_of(mod, unit(mod, 0))
    assert f.zeta_degree() == 0
    for (m, k), op in f.comps.items():
        assert op.equals_on(mod.mode(0, 1, m), op.window | frozenset(range(mod.dim)))


def test_field_of_even_l2_zeta_term():
    mod = module("even", 2, -third, 2)
    f = field_of(mod, unit(mod, 0))
    assert f.zeta_degree() == 1
    for (m, k), op in f.comps.items():
        if k == 1:
            assert op.equals_on(mod.mode(0, 2, m).scale(-1))


def test_field_of_odd_l2_sign_pattern():
    mod = module("odd", 2, -half, 2)
    f = field_of(mod, unit(mod, 0))
    assert f.zeta_degree() == 2
    j = 1
    for (m, k), op in f.comps.items():
        i = j + k
        sign = (-1) ** ((i - j) * (i + j - 1) // 2)
        assert op.equals_on(mod.mode(0, i, m).scale(mpq(sign, factorial(k))))


def test_restrict_zeta_zero():
    mod = module("even", 2, -third, 2)
    f = field_of(mod, unit(mod, 0))
    x = restrict_zeta_zero(f)
    assert {k for _, k in x.comps} == {0}
    flat = field_of(module("even", 1, -half, 2), (1, 0))
    assert restrict_zeta_zero(flat).comps == flat.comps
    assert restrict_zeta_zero(zero_like(f)).comps == {}


def test_annihilation_split():
    mod = module("even", 1, -half, 3)
    I = identity_field(mod)
    plus, minus = annihilation_split(I)
    assert plus.comps.keys() == I.comps.keys() and not minus.comps
    f = field_of(mod, unit(mod, 0))
    plus, minus = annihilation_split(f)
    # z-powers -m-1 of the annihilation part are all negative, starting at z^(-1/2)
    powers = sorted(-m - 1 for m, _ in minus.comps)
    assert powers[-1] == -half and all(p < 0 for p in powers)
    assert all(-m - 1 >= 0 for m, _ in plus.comps)
    assert_fields_equal(plus + minus, f)


def test_normally_ordered_with_identity():
    mod = module("even", 2, -third, 2)
    g = field_of(mod, unit(mod, 2))
    assert_fields_equal(normally_ordered(identity_field(mod), g), g)


def test_normally_ordered_on_vacuum():
    # :f g: |0> = f_+ g |0> + g f_- |0>, assembled term by term
    mod = module("even", 1, -half, 2)
    f, g = field_of(mod, unit(mod, 0)), field_of(mod, unit(mod, 1))
    no = normally_ordered(f, g)
    plus, minus = annihilation_split(f)
    vac = mod.vacuum()
    compared = 0
    for (M, k), op in no.comps.items():
        if 0 not in op.window:
            continue
        direct = {}
        for part, first_f in ((plus, False), (minus, True)):
            for (m1, k1), A in part.comps.items():
                B = g.component(M - 1 - m1, k - k1)
                out = B.apply(A.apply(vac, strict=False), strict=False) if first_f else \
                    A.apply(B.apply(vac, strict=False), strict=False)
                for r, x in out.items():
                    direct[r] = direct.get(r, 0) + x
        assert op.apply(vac) == {r: x for r, x in direct.items() if x}
        compared += 1
    assert compared > 0


@pytest.mark.parametrize("spec", [("even", 1, -half, 3), ("even", 2, -third, 3), ("odd", 2, -half, 3),
                                  ("odd", 3, -half, 2)])
def test_products_with_identity(spec):
    mod = module(*spec)
    I = identity_field(mod)
    for g in range(mod.tp.dim):
        f = field_of(mod, unit(mod, g))
        for n in (0, 1, 3):
            prod = nth_product(f, I, n, 2)
            assert all(op.is_zero_on_window() for op in prod.comps.values())
        assert_fields_equal(nth_product(f, I, -2, 2), D_z(f))
        assert_fields_equal(nth_product(f, I, -3, 2), D_z(D_z(f)).scale(half))


@pytest.mark.parametrize("spec", [("even", 1, -half, 2), ("even", 2, -third, 2), ("odd", 2, -half, 2)])
def test_first_product_is_form(spec):
    mod = module(*spec)
    I = identity_field(mod)
    d = mod.tp.dim
    for g in range(d):
        for h in range(d):
            f1, f2 = field_of(mod, unit(mod, g)), field_of(mod, unit(mod, h))
            form = mod.tp.space.form(unit(mod, g), unit(mod, h))
            prod = nth_product(f1, f2, 1, 2)
            if form:
                assert_fields_equal(prod, I.scale(form))
            else:
                assert all(op.is_zero_on_window() for op in prod.comps.values())


def test_locality_orders():
    mod = module("even", 2, -third, 2)
    f, g = field_of(mod, unit(mod, 0)), field_of(mod, unit(mod, 3))
    assert check_locality(f, g, 2).ok
    assert check_locality(f, g, 3).ok
    assert not check_locality(f, g, 1).ok
    with pytest.raises(LocalityError):
        nth_product(f, g, 0, 1)


def test_locality_negative_control():
    mod = module("even", 2, -third, 2)
    f, g = field_of(mod, unit(mod, 0)), field_of(mod, unit(mod, 3))
    key = sorted(f.comps)[len(f.comps) // 2]
    bad = f._like(dict(f.comps, **{}) | {key: f.comps[key].scale(2)})
    assert not check_locality(bad, g, 2).ok


@pytest.mark.parametrize("spec", [("even", 2, -third, 2), ("odd", 2, -half, 2)])
def test_zeta_derivation_property(spec):
    mod = module(*spec)
    d = mod.tp.dim
    for g, h in ((0, d - 1), (0, 1)):
        f1, f2 = field_of(mod, unit(mod, g)), field_of(mod, unit(mod, h))
        for n in (-2, -1, 0):
            lhs = partial_zeta(nth_product(f1, f2, n, 2))
            rhs = nth_product(partial_zeta(f1), f2, n, 2) + nth_product(f1, partial_zeta(f2), n, 2)
            res = lhs.compare(rhs, _result())
            assert res.ok, res.failures[:2]


def test_dong_closure():
    mod = module("even", 2, -third, mpq(4, 3))
    f1, f2, f3 = (field_of(mod, unit(mod, g)) for g in (0, 3, 2))
    N, n = 2, 0
    # a_(0) b is zero for Heisenberg generators; use the -1 product as the composite
    for n in (0, -1):
        prod = nth_product(f1, f2, n, N)
        res = check_locality(prod, f3, 2 * N + (N - 1 - n))
        assert res.ok


def test_sigma_restriction():
    mod = module("even", 2, -third, 2)
    tp = mod.tp
    ker = [g for g in range(tp.dim) if not any(tp.apply_N(unit(mod, g)))]
    assert ker == [1, 3]
    for g in ker:
        f = field_of(mod, unit(mod, g))
        assert f.zeta_degree() == 0
        for h in ker:
            for m in f.exponents():
                for k in field_of(mod, unit(mod, h)).exponents():
                    A, B = mod.mode_global(g, m), mod.mode_global(h, k)
                    expected = m * tp.space.form(unit(mod, g), unit(mod, h)) if m + k == 0 else 0
                    assert (A @ B - B @ A).equals_on(SparseOperator.identity(mod.dim, mpq(expected)))


def test_borcherds_vacuum_example():
    mod = module("even", 1, -half, 2)
    eng = BorcherdsEngine(mod)
    a, b = unit(mod, 0), unit(mod, 1)
    assert eng.lhs(a, b, half, -half, 0).apply(mod.vacuum()) == {0: half}
    assert eng.rhs(a, b, half, -half, 0).apply(mod.vacuum()) == {0: half}
    assert borcherds_check(eng, a, b, half, -half, 0, 0) == {}


@pytest.mark.parametrize("spec", [("even", 2, -third, 2), ("odd", 2, -half, 2), ("even", 1, 0, 1, 2)])
def test_borcherds_sweep(spec):
    mod = module(*spec, a1=mpq(1, 3), a2=mpq(2)) if spec[2] == 0 else module(*spec)
    eng = BorcherdsEngine(mod)
    tp = mod.tp
    checked = 0
    for g in range(tp.dim):
        for h in range(tp.dim):
            for n in (-2, -1, 0, 1, 2):
                for m in (tp.alpha[g] + s for s in (-1, 0, 1)):
                    for k in (tp.alpha[h] + s for s in (-1, 0, 1)):
                        r = eng.residual(unit(mod, g), unit(mod, h), m, k, n)
                        assert r.is_zero_on_window(), (g, h, n, m, k)
                        checked += len(r.window)
    assert checked > 100


def test_borcherds_detects_corruption():
    mod = module("even", 2, -third, 2)
    clean = BorcherdsEngine(mod)
    from twistlog.fock import FockModule
    bad = FockModule(mod.spec)
    key = (0, 1, mpq(2, 3))
    op = bad.mode(*key)
    bad._mode_cache[key] = op.scale(mpq(3, 2))
    eng = BorcherdsEngine(bad)
    a, b = unit(mod, 0), unit(mod, 3)
    failures = sum(not eng.residual(a, b, m, k, n).is_zero_on_window()
                   for n in (-1, 0, 1) for m in (-third, mpq(2, 3)) for k in (-mpq(2, 3), third))
    assert failures > 0
    assert all(clean.residual(a, b, m, k, 0).is_zero_on_window() for m in (-third, mpq(2, 3))
               for k in (-mpq(2, 3), third))


@pytest.mark.parametrize("spec", [("even", 1, -half, 2), ("even", 2, -third, 2), ("odd", 2, -half, 2),
                                  ("even", 3, -mpq(1, 4), mpq(3, 2))])
def test_phi_equivariance(spec):
    mod = module(*spec)
    for g in range(mod.tp.dim):
        res = phi_equivariance_check(mod, unit(mod, g))
        assert res.ok and res.checked > 0


def test_phi_equivariance_negative_control():
    mod = module("even", 2, -third, 2)

    def flipped(module_, a):
        f = field_of(module_, a)
        return f._like({(m, k): op.scale(-1) if k == 1 else op for (m, k), op in f.comps.items()})

    assert not phi_equivariance_check(mod, unit(mod, 0), field_fn=flipped).ok


def test_translation():
    mod = module("even", 2, -third, 2)
    for g in range(mod.tp.dim):
        res = translation_check(mod, unit(mod, g))
        assert res.ok and res.checked > 0
    I = identity_field(mod)
    assert all(op.is_zero_on_window() for op in D_z(I).comps.values())


def test_propagator_cross_check():
    mod = module("even", 2, -third, 2)
    d = mod.tp.dim
    total = 0
    for g in range(d):
        for h in range(d):
            res = propagator_check(mod, unit(mod, g), unit(mod, h))
            assert res.ok, res.failures[:2]
            total += res.checked
    assert total > 0


def test_empty_window_is_reported():
    mod = module("even", 1, -half, 1)
    A = mod.mode(0, 1, -mpq(3, 2))
    with pytest.raises(WindowError):
        A.commutator(A)
