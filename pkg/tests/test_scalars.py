import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from twistlog.scalars import (ConductorError, Scalar, ZetaPoly, as_q, binom_rational,
                              cyclotomic_polynomial, default_conductor, root_of_unity, shift_zeta)

M = 12
rationals = st.fractions(max_denominator=20).map(lambda f: mpq(f.numerator, f.denominator))
exponents = st.integers(-60, 60).map(lambda n: mpq(n, M))


def cyclo(coeffs):
    return Scalar(M, [coeffs])


cyclotomics = st.lists(rationals, min_size=4, max_size=4).map(cyclo)
scalars = st.lists(st.lists(rationals, min_size=4, max_size=4), min_size=0, max_size=3).map(
    lambda cs: Scalar(M, cs))


@pytest.mark.parametrize("m, j, expected", [
    (mpq(-1, 2), 2, mpq(3, 8)),
    (mpq(7, 3), 0, mpq(1)),
    (5, 2, mpq(10)),
    (mpq(-1, 3), 2, mpq(2, 9)),
])
def test_binom_rational(m, j, expected):
    assert binom_rational(m, j) == expected


def test_binom_rejects_negative_j():
    with pytest.raises(ValueError):
        binom_rational(1, -1)


def test_roots_of_unity_examples():
    assert root_of_unity(0, M) == 1
    assert root_of_unity(mpq(1, 2), M) == -1
    i = root_of_unity(mpq(1, 4), M)
    assert i * i == -1 and i != 1 and i != -1
    assert root_of_unity(1, M) == 1


def test_root_of_unity_conductor_mismatch():
    with pytest.raises(ConductorError):
        root_of_unity(mpq(1, 5), M)
    with pytest.raises(ConductorError):
        Scalar.rational(6, 1)


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(12) == (1, 0, -1, 0, 1)
    # omega_M is a root of Phi_M and a primitive M-th root
    w = Scalar.omega(M)
    assert w ** M == 1 and all(w ** k != 1 for k in range(1, M))


def test_default_conductor():
    assert default_conductor([2]) == 4
    assert default_conductor([3, 1]) == 12
    assert default_conductor([6, 5]) == 60
    assert isinstance(default_conductor([3]), int)


def test_tau_is_formal():
    tau = Scalar.tau(M)
    assert tau != Scalar.rational(M, 0)
    assert (tau * tau).tau_degree == 2
    assert not tau.is_rational()
    assert (tau - tau) == 0


def test_as_q_rejects_floats_and_bad_strings():
    with pytest.raises(TypeError):
        as_q(0.5)
    with pytest.raises(ZeroDivisionError):
        as_q("1/0")
    assert as_q("-7/21") == mpq(-1, 3)


@given(cyclotomics, cyclotomics, cyclotomics)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    if a:
        assert a * a.inverse() == 1


@given(scalars, scalars)
def test_tau_polynomial_ring(a, b):
    assert (a + b) - b == a
    assert (a * b).tau_degree == (-1 if not (a and b) else a.tau_degree + b.tau_degree)


@given(exponents, exponents)
def test_root_of_unity_multiplicative(m1, m2):
    assert root_of_unity(m1, M) * root_of_unity(m2, M) == root_of_unity(m1 + m2, M)


def test_shift_zeta_examples():
    tau = Scalar.tau(M)
    assert shift_zeta(ZetaPoly([0, 0, 1]), tau) == ZetaPoly([tau * tau, 2 * tau, 1])
    assert shift_zeta(ZetaPoly([1]), tau) == ZetaPoly([1])
    assert shift_zeta(ZetaPoly([0, 1]), tau) == ZetaPoly([tau, 1])


@given(st.lists(rationals, max_size=6), rationals)
def test_shift_zeta_inverse(coeffs, s):
    p = ZetaPoly(coeffs)
    q = shift_zeta(p, s)
    assert shift_zeta(q, -s) == p
    assert q.degree == p.degree


@given(st.lists(rationals, max_size=5), rationals, rationals)
def test_shift_zeta_evaluates(coeffs, s, x):
    p = ZetaPoly(coeffs)
    assert shift_zeta(p, s)(x) == p(x + s)
