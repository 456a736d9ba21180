from gmpy2 import mpq

from twistlog import linalg as la
from twistlog.delta import delta_from_representative, shifted_delta
from twistlog.twist import build_even_block, build_odd_block

third = mpq(-1, 3)


def test_plain_delta():
    d = shifted_delta(0, build_odd_block(1, 0), -3, 3)
    assert sorted((p1, p2) for p1, _, p2, _ in d.terms) == sorted((-n - 1, n) for n in range(-3, 4))
    assert all(c == la.identity(1) for c in d.terms.values())
    assert all(k1 == k2 == 0 for _, k1, _, k2 in d.terms)


def test_z12_annihilates_interior():
    for tp, al in ((build_even_block(2, third), third), (build_odd_block(3, mpq(-1, 2)), mpq(-1, 2))):
        d = shifted_delta(al, tp, -6, 6)
        z = d.times_z12()
        assert z.terms and not z.interior()


def test_representative_independence():
    tp = build_even_block(2, third)
    a = delta_from_representative(third, tp, -4, 4)
    b = delta_from_representative(third + 1, tp, -5, 3)
    assert a == b
    assert a.terms == shifted_delta(third, tp, third - 4, third + 4).terms


def test_log_factor():
    tp = build_even_block(2, third)
    d = shifted_delta(third, tp, third, third)
    # e^{(zeta2 - zeta1) N} with N^2 = 0: zeta1 and zeta2 terms carry -N and +N
    assert d.terms[(-third - 1, 1, third, 0)] == la.matscale(-1, tp.N)
    assert d.terms[(-third - 1, 0, third, 1)] == tp.N
