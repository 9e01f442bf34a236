from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wildforms.exactnum import FpElement
from wildforms.qseries import (
    ArtinSchreierError,
    EtaQuotientError,
    NotInSpan,
    NotPthPower,
    PrecisionError,
    QExpansion,
    RingMismatch,
    artin_schreier_solve,
    delta,
    echelonize,
    eisenstein,
    eta_quotient,
    express,
    hecke,
    pth_root,
    reduce_mod_p,
    series_inverse,
    series_mul,
    sturm_bound,
    theta,
    v_operator,
)

TAU = [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643]


def fp_series(p, max_prec=30):
    return st.lists(st.integers(0, p - 1), min_size=2, max_size=max_prec).map(lambda c: QExpansion(tuple(c), p))


def test_eisenstein_and_delta():
    assert eisenstein(4, 3).coeffs == (1, 240, 2160, 6720)
    assert eisenstein(6, 2).coeffs == (1, -504, -16632)
    assert list(delta(9).coeffs) == TAU
    e4, e6 = eisenstein(4, 9), eisenstein(6, 9)
    assert (e4**3 - e6**2).scale(Fraction(1, 1728)) == delta(9)


def test_eta_quotient_level_11():
    f = eta_quotient({1: 2, 11: 2}, 12, level=11, weight=2)
    # the newform attached to the elliptic curve 11a
    assert [f[n] for n in range(1, 8)] == [1, -2, -1, 2, 1, 2, -2]
    with pytest.raises(EtaQuotientError):
        eta_quotient({1: 1, 11: 1}, 10, level=11, weight=2)


def test_hecke_on_delta_is_eigen():
    big = delta(40)
    for ell in (2, 3, 5):
        assert hecke(big, ell, 12, 1, out_prec=7) == delta(7).scale(TAU[ell])


def test_theta_and_v_operator():
    f = QExpansion((1, 2, 3, 4), 0)
    assert theta(f).coeffs == (0, 2, 6, 12)
    assert v_operator(f, 2).coeffs == (1, 0, 2, 0, 3, 0, 4, 0)[: v_operator(f, 2).prec + 1]


def test_series_inverse():
    e4 = eisenstein(4, 20)
    assert (e4 * series_inverse(e4)) == QExpansion.constant(1, 20)
    with pytest.raises(ZeroDivisionError):
        series_inverse(delta(5))


def test_reduction_and_ring_tags():
    e4 = eisenstein(4, 30)
    assert reduce_mod_p(e4, 5).coeffs == tuple(int(c) % 5 for c in e4.coeffs)
    with pytest.raises(RingMismatch):
        reduce_mod_p(e4, 2) + reduce_mod_p(e4, 3)
    with pytest.raises(PrecisionError):
        e4.truncate(40)
    with pytest.raises(PrecisionError):
        QExpansion((), 2)


def test_pth_root():
    f = QExpansion.from_dict({0: 1, 3: 2, 6: 1}, 9, 3)
    assert pth_root(f) == QExpansion.from_dict({0: 1, 1: 2, 2: 1}, 3, 3)
    with pytest.raises(NotPthPower):
        pth_root(QExpansion.from_dict({1: 1}, 6, 3))


def test_artin_schreier_level_five_example():
    # y^2 + y = f over F_2 with s = 1
    y = QExpansion.from_dict({1: 1, 2: 1, 4: 1, 5: 1, 8: 1}, 9, 2)
    one = QExpansion.constant(1, 9, 2)
    f = y * y + y
    assert artin_schreier_solve(2, one, f) == y
    assert artin_schreier_solve(2, one, f, b0=1) == y + one


def test_artin_schreier_obstruction():
    one = QExpansion.constant(1, 6, 2)
    with pytest.raises(ArtinSchreierError):
        artin_schreier_solve(2, one, QExpansion.constant(1, 6, 2))


def test_echelon_and_express():
    p = 3
    rows = [
        QExpansion.from_dict({0: 1, 2: 1}, 5, p),
        QExpansion.from_dict({1: 1, 2: 2}, 5, p),
        QExpansion.from_dict({0: 1, 1: 1}, 5, p),
    ]
    basis = echelonize(rows)
    assert basis.rank == 2
    assert basis.pivots == (0, 1)
    target = rows[0].scale(2) + rows[1]
    coords = express(target, basis)
    total = QExpansion.zero(5, p)
    for c, r in zip(coords, rows):
        total = total + r.scale(c)
    assert total == target
    with pytest.raises(NotInSpan):
        express(QExpansion.from_dict({3: 1}, 5, p), basis)


def test_sturm_bound():
    assert sturm_bound(12, 1) == 1
    assert sturm_bound(2, 11) == 2
    assert sturm_bound(4, 65) == 28


@given(fp_series(5), fp_series(5), fp_series(5))
def test_multiplication_is_associative_and_commutative(f, g, h):
    assert series_mul(f, g) == series_mul(g, f)
    assert series_mul(series_mul(f, g), h) == series_mul(f, series_mul(g, h))


@given(fp_series(3), fp_series(3), fp_series(3))
def test_multiplication_distributes(f, g, h):
    assert f * (g + h) == f * g + f * h


@given(st.lists(st.integers(-50, 50), min_size=2, max_size=25), st.lists(st.integers(-50, 50), min_size=2, max_size=25))
def test_rational_product_matches_schoolbook(a, b):
    f, g = QExpansion(tuple(a), 0), QExpansion(tuple(b), 0)
    n = min(len(a), len(b))
    naive = [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]
    assert series_mul(f, g).coeffs == tuple(Fraction(x) for x in naive)


@given(st.sampled_from([2, 3, 5]), st.data())
def test_pth_root_round_trip(p, data):
    f = data.draw(fp_series(p, 12))
    assert pth_root(f**p).agrees_with(f, (f**p).prec // p)


@settings(max_examples=50)
@given(st.sampled_from([2, 3]), st.data())
def test_artin_schreier_solutions_differ_by_multiples_of_s(p, data):
    y = data.draw(fp_series(p, 16))
    s = QExpansion.constant(1, y.prec, p)
    f = y**p - (s ** (p - 1)) * y
    sols = [artin_schreier_solve(p, s, f, b0) for b0 in range(p)]
    for sol in sols:
        assert sol**p - (s ** (p - 1)) * sol == f
        diff = sol - y
        assert diff == s.scale(FpElement(diff[0], p))
