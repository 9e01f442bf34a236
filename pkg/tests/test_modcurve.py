from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wildforms.charzero import dimension_M
from wildforms.errors import PreconditionError
from wildforms.modcurve import (
    CONSERVATION_NOTE,
    dim_modp,
    epsilon_prime,
    ethereal_report,
    stacky_model,
)


def hilbert_coefficients(gen_weights, rel_weights, top):
    """Coefficients of prod(1 - t^r) / prod(1 - t^g) through t^top."""
    series = [1] + [0] * top
    for g in gen_weights:
        for k in range(g, top + 1):
            series[k] += series[k - g]
    for r in rel_weights:
        for k in range(top, r - 1, -1):
            series[k] -= series[k - r]
    return series


def test_census_level_65_char_2():
    model = stacky_model(65, 2)
    assert model.census() == "2 wild order-2 (jump 1), 0 mu2, 0 mu3"
    assert all(pt.note == CONSERVATION_NOTE for pt in model.wild_points())
    assert model.log_canonical.degree == 14


def test_census_level_13():
    assert stacky_model(13, 2).census() == "1 wild order-2 (jump 1), 0 mu2, 2 mu3"
    assert stacky_model(13, 3).census() == "1 wild order-3 (jump 1), 2 mu2, 0 mu3"
    assert stacky_model(13, 0).census() == "2 mu2, 2 mu3"
    assert stacky_model(13, 7).characteristic == 0


def test_level_one_wild_point():
    for p in (2, 3):
        (pt,) = stacky_model(1, p).points
        assert pt.coefficient == Fraction(7, 6)


def test_epsilon_prime():
    assert epsilon_prime(65, 2) == (2, 0)
    assert epsilon_prime(91, 3) == (0, 2)
    assert epsilon_prime(13, 2) == (1, 2)
    with pytest.raises(PreconditionError):
        epsilon_prime(1, 2)


def test_dimensions_level_5_char_2():
    # polynomial ring on two weight-2 generators
    h = hilbert_coefficients([2, 2], [], 40)
    assert all(dim_modp(5, 2, k) == h[k] for k in range(0, 41, 2))


def test_dimensions_level_7_char_3():
    # generators in weights 2, 2, 6 with one relation in weight 8
    h = hilbert_coefficients([2, 2, 6], [8], 40)
    assert all(dim_modp(7, 3, k) == h[k] for k in range(0, 41, 2))


def test_odd_weight_support():
    assert dim_modp(1, 2, 13) == 2
    with pytest.raises(PreconditionError):
        dim_modp(5, 2, 3)


def test_preconditions():
    with pytest.raises(PreconditionError):
        stacky_model(5, 5)
    with pytest.raises(PreconditionError):
        stacky_model(0, 2)
    with pytest.raises(PreconditionError):
        ethereal_report(7, 5)


@given(st.integers(1, 300), st.sampled_from([0, 2, 3, 5]), st.integers(1, 10))
def test_modp_dimension_dominates(n, p, half):
    if p and n % p == 0:
        return
    k = 2 * half
    d = dim_modp(n, p, k)
    assert d >= dimension_M(n, k)
    if p in (0, 5):
        assert d == dimension_M(n, k)


def test_ethereal_reports():
    rep = ethereal_report(65, 2)
    assert rep.exists and rep.count == 2
    rep = ethereal_report(11, 2)
    assert not rep.exists and rep.count == 0
    assert ethereal_report(1, 3).count == 1
