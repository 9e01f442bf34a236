import pytest
from sympy import primerange

from support import PRINTED, full_space, large_ring, lift, lifted_span, ring
from wildforms.ethereal import (
    HASSE,
    Generator,
    build_presentation,
    ethereal_representatives,
    find_frobenius_combinations,
    oldform_scan,
    verify_as_relation,
    working_precision,
)
from wildforms.modcurve import dim_modp, ethereal_report
from wildforms.qseries import PrecisionError, QExpansion, echelonize, sturm_bound

SMALL = [(5, 2), (7, 3), (13, 2), (13, 3), (1, 2), (1, 3)]


def _cases():
    return [ring(n, p, 12, 40) for n, p in SMALL] + [large_ring(65, 2), large_ring(91, 3)]


@pytest.fixture(scope="module")
def presentations():
    return _cases()


def test_monomials_span_each_weight(presentations):
    for pres in presentations:
        top = max(pres.dimensions)
        for w in range(2, top + 1, 2):
            evals = [pres.evaluate_monomial(m) for m in pres.monomials.get(w, ())]
            rank = echelonize(evals).rank if evals else 0
            assert rank == dim_modp(pres.level, pres.characteristic, w), (pres.level, w)


def test_relations_vanish(presentations):
    for pres in presentations:
        for rel in pres.relations:
            assert pres.evaluate(rel).is_zero()


def test_ethereal_generators_are_not_reductions(presentations):
    for pres in presentations:
        n, p, t = pres.level, pres.characteristic, pres.precision
        for g in pres.ethereal_generators():
            if g.provenance == HASSE:
                continue
            assert t >= sturm_bound(g.weight, n)
            assert not lifted_span(n, p, g.weight, t).contains(g.expansion)
        count = sum(1 for g in pres.generators if g.weight == 2 and g.ethereal)
        assert count == ethereal_report(n, p).count


def test_stable_under_more_precision():
    for n, p in [(7, 3), (13, 2)]:
        low, high = build_presentation(n, p, 10, 30), build_presentation(n, p, 10, 50)
        assert low.generator_weights == high.generator_weights
        assert low.relation_weights == high.relation_weights
        for a, b in zip(low.generators, high.generators):
            assert b.expansion.agrees_with(a.expansion, 30)


def test_names_follow_weights_and_kinds():
    pres = ring(13, 2, 12, 40)
    assert pres.names == ["x2", "y2", "x4_1", "x4_2", "x6_1", "x6_2"]
    assert ring(1, 2, 12, 40).generator("y2").provenance == HASSE


def test_working_precision_respects_sturm():
    assert working_precision(13, 12) >= sturm_bound(12, 13)
    assert working_precision(5, 4, 100) == 100


def test_frobenius_combination_at_level_5():
    t = 40
    span = lifted_span(5, 2, 4, t)
    roots = find_frobenius_combinations(span, 2)
    reductions = lifted_span(5, 2, 2, t // 2)
    roots_span = echelonize(list(reductions.rows) + [r.root for r in roots])
    assert roots_span.rank == full_space(5, 2, 2, t // 2).rank == 2


def test_artin_schreier_relation_check():
    t = 40
    pres = ring(5, 2, 12, t)
    y, s = pres.generator("y2"), pres.generator("x2")
    coords = verify_as_relation(y, s, lifted_span(5, 2, 4, t), 2, level=5)
    assert coords is not None
    not_root = Generator(2, pres.generator("x2").expansion + QExpansion.from_dict({1: 1}, t, 2), True, "z", "test")
    assert verify_as_relation(not_root, s, lifted_span(5, 2, 4, t), 2) is None
    coarse = echelonize([r.truncate(1) for r in lifted_span(5, 2, 4, t).rows], 1)
    with pytest.raises(PrecisionError):
        verify_as_relation(y, s, coarse, 2, level=5)


def test_representatives_complete_the_span():
    t = 60
    full, lifted = full_space(65, 2, 2, t), lifted_span(65, 2, 2, t)
    reps = ethereal_representatives(full, lifted)
    assert len(reps) == 2
    assert echelonize(list(lifted.rows) + reps).rank == full.rank


def test_level7_printed_weight6_basis():
    t = 40
    d = PRINTED[(7, 3)]
    x2 = lift(d["x2"], full_space(7, 3, 2, t))
    y2 = QExpansion.constant(1, t, 3)
    h1, h3, h4 = (lift(d[k], full_space(7, 3, 6, t)) for k in ("h1", "h3", "h4"))
    x6 = h4
    assert h1 == (x2**3).scale(2) + x2 * y2 * y2 + x6.scale(2)
    assert h3 == x2**3 + (y2**3).scale(2)
    # the printed h2 is consistent with some weight-6 form
    lift(d["h2"], full_space(7, 3, 6, t))


def test_level13_char2_printed_bases():
    t = 40
    d = PRINTED[(13, 2)]
    x2 = QExpansion.constant(1, t, 2)
    y2 = lift(d["y2"], full_space(13, 2, 2, t))
    f = {k: lift(d[k], full_space(13, 2, 4, t)) for k in ("f1", "f2", "f3", "f4")}
    h = {k: lift(d[k], full_space(13, 2, 6, t)) for k in ("h1", "h2", "h3", "h4", "h5", "h6")}
    x4, y4, x6, y6 = f["f3"], f["f4"], h["h5"], h["h6"]
    assert f["f2"] + f["f4"] == y2 * y2
    assert f["f1"] == y2 * y2 + x2 * y2
    assert h["h1"] == x2 * x2 * y2 + x2 * y2 * y2
    assert h["h2"] == x2 * y2 * y2 + x2 * y4 + x6 + y6
    assert h["h3"] == x2 * x4 + x6 + y6
    assert h["h4"] == x2 * y4 + x6 + y6
    assert y2.agrees_with(ring(13, 2, 12, t).generator("y2").expansion)


def test_level65_weight4_identity():
    t = 120
    d = PRINTED[(65, 2)]
    x10 = lift(d["x10"], full_space(65, 2, 2, t))
    h1 = lift(d["h1"], lifted_span(65, 2, 4, t))
    h2 = lift(d["h2"], lifted_span(65, 2, 4, t))
    assert h1 + h2 == x10 * x10
    x9 = large_ring(65, 2).generator("y2_2").expansion
    assert (x9 * x9 + x9).agrees_with(d["g"])


def test_oldform_scan_needs_precision():
    with pytest.raises(PrecisionError):
        oldform_scan(QExpansion.from_dict({13: 1}, 10, 2), 65, 2, weight=2)
    assert oldform_scan(ring(5, 2, 12, 40).generator("y2"), 5, 2) is None


def test_level5_ethereal_prime_coefficients_vanish():
    # non-gating diagnostic: a_l(y2) = 0 for primes l < 500 other than 2 and 5
    y2 = build_presentation(5, 2, 4, 500).generator("y2").expansion
    assert [ell for ell in primerange(2, 500) if y2[ell]] == [2, 5]
