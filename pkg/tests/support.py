"""Shared helpers: printed q-expansions, lifting into computed spaces, cached rings."""

from __future__ import annotations

from functools import lru_cache

from wildforms.ethereal import build_presentation, modp_space, reduced_space
from wildforms.qseries import EchelonBasis, NotInSpan, QExpansion, echelonize, express

# Precision used for the two large levels; weight 8 caps the presentation search there.
LARGE_PREC = 120
LARGE_MAX_WEIGHT = 8


def series(terms: dict[int, int], big_o: int, p: int) -> QExpansion:
    """sum c q^n + O(q^big_o) over F_p."""
    return QExpansion.from_dict(terms, big_o - 1, p)


def ones(exponents, big_o: int, p: int) -> QExpansion:
    return series({n: 1 for n in exponents}, big_o, p)


class LiftError(AssertionError):
    pass


def lift(printed: QExpansion, space: EchelonBasis) -> QExpansion:
    """The unique element of ``space`` whose coefficients agree with ``printed``.

    Uniqueness needs the truncation map to stay injective at the printed
    precision; both that and existence are checked.
    """
    upto = printed.prec
    short = echelonize([row.truncate(upto) for row in space.rows], upto)
    if short.rank != space.rank:
        raise LiftError(f"q^0..q^{upto} do not separate the {space.rank}-dimensional space")
    try:
        coords = express(printed, short)
    except NotInSpan as exc:
        raise LiftError(f"printed expansion is not in the space ({exc})") from None
    out = QExpansion.zero(space.prec, space.modulus)
    for c, row in zip(coords, space.rows):
        if c.residue:
            out = out + row.scale(c)
    return out


@lru_cache(maxsize=None)
def ring(n: int, p: int, max_weight: int = 12, t: int | None = None, odd: bool = False):
    return build_presentation(n, p, max_weight, t, odd=odd)


def large_ring(n: int, p: int):
    return ring(n, p, LARGE_MAX_WEIGHT, LARGE_PREC)


@lru_cache(maxsize=None)
def full_space(n: int, p: int, k: int, t: int) -> EchelonBasis:
    return modp_space(n, p, k, t)


@lru_cache(maxsize=None)
def lifted_span(n: int, p: int, k: int, t: int) -> EchelonBasis:
    return reduced_space(n, k, p, t)


# Expansions as printed for the worked examples; keys are (level, p).
PRINTED = {
    (5, 2): {
        "y2": ones([1, 2, 4, 5, 8, 9, 10, 16, 18, 20], 25, 2),
    },
    (7, 3): {
        "x2": series({0: 1, 1: 1, 3: 1, 4: 1, 7: 1, 9: 1, 12: 1, 13: 2, 16: 1, 19: 2}, 21, 3),
        "f2": series({1: 1, 3: 1, 4: 1, 7: 1, 9: 1, 12: 1, 13: 2, 16: 1, 19: 2}, 21, 3),
        "f3": series(
            {2: 1, 4: 2, 5: 2, 6: 1, 7: 2, 10: 1, 11: 2, 12: 2, 13: 1, 14: 2, 15: 2, 16: 2, 18: 1, 19: 1, 20: 1},
            21,
            3,
        ),
        "h1": series({1: 1, 5: 1, 6: 1, 8: 1, 10: 1, 12: 2, 14: 1, 15: 2, 17: 1, 18: 1}, 21, 3),
        "h2": series({2: 1, 5: 1, 8: 2, 11: 2, 14: 1, 17: 2, 20: 1}, 23, 3),
        "h3": ones([3, 9, 12], 21, 3),
        "h4": series(
            {4: 1, 5: 2, 6: 2, 7: 1, 8: 2, 10: 2, 12: 1, 13: 2, 14: 2, 15: 1, 16: 1, 17: 2, 18: 2, 19: 2},
            21,
            3,
        ),
    },
    (13, 2): {
        "y2": ones([1, 2, 4, 8, 9, 13, 16, 18], 25, 2),
        "f1": ones([1, 9, 13], 25, 2),
        "f2": ones([2, 5, 6, 7, 8, 13, 15, 20], 21, 2),
        "f3": ones([3, 5, 6, 7, 9, 10, 12, 14, 15, 17, 18, 20], 21, 2),
        "f4": ones([4, 5, 6, 7, 13, 15, 16, 18, 20], 21, 2),
        "h1": ones([1, 9, 13], 25, 2),
        "h2": ones([2, 8, 10, 12, 14, 18], 30, 2),
        "h3": ones([3, 9, 13, 17], 25, 2),
        "h4": ones([4, 10, 12, 14, 16], 26, 2),
        "h5": ones([5, 7, 13, 15], 21, 2),
        "h6": ones([6, 10, 12, 14, 18, 20], 24, 2),
    },
    (13, 3): {
        "f1": series({1: 1, 5: 1, 6: 2, 7: 1, 9: 1, 10: 2, 11: 1, 12: 1, 15: 2, 16: 1, 17: 2}, 21, 3),
        "f2": series(
            {2: 1, 6: 1, 7: 2, 10: 1, 11: 2, 13: 2, 14: 2, 16: 1, 17: 1, 18: 1, 19: 2, 20: 1},
            21,
            3,
        ),
        "f3": series({3: 1, 5: 1, 6: 1, 7: 1, 8: 2, 11: 1, 12: 2, 14: 1, 16: 1, 17: 1}, 24, 3),
        "f4": series({4: 1, 5: 1, 8: 1, 10: 1, 11: 1, 12: 1, 13: 1, 14: 2, 15: 1, 16: 2, 19: 2}, 23, 3),
    },
    (65, 2): {
        "x9": ones([13, 26, 52, 65], 104, 2),
        "g": ones([13, 65], 117, 2),
        "h1": ones([8, 23, 28, 31, 33, 36, 46], 53, 2),
        "h2": ones([12, 23, 24, 30, 31, 33, 34, 38, 40, 42], 50, 2),
        "x10": ones([4, 6, 12, 14, 15, 17, 18, 19, 20, 21], 23, 2),
    },
    (91, 3): {
        "x11": ones([7, 21], 28, 3),
        "x12": series({1: 1, 2: 2, 5: 1, 17: 2, 18: 2, 19: 2, 21: 2, 22: 1, 23: 2, 24: 2}, 27, 3),
    },
}
