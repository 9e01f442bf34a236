"""Truncated q-expansions and the operations the pipeline needs on them.

A :class:`QExpansion` stores coefficients of q^0 .. q^t together with the
precision t.  Over Q the coefficients are Fractions; over F_p they are plain
ints in [0, p).  Every binary operation returns the smaller of the two
precisions, so no coefficient is ever fabricated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _fplinalg
from .errors import PreconditionError
from .exactnum import FpElement, bernoulli, dedekind_psi, divisors, to_fp

__all__ = [
    "QExpansion",
    "EchelonBasis",
    "RingMismatch",
    "PrecisionError",
    "NotPthPower",
    "ArtinSchreierError",
    "NotInSpan",
    "EtaQuotientError",
    "series_mul",
    "eisenstein",
    "delta",
    "eta_quotient",
    "ligozat_orders",
    "v_operator",
    "hecke",
    "theta",
    "series_inverse",
    "reduce_mod_p",
    "pth_root",
    "artin_schreier_solve",
    "echelonize",
    "express",
    "sturm_bound",
    "poly_mul",
]


class RingMismatch(PreconditionError):
    pass


class PrecisionError(PreconditionError):
    pass


class NotPthPower(ValueError):
    def __init__(self, exponent: int):
        super().__init__(f"not a p-th power: nonzero coefficient at q^{exponent}")
        self.exponent = exponent


class ArtinSchreierError(ValueError):
    pass


class NotInSpan(ValueError):
    def __init__(self, exponent: int):
        super().__init__(f"not in span: residual has leading exponent {exponent}")
        self.exponent = exponent


class EtaQuotientError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Polynomial multiplication by Kronecker substitution


def _pack(coeffs: Sequence[int], width: int) -> int:
    nbytes = width // 8
    return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little")


def _unpack(value: int, width: int, count: int) -> list[int]:
    nbytes = width // 8
    raw = value.to_bytes(nbytes * count + nbytes, "little")
    return [int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") for i in range(count)]


def _mul_nonneg(a: Sequence[int], b: Sequence[int], n: int, bound: int) -> list[int]:
    width = (bound.bit_length() // 8 + 1) * 8
    prod = _pack(a[:n], width) * _pack(b[:n], width)
    if prod == 0:
        return [0] * n
    return _unpack(prod & ((1 << (width * n)) - 1), width, n)


def poly_mul(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    """First ``n`` coefficients of the product of two integer polynomials."""
    a = list(a[:n])
    b = list(b[:n])
    if not any(a) or not any(b):
        return [0] * n
    amax = max(abs(x) for x in a)
    bmax = max(abs(x) for x in b)
    bound = min(len(a), len(b)) * amax * bmax
    if min(a) >= 0 and min(b) >= 0:
        return _mul_nonneg(a, b, n, bound)
    ap = [max(x, 0) for x in a]
    an = [max(-x, 0) for x in a]
    bp = [max(x, 0) for x in b]
    bn = [max(-x, 0) for x in b]
    plus = [x + y for x, y in zip(_mul_nonneg(ap, bp, n, bound), _mul_nonneg(an, bn, n, bound))]
    minus = [x + y for x, y in zip(_mul_nonneg(ap, bn, n, bound), _mul_nonneg(an, bp, n, bound))]
    return [x - y for x, y in zip(plus, minus)]


def _common_denominator(coeffs: Iterable[Fraction]) -> int:
    den = 1
    for c in coeffs:
        d = c.denominator
        if d != 1:
            den = den * d // math.gcd(den, d)
    return den


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QExpansion:
    """Truncated power series sum_{n<=prec} a_n q^n over Q (modulus 0) or F_p."""

    coeffs: tuple
    modulus: int = 0
    _hash: int | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise PrecisionError("a q-expansion needs at least the constant term")
        if self.modulus:
            p = self.modulus
            object.__setattr__(
                self, "coeffs", tuple(to_fp(c, p) if isinstance(c, Fraction) else int(c) % p for c in self.coeffs)
            )
        else:
            object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    # construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, terms: Mapping[int, object], prec: int, modulus: int = 0) -> QExpansion:
        coeffs = [0] * (prec + 1)
        for n, c in terms.items():
            if 0 <= n <= prec:
                coeffs[n] = c
        return cls(tuple(coeffs), modulus)

    @classmethod
    def from_exponents(cls, exponents: Iterable[int], prec: int, modulus: int = 0) -> QExpansion:
        """Sum of q^n over the listed exponents (each with coefficient 1)."""
        return cls.from_dict({n: 1 for n in exponents}, prec, modulus)

    @classmethod
    def constant(cls, value, prec: int, modulus: int = 0) -> QExpansion:
        return cls.from_dict({0: value}, prec, modulus)

    @classmethod
    def zero(cls, prec: int, modulus: int = 0) -> QExpansion:
        return cls((0,) * (prec + 1), modulus)

    # basic accessors ----------------------------------------------------
    @property
    def prec(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int):
        return self.coeffs[n] if 0 <= n <= self.prec else 0

    def coefficient(self, n: int):
        """Coefficient as a Fraction or an :class:`FpElement`."""
        c = self.coeffs[n]
        return FpElement(c, self.modulus) if self.modulus else c

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def valuation(self) -> int | None:
        return next((n for n, c in enumerate(self.coeffs) if c), None)

    def support(self) -> list[int]:
        return [n for n, c in enumerate(self.coeffs) if c]

    def terms(self) -> dict[int, object]:
        return {n: c for n, c in enumerate(self.coeffs) if c}

    def truncate(self, prec: int) -> QExpansion:
        if prec > self.prec:
            raise PrecisionError(f"cannot extend precision {self.prec} to {prec}")
        return QExpansion(self.coeffs[: prec + 1], self.modulus)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: QExpansion) -> None:
        if self.modulus != other.modulus:
            raise RingMismatch(f"ring tags differ: {self.modulus} vs {other.modulus}")

    def _scalar(self, c):
        if isinstance(c, FpElement):
            if c.modulus != self.modulus:
                raise RingMismatch("scalar from a different field")
            return c.residue
        if self.modulus:
            return to_fp(Fraction(c), self.modulus)
        return Fraction(c)

    def __add__(self, other: QExpansion) -> QExpansion:
        self._check(other)
        n = min(len(self.coeffs), len(other.coeffs))
        return QExpansion(tuple(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])), self.modulus)

    def __sub__(self, other: QExpansion) -> QExpansion:
        self._check(other)
        n = min(len(self.coeffs), len(other.coeffs))
        return QExpansion(tuple(a - b for a, b in zip(self.coeffs[:n], other.coeffs[:n])), self.modulus)

    def __neg__(self) -> QExpansion:
        return QExpansion(tuple(-a for a in self.coeffs), self.modulus)

    def scale(self, c) -> QExpansion:
        c = self._scalar(c)
        return QExpansion(tuple(c * a for a in self.coeffs), self.modulus)

    def __mul__(self, other) -> QExpansion:
        if isinstance(other, QExpansion):
            return series_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> QExpansion:
        return self.scale(other)

    def __pow__(self, e: int) -> QExpansion:
        if e < 0:
            raise ValueError("negative powers are not supported")
        result = QExpansion.constant(1, self.prec, self.modulus)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QExpansion):
            return NotImplemented
        return self.modulus == other.modulus and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.coeffs, self.modulus)))
        return self._hash  # type: ignore[return-value]

    def agrees_with(self, other: QExpansion, upto: int | None = None) -> bool:
        """Coefficientwise equality through ``upto`` (default: common precision)."""
        self._check(other)
        n = min(self.prec, other.prec) if upto is None else upto
        if n > min(self.prec, other.prec):
            raise PrecisionError(f"comparison through q^{n} exceeds known precision")
        return self.coeffs[: n + 1] == other.coeffs[: n + 1]

    def __repr__(self) -> str:
        parts = []
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if n == 0 else ("q" if n == 1 else f"q^{n}")
            if n == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        body = " + ".join(parts) if parts else "0"
        ring = f"F_{self.modulus}" if self.modulus else "Q"
        return f"{body} + O(q^{self.prec + 1}) over {ring}"


def series_mul(f: QExpansion, g: QExpansion) -> QExpansion:
    f._check(g)
    n = min(len(f.coeffs), len(g.coeffs))
    if f.modulus:
        return QExpansion(tuple(poly_mul(f.coeffs, g.coeffs, n)), f.modulus)
    df = _common_denominator(f.coeffs[:n])
    dg = _common_denominator(g.coeffs[:n])
    a = [int(c * df) for c in f.coeffs[:n]]
    b = [int(c * dg) for c in g.coeffs[:n]]
    den = df * dg
    return QExpansion(tuple(Fraction(c, den) for c in poly_mul(a, b, n)), 0)


# ---------------------------------------------------------------------------
# Classical series


@lru_cache(maxsize=64)
def _sigma_table(power: int, t: int) -> tuple[int, ...]:
    sig = [0] * (t + 1)
    for d in range(1, t + 1):
        dp = d**power
        for m in range(d, t + 1, d):
            sig[m] += dp
    return tuple(sig)


def eisenstein(k: int, t: int) -> QExpansion:
    """Normalized Eisenstein series E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n."""
    if k < 2 or k % 2:
        raise ValueError("eisenstein needs an even weight k >= 2")
    const = -Fraction(2 * k) / bernoulli(k)
    sig = _sigma_table(k - 1, t)
    return QExpansion((Fraction(1),) + tuple(const * s for s in sig[1:]), 0)


def delta(t: int) -> QExpansion:
    """The discriminant cusp form (E4^3 - E6^2)/1728."""
    if t < 1:
        raise ValueError("delta needs precision >= 1")
    e4 = eisenstein(4, t)
    e6 = eisenstein(6, t)
    return (e4 * e4 * e4 - e6 * e6).scale(Fraction(1, 1728))


@lru_cache(maxsize=32)
def _euler_product(t: int) -> tuple[int, ...]:
    """prod_{n>=1} (1 - q^n) via the pentagonal number theorem."""
    coeffs = [0] * (t + 1)
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        hit = False
        for m in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2):
            if m <= t:
                coeffs[m] = sign
                hit = True
        if not hit:
            break
        k += 1
    return tuple(coeffs)


@lru_cache(maxsize=32)
def _partition_numbers(t: int) -> tuple[int, ...]:
    """1/prod(1 - q^n), i.e. partition counts, by Euler's recurrence."""
    euler = _euler_product(t)
    pent = [(m, -c) for m, c in enumerate(euler) if c and m]
    out = [1] + [0] * t
    for n in range(1, t + 1):
        out[n] = sum(c * out[n - m] for m, c in pent if m <= n)
    return tuple(out)


def _int_power(a: Sequence[int], e: int, n: int) -> list[int]:
    result = [1] + [0] * (n - 1)
    base = list(a[:n])
    while e:
        if e & 1:
            result = poly_mul(result, base, n)
        e >>= 1
        if e:
            base = poly_mul(base, base, n)
    return result


def ligozat_orders(exponents: Mapping[int, int], level: int) -> dict[int, Fraction]:
    """Order of vanishing of an eta quotient at the cusp 1/c for each c | level."""
    out = {}
    for c in divisors(level):
        total = sum(
            Fraction(math.gcd(c, d) ** 2 * r, math.gcd(c, level // c) * c * d)
            for d, r in exponents.items()
        )
        out[c] = Fraction(level, 24) * total
    return out


def eta_quotient(
    exponents: Mapping[int, int], t: int, level: int | None = None, weight: int | None = None
) -> QExpansion:
    """q-expansion of prod_d eta(q^d)^{r_d} to precision t.

    The Ligozat conditions for the given level are checked; violations raise
    :class:`EtaQuotientError`.  The resulting form may carry a quadratic
    character; see :func:`eta_character_is_trivial`.
    """
    exponents = {d: r for d, r in exponents.items() if r}
    if level is None:
        level = math.lcm(*exponents) if exponents else 1
    if any(level % d for d in exponents):
        raise EtaQuotientError("every eta argument must divide the level")
    total = sum(exponents.values())
    if total % 2:
        raise EtaQuotientError("half-integral weight is not supported")
    k = total // 2
    if weight is not None and weight != k:
        raise EtaQuotientError(f"exponents give weight {k}, not {weight}")
    if k < 0:
        raise EtaQuotientError("negative weight")
    lead = sum(d * r for d, r in exponents.items())
    if lead % 24:
        raise EtaQuotientError("leading exponent sum d*r_d/24 is not integral")
    if sum((level // d) * r for d, r in exponents.items()) % 24:
        raise EtaQuotientError("Ligozat condition sum (N/d) r_d = 0 mod 24 fails")
    orders = ligozat_orders(exponents, level)
    if any(v < 0 for v in orders.values()):
        raise EtaQuotientError("eta quotient has a pole at some cusp")
    shift = lead // 24
    n = t + 1 - shift
    series = [1] + [0] * (t)
    if n > 0:
        series = series[:n]
        for d, r in exponents.items():
            base = _euler_product(t) if r > 0 else _partition_numbers(t)
            dilated = [0] * n
            for m in range(0, (n - 1) // d + 1):
                dilated[m * d] = base[m]
            series = poly_mul(series, _int_power(dilated, abs(r), n), n)
    coeffs = [0] * (t + 1)
    for m in range(max(n, 0)):
        coeffs[m + shift] = series[m]
    return QExpansion(tuple(coeffs), 0)


def eta_character_is_trivial(exponents: Mapping[int, int]) -> bool:
    """True when prod d^{r_d} is a square and the weight is even."""
    num = 1
    for d, r in exponents.items():
        num *= d ** abs(r)
    weight = sum(exponents.values()) // 2
    return math.isqrt(num) ** 2 == num and weight % 2 == 0


# ---------------------------------------------------------------------------
# Operators


def v_operator(f: QExpansion, d: int) -> QExpansion:
    """f(q^d), truncated to the precision of f."""
    if d < 1:
        raise ValueError("V_d needs d >= 1")
    coeffs = [0] * (f.prec + 1)
    for m in range(f.prec // d + 1):
        coeffs[m * d] = f.coeffs[m]
    return QExpansion(tuple(coeffs), f.modulus)


def dilate_with_precision(f: QExpansion, d: int) -> QExpansion:
    """f(q^d) keeping every known coefficient (precision becomes d*prec + d - 1)."""
    coeffs = [0] * (d * (f.prec + 1))
    for m, c in enumerate(f.coeffs):
        coeffs[m * d] = c
    return QExpansion(tuple(coeffs), f.modulus)


def hecke(f: QExpansion, ell: int, k: int, level: int, out_prec: int | None = None) -> QExpansion:
    """T_ell on a weight-k form of level N (ell prime, not dividing N)."""
    if level % ell == 0:
        raise ValueError(f"T_{ell} is not defined here since {ell} divides the level")
    avail = f.prec // ell
    if out_prec is None:
        out_prec = avail
    if out_prec > avail:
        raise PrecisionError(f"T_{ell} to precision {out_prec} needs input precision {ell * out_prec}")
    factor = ell ** (k - 1)
    if f.modulus:
        factor %= f.modulus
    coeffs = []
    for n in range(out_prec + 1):
        c = f.coeffs[ell * n]
        if n % ell == 0:
            c = c + factor * f.coeffs[n // ell]
        coeffs.append(c)
    return QExpansion(tuple(coeffs), f.modulus)


def theta(f: QExpansion) -> QExpansion:
    """q d/dq."""
    return QExpansion(tuple(n * c for n, c in enumerate(f.coeffs)), f.modulus)


def series_inverse(f: QExpansion) -> QExpansion:
    """1/f for a series with invertible constant term."""
    c0 = f.coeffs[0]
    if not c0:
        raise ZeroDivisionError("constant term is not invertible")
    p = f.modulus
    inv0 = pow(c0, -1, p) if p else 1 / c0
    out = [inv0] + [0] * f.prec
    nz = [(i, c) for i, c in enumerate(f.coeffs) if c and i]
    for n in range(1, f.prec + 1):
        acc = 0
        for i, c in nz:
            if i > n:
                break
            acc += c * out[n - i]
        out[n] = -acc * inv0
        if p:
            out[n] %= p
    return QExpansion(tuple(out), p)


def reduce_mod_p(f: QExpansion, p: int) -> QExpansion:
    if f.modulus:
        raise RingMismatch("series is already over a finite field")
    try:
        return QExpansion(tuple(to_fp(c, p) for c in f.coeffs), p)
    except ZeroDivisionError as exc:
        raise ValueError(f"form is not {p}-integral: {exc}") from None


def pth_root(f: QExpansion) -> QExpansion:
    """g with g^p = f, valid through q^{floor(t/p)}; F_p coefficients are fixed by Frobenius."""
    p = f.modulus
    if not p:
        raise RingMismatch("pth_root needs a series over F_p")
    for n, c in enumerate(f.coeffs):
        if c and n % p:
            raise NotPthPower(n)
    return QExpansion(f.coeffs[:: p][: f.prec // p + 1], p)


def artin_schreier_solve(p: int, s: QExpansion, f: QExpansion, b0: int | FpElement = 0) -> QExpansion:
    """Solve y^p - s^{p-1} y = f over F_p with y_0 = b0.

    In characteristic 2 this is y^2 + s y = f.  The other solutions are
    y + c*s for c in F_p.  ``s == 0`` reduces to :func:`pth_root`.
    """
    if s.modulus != p or f.modulus != p:
        raise RingMismatch("Artin-Schreier data must live over F_p")
    b0 = b0.residue if isinstance(b0, FpElement) else int(b0) % p
    if s.is_zero():
        return pth_root(f)
    if s.coeffs[0] == 0:
        raise ArtinSchreierError("s must have a unit constant term")
    prec = min(s.prec, f.prec)
    u = (s.truncate(prec) ** (p - 1)).coeffs
    u0 = u[0]  # equals 1 since s_0 is a nonzero element of F_p
    if (pow(b0, p, p) - u0 * b0 - f.coeffs[0]) % p:
        raise ArtinSchreierError("constant terms are incompatible")
    inv = pow(u0, -1, p)
    y = [b0] + [0] * prec
    nz_u = [(i, c) for i, c in enumerate(u) if c and i]
    for n in range(1, prec + 1):
        acc = y[n // p] if n % p == 0 else 0
        acc -= f.coeffs[n]
        for i, c in nz_u:
            if i > n:
                break
            acc -= c * y[n - i]
        y[n] = acc * inv % p
    return QExpansion(tuple(y), p)


# ---------------------------------------------------------------------------
# Linear algebra over F_p


@dataclass(frozen=True, eq=False)
class EchelonBasis:
    """Reduced row echelon basis of a span of q-expansions over F_p.

    ``transform[i]`` expresses ``rows[i]`` in terms of the ``source`` rows
    handed to :func:`echelonize`.
    """

    rows: tuple[QExpansion, ...]
    pivots: tuple[int, ...]
    modulus: int
    prec: int
    transform: tuple[tuple[int, ...], ...] = ()
    source_count: int = 0

    @property
    def rank(self) -> int:
        return len(self.rows)

    def matrix(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.prec + 1), dtype=np.int64)
        return np.array([r.coeffs for r in self.rows], dtype=np.int64)

    def residual(self, target: QExpansion) -> QExpansion:
        """target minus its projection onto the span (zero iff in span)."""
        return _residual(target, self)[1]

    def contains(self, target: QExpansion) -> bool:
        return self.residual(target).is_zero()


def sturm_bound(k: int, level: int) -> int:
    """floor(k * psi(N) / 12)."""
    if k < 0 or level < 1:
        raise ValueError("sturm_bound needs k >= 0 and N >= 1")
    return k * dedekind_psi(level) // 12


def echelonize(rows: Sequence[QExpansion], prec: int | None = None) -> EchelonBasis:
    """Reduced row-echelon basis of the span (pivot = leading exponent)."""
    if not rows:
        raise ValueError("echelonize needs at least one row (or use empty_basis)")
    p = rows[0].modulus
    if not p:
        raise RingMismatch("echelonize works over F_p")
    if any(r.modulus != p for r in rows):
        raise RingMismatch("rows over different fields")
    if prec is None:
        prec = min(r.prec for r in rows)
    n = len(rows)
    mat = np.array([r.coeffs[: prec + 1] for r in rows], dtype=np.int64)
    aug = np.concatenate([mat, np.eye(n, dtype=np.int64)], axis=1)
    red, pivots = _fplinalg.rref_mod(aug, p)
    keep = [i for i, c in enumerate(pivots) if c <= prec]
    out_rows = tuple(QExpansion(tuple(int(x) for x in red[i, : prec + 1]), p) for i in keep)
    transform = tuple(tuple(int(x) for x in red[i, prec + 1 :]) for i in keep)
    return EchelonBasis(out_rows, tuple(pivots[i] for i in keep), p, prec, transform, n)


def empty_basis(p: int, prec: int) -> EchelonBasis:
    return EchelonBasis((), (), p, prec, (), 0)


def _residual(target: QExpansion, basis: EchelonBasis) -> tuple[list[int], QExpansion]:
    if target.modulus != basis.modulus:
        raise RingMismatch("target and basis live over different fields")
    p = basis.modulus
    prec = min(target.prec, basis.prec)
    res = list(target.coeffs[: prec + 1])
    coords = []
    for row, piv in zip(basis.rows, basis.pivots):
        c = res[piv] if piv <= prec else 0
        coords.append(c)
        if c:
            res = [(a - c * b) % p for a, b in zip(res, row.coeffs)]
    return coords, QExpansion(tuple(res), p)


def express(target: QExpansion, basis: EchelonBasis) -> list[FpElement]:
    """Coordinates of ``target`` in terms of the rows the basis was built from."""
    coords, res = _residual(target, basis)
    lead = res.valuation()
    if lead is not None:
        raise NotInSpan(lead)
    p = basis.modulus
    if not basis.transform:
        return [FpElement(c, p) for c in coords]
    out = [0] * basis.source_count
    for c, trow in zip(coords, basis.transform):
        if c:
            out = [(a + c * b) % p for a, b in zip(out, trow)]
    return [FpElement(c, p) for c in out]
