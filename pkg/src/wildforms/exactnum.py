"""Exact integer, rational and prime-field arithmetic.

Rationals are :class:`fractions.Fraction` throughout; the prime field is
modelled by :class:`FpElement`, which carries its modulus so that values
from different characteristics can never be combined by accident.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import bernoulli as _sym_bernoulli
from sympy import isprime
from sympy.functions.combinatorial.numbers import kronecker_symbol

Rational = Fraction
Factorization = tuple[tuple[int, int], ...]

__all__ = [
    "Rational",
    "Factorization",
    "FpElement",
    "ModulusMismatch",
    "factor",
    "prime_divisors",
    "divisors",
    "kronecker",
    "dedekind_psi",
    "euler_phi",
    "bernoulli",
    "bernoulli_poly",
    "generalized_bernoulli",
    "as_fraction",
    "to_fp",
]


class ModulusMismatch(ValueError):
    """Raised when field elements of different characteristics meet."""


@dataclass(frozen=True, slots=True)
class FpElement:
    residue: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 2 or not isprime(self.modulus):
            raise ValueError(f"modulus {self.modulus} is not prime")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def _coerce(self, other: object) -> int:
        if isinstance(other, FpElement):
            if other.modulus != self.modulus:
                raise ModulusMismatch(f"F_{self.modulus} vs F_{other.modulus}")
            return other.residue
        if isinstance(other, int):
            return other
        return NotImplemented  # type: ignore[return-value]

    def _make(self, value: int) -> FpElement:
        return FpElement(value, self.modulus)

    def __add__(self, other: object) -> FpElement:
        r = self._coerce(other)
        return NotImplemented if r is NotImplemented else self._make(self.residue + r)

    __radd__ = __add__

    def __sub__(self, other: object) -> FpElement:
        r = self._coerce(other)
        return NotImplemented if r is NotImplemented else self._make(self.residue - r)

    def __rsub__(self, other: object) -> FpElement:
        r = self._coerce(other)
        return NotImplemented if r is NotImplemented else self._make(r - self.residue)

    def __mul__(self, other: object) -> FpElement:
        r = self._coerce(other)
        return NotImplemented if r is NotImplemented else self._make(self.residue * r)

    __rmul__ = __mul__

    def __neg__(self) -> FpElement:
        return self._make(-self.residue)

    def inverse(self) -> FpElement:
        if self.residue == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return self._make(pow(self.residue, -1, self.modulus))

    def __truediv__(self, other: object) -> FpElement:
        r = self._coerce(other)
        if r is NotImplemented:
            return NotImplemented
        return self * self._make(r).inverse()

    def __pow__(self, exponent: int) -> FpElement:
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return self._make(pow(self.residue, exponent, self.modulus))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FpElement):
            return self.modulus == other.modulus and self.residue == other.residue
        if isinstance(other, int):
            return (other - self.residue) % self.modulus == 0
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.residue, self.modulus))

    def __bool__(self) -> bool:
        return self.residue != 0

    def __int__(self) -> int:
        return self.residue

    def __repr__(self) -> str:
        return f"{self.residue} (mod {self.modulus})"


def factor(n: int) -> Factorization:
    """Trial-division factorization, primes in increasing order."""
    if n < 1:
        raise ValueError("factor expects a positive integer")
    out: list[tuple[int, int]] = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factor(n)]


@lru_cache(maxsize=4096)
def divisors(n: int) -> tuple[int, ...]:
    """Positive divisors of ``n`` in increasing order."""
    divs = [1]
    for p, e in factor(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return tuple(sorted(divs))


def kronecker(a: int, n: int) -> int:
    if n == 0:
        raise ValueError("kronecker symbol needs n != 0")
    return int(kronecker_symbol(a, n))


def dedekind_psi(n: int) -> int:
    out = n
    for p, _ in factor(n):
        out = out // p * (p + 1)
    return out


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factor(n):
        out = out // p * (p - 1)
    return out


def as_fraction(value) -> Fraction:
    """Convert an int, Fraction or sympy rational to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(int(value.p), int(value.q))


@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Bernoulli number B_k with the convention B_1 = -1/2."""
    if k < 0:
        raise ValueError("Bernoulli index must be nonnegative")
    if k == 1:
        return Fraction(-1, 2)
    return as_fraction(_sym_bernoulli(k))


def bernoulli_poly(k: int, x: Fraction) -> Fraction:
    """Bernoulli polynomial B_k(x) = sum_j C(k, j) B_j x^(k-j)."""
    return sum((math.comb(k, j) * bernoulli(j) * x ** (k - j) for j in range(k + 1)), Fraction(0))


@lru_cache(maxsize=None)
def generalized_bernoulli(k: int, disc: int) -> Fraction:
    """B_{k,chi} for the quadratic character chi = (disc/.) of conductor |disc|.

    ``disc == 1`` gives the trivial character and ordinary B_k (with B_1 = +1/2
    for the trivial character, as in the generalized convention).
    """
    f = abs(disc)
    total = sum(
        (kronecker(disc, a) * bernoulli_poly(k, Fraction(a, f)) for a in range(1, f + 1)),
        Fraction(0),
    )
    return Fraction(f) ** (k - 1) * total


def to_fp(value: Fraction | int, p: int) -> int:
    """Residue of a p-integral rational modulo p."""
    if isinstance(value, int):
        return value % p
    if value.denominator % p == 0:
        raise ZeroDivisionError(f"denominator {value.denominator} divisible by {p}")
    return value.numerator * pow(value.denominator, -1, p) % p

