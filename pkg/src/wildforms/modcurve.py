"""Stacky models of the rigidified modular curves X_0(N) in characteristic 0, 2 and 3.

Weight k corresponds to the (k/2)-th power of the log canonical divisor K + Delta;
that factor of 2 is fixed here and every other module talks in modular weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .charzero import cusp_count, dimension_M, epsilon2, epsilon3, genus_X0
from .errors import InvariantBreach, PreconditionError
from .exactnum import prime_divisors
from .stacky import (
    PossiblySpecial,
    QDivisor,
    RefinedSignature,
    StackyPoint,
    canonical_divisor,
    floor_degree,
    h0,
    jump_by_euler_conservation,
    log_canonical_divisor,
    tame_point,
    wild_point,
)

__all__ = [
    "StackyModel",
    "EtherealReport",
    "CONSERVATION_NOTE",
    "effective_characteristic",
    "stacky_model",
    "epsilon_prime",
    "dim_modp",
    "dim_modp_odd_level1_char2",
    "ethereal_report",
]

CONSERVATION_NOTE = "derived via Euler-characteristic conservation"

_MU2 = Fraction(1, 2)
_MU3 = Fraction(2, 3)


def effective_characteristic(p: int) -> int:
    """Characteristics above 3 carry the same stacky data as characteristic 0."""
    if p < 0 or p == 1:
        raise PreconditionError(f"invalid characteristic {p}")
    return 0 if p > 3 else p


def _check_level(n: int, p: int) -> int:
    if n < 1:
        raise PreconditionError("level must be positive")
    q = effective_characteristic(p)
    if p and n % p == 0:
        raise PreconditionError(f"p = {p} divides N = {n}")
    return q


@dataclass(frozen=True)
class StackyModel:
    level: int
    characteristic: int
    genus: int
    cusps: int
    points: tuple[StackyPoint, ...]

    @property
    def canonical(self) -> QDivisor:
        return canonical_divisor(self.genus, self.points)

    @property
    def log_canonical(self) -> QDivisor:
        return log_canonical_divisor(self.genus, self.points, self.cusps)

    @property
    def signature(self) -> RefinedSignature:
        return RefinedSignature(self.genus, tuple(pt.coefficient for pt in self.points), self.cusps)

    def wild_points(self) -> tuple[StackyPoint, ...]:
        return tuple(pt for pt in self.points if not pt.tame)

    def tame_points(self) -> tuple[StackyPoint, ...]:
        return tuple(pt for pt in self.points if pt.tame)

    def census(self) -> str:
        wild = self.wild_points()
        tame = self.tame_points()
        parts = []
        if wild:
            orders = sorted({pt.order for pt in wild})
            for e in orders:
                pts = [pt for pt in wild if pt.order == e]
                parts.append(f"{len(pts)} wild order-{e} (jump {pts[0].jumps[0]})")
        for e, name in ((2, "mu2"), (3, "mu3")):
            parts.append(f"{sum(1 for pt in tame if pt.order == e)} {name}")
        return ", ".join(parts)


def _wild(label: str, colliding: list[Fraction], group: int, wild: int, p: int) -> StackyPoint:
    sol = jump_by_euler_conservation(colliding, group, wild, p)
    return wild_point(label, group, wild, sol.jump, p, note=CONSERVATION_NOTE)


def stacky_model(n: int, p: int = 0) -> StackyModel:
    """Genus, cusps and stacky points of X_0(N)^rig over a field of characteristic p."""
    q = _check_level(n, p)
    g, cusps = genus_X0(n), cusp_count(n)
    e2, e3 = epsilon2(n), epsilon3(n)
    points: list[StackyPoint] = []
    if n == 1 and q in (2, 3):
        group, wild = (6, 3) if q == 3 else (12, 4)
        points.append(_wild("P", [_MU2, _MU3], group, wild, q))
    elif q == 2:
        points += [_wild(f"P{i + 1}", [_MU2, _MU2], 2, 2, 2) for i in range(e2 // 2)]
        points += [tame_point(f"R{i + 1}", 3) for i in range(e3)]
    elif q == 3:
        points += [tame_point(f"Q{i + 1}", 2) for i in range(e2)]
        points += [_wild(f"P{i + 1}", [_MU3, _MU3], 3, 3, 3) for i in range(e3 // 2)]
    else:
        points += [tame_point(f"Q{i + 1}", 2) for i in range(e2)]
        points += [tame_point(f"R{i + 1}", 3) for i in range(e3)]
    return StackyModel(n, q, g, cusps, tuple(points))


def epsilon_prime(n: int, p: int) -> tuple[int, int]:
    """Counts of order-2 and order-3 stacky points on X_0(N)^rig in characteristic p."""
    if p not in (2, 3):
        raise PreconditionError("epsilon_prime is defined for p = 2, 3")
    _check_level(n, p)
    if n == 1:
        raise PreconditionError("level 1 has a single non-cyclic wild point; use stacky_model")
    e2, e3 = epsilon2(n), epsilon3(n)
    return (e2 // 2, e3) if p == 2 else (e2, e3 // 2)


def dim_modp_odd_level1_char2(k: int) -> int:
    """Monomials x_1^a x_12^b of weight k."""
    if k < 0:
        return 0
    return k // 12 + 1


def dim_modp(n: int, p: int, k: int) -> int:
    """Dimension of weight-k forms on X_0(N) over F_p (or Q for p = 0)."""
    q = _check_level(n, p)
    if k % 2:
        if (n, q) != (1, 2):
            raise PreconditionError("odd weights are only supported at level 1 in characteristic 2")
        return dim_modp_odd_level1_char2(k)
    if k < 0:
        return 0
    if k == 0:
        return 1
    model = stacky_model(n, q)
    divisor = model.log_canonical.scale(k // 2)
    try:
        return h0(divisor, model.genus)
    except PossiblySpecial:
        if k != 2:
            raise
        # weight 2: holomorphic differentials plus log poles, plus one per wild floor
        extra = sum(int(c) for c in (pt.coefficient for pt in model.wild_points()))
        return model.genus + model.cusps - 1 + extra


@dataclass(frozen=True)
class EtherealReport:
    level: int
    characteristic: int
    exists: bool
    count: int
    criterion: str

    def __post_init__(self) -> None:
        if self.exists != (self.count > 0):
            raise ValueError("exists must agree with a positive count")


def ethereal_report(n: int, p: int) -> EtherealReport:
    """Decide whether weight-2 forms mod p fail to lift, and count them."""
    if p not in (2, 3):
        raise PreconditionError("ethereal forms are studied for p = 2, 3")
    _check_level(n, p)
    if n == 1:
        # weight 2 is spanned by the Hasse invariant (p = 3) or its square (p = 2)
        return EtherealReport(1, p, True, 1, "N = 1; the weight-2 form is a power of the Hasse invariant")
    primes = prime_divisors(n)
    residue = 4 if p == 2 else 3
    exists = all(ell % residue == 1 for ell in primes)
    count = 2 ** (len(primes) - 1) if exists else 0
    observed = dim_modp(n, p, 2) - dimension_M(n, 2)
    if observed != count:
        raise InvariantBreach(
            f"criterion predicts {count} ethereal weight-2 forms at level {n}, dimensions give {observed}"
        )
    factored = " * ".join(str(ell) for ell in primes)
    verdict = "all" if exists else "not all"
    return EtherealReport(n, p, exists, count, f"N = {factored}; {verdict} prime factors are 1 mod {residue}")


def log_canonical_floor_degree(n: int, p: int, k: int) -> int:
    """deg floor((k/2)(K + Delta)) for even k."""
    if k % 2:
        raise PreconditionError("even weights only")
    return floor_degree(stacky_model(n, p).log_canonical, k // 2)
