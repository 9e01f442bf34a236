"""Q-divisors on stacky curves, wild Riemann-Hurwitz and ramification jumps.

Conventions.  A stacky point P with stabilizer of order e maps to a coarse
point pi(P) of degree 1; the stacky point itself has degree 1/e.  A divisor is
recorded on the coarse space as ``free * H + sum c_i pi(P_i)``, where H is a
generic (non-stacky) point.  The coefficient of a stacky point is computed from
its lower-numbering ramification filtration |G_0| >= |G_1| >= ... as
``sum_j (|G_j| - 1) / |G_0|``; a tame point of order e has filtration (e,).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InvariantBreach, PreconditionError

__all__ = [
    "StackyPoint",
    "QDivisor",
    "RefinedSignature",
    "CoverInstance",
    "JumpSolution",
    "PossiblySpecial",
    "coefficient_from_filtration",
    "wild_filtration",
    "tame_point",
    "wild_point",
    "canonical_divisor",
    "log_canonical_divisor",
    "floor_degree",
    "h0",
    "solve_jump",
    "jump_from_coefficient",
    "jump_by_euler_conservation",
    "presentation_bounds",
    "trivial_canring_check",
    "level_one_cover",
    "prime_level_cover",
    "cartan_chain",
]


class PossiblySpecial(ValueError):
    """Riemann-Roch cannot decide h^0 without knowing whether the divisor is special."""


def coefficient_from_filtration(orders: Sequence[int]) -> Fraction:
    """Coefficient sum_j (|G_j| - 1) / |G_0| of a stacky point in pi_* K."""
    orders = list(orders)
    if not orders or orders[0] < 1:
        raise ValueError("filtration must start with |G_0| >= 1")
    if any(b > a for a, b in zip(orders, orders[1:])):
        raise ValueError("filtration orders must be nonincreasing")
    return Fraction(sum(o - 1 for o in orders), orders[0])


def wild_filtration(group_order: int, wild_order: int, jump: int) -> tuple[int, ...]:
    """(|G_0|, |G_1|, ..., |G_m|) for a filtration with G_1 = ... = G_m of the given order."""
    if jump < 1:
        raise ValueError("a wild jump is at least 1")
    return (group_order,) + (wild_order,) * jump


@dataclass(frozen=True)
class StackyPoint:
    label: str
    order: int
    tame: bool = True
    jumps: tuple[int, ...] = ()
    filtration: tuple[int, ...] = ()
    characteristic: int = 0
    note: str = ""

    def __post_init__(self) -> None:
        if self.tame and self.jumps:
            raise ValueError("tame points carry no jumps")
        if not self.tame:
            if not self.jumps:
                raise ValueError("wild points need their ramification jumps")
            p = self.characteristic
            if p and any(m % p == 0 for m in self.jumps):
                raise ValueError("jumps must be coprime to the characteristic")
        if not self.filtration:
            object.__setattr__(self, "filtration", (self.order,))
        if self.filtration[0] != self.order:
            raise ValueError("filtration must start with the stabilizer order")

    @property
    def coefficient(self) -> Fraction:
        return coefficient_from_filtration(self.filtration)

    @property
    def degree(self) -> Fraction:
        return Fraction(1, self.order)


def tame_point(label: str, order: int) -> StackyPoint:
    return StackyPoint(label, order)


def wild_point(label: str, group_order: int, wild_order: int, jump: int, p: int, note: str = "") -> StackyPoint:
    return StackyPoint(
        label,
        group_order,
        tame=False,
        jumps=(jump,),
        filtration=wild_filtration(group_order, wild_order, jump),
        characteristic=p,
        note=note,
    )


@dataclass(frozen=True)
class QDivisor:
    """free * H + sum c_i pi(P_i); each entry is (label, c_i, stacky point degree)."""

    free: int = 0
    points: tuple[tuple[str, Fraction, Fraction], ...] = ()

    def __post_init__(self) -> None:
        labels = [lab for lab, _, _ in self.points]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate point labels")
        if any(d <= 0 for _, _, d in self.points):
            raise ValueError("point degrees must be positive")

    @property
    def degree(self) -> Fraction:
        return self.free + sum((c for _, c, _ in self.points), Fraction(0))

    def scale(self, k: int) -> QDivisor:
        return QDivisor(k * self.free, tuple((lab, k * c, d) for lab, c, d in self.points))

    def floor(self) -> QDivisor:
        return QDivisor(self.free, tuple((lab, Fraction(math.floor(c)), d) for lab, c, d in self.points))

    def stack_multiplicities(self) -> dict[str, Fraction]:
        """Coefficients as multiples of the stacky points themselves (c_i / deg P_i)."""
        return {lab: c / d for lab, c, d in self.points}

    def render(self) -> str:
        parts = []
        if self.free:
            parts.append(f"{self.free}H")
        for lab, mult in self.stack_multiplicities().items():
            if mult:
                parts.append(lab if mult == 1 else f"{mult}{lab}")
        return " + ".join(parts) if parts else "0"


def canonical_divisor(genus: int, points: Sequence[StackyPoint]) -> QDivisor:
    """K = (2g - 2) H + sum c_i pi(P_i)."""
    return QDivisor(2 * genus - 2, tuple((pt.label, pt.coefficient, pt.degree) for pt in points))


def log_canonical_divisor(genus: int, points: Sequence[StackyPoint], cusps: int) -> QDivisor:
    k = canonical_divisor(genus, points)
    return QDivisor(k.free + cusps, k.points)


def floor_degree(divisor: QDivisor, k: int) -> int:
    """deg floor(k D) = k * free + sum floor(k c_i)."""
    return k * divisor.free + sum(math.floor(k * c) for _, c, _ in divisor.points)


def h0(divisor: QDivisor, genus: int) -> int:
    """h^0 of floor(D) when Riemann-Roch alone determines it."""
    fl = divisor.floor()
    deg = int(fl.degree)
    if deg < 0:
        return 0
    if fl.free == 0 and all(c == 0 for _, c, _ in fl.points):
        return 1
    if genus == 0 or deg >= 2 * genus - 1:
        return deg - genus + 1
    raise PossiblySpecial(f"deg floor(D) = {deg} lies in the special range for genus {genus}")


@dataclass(frozen=True)
class RefinedSignature:
    genus: int
    coefficients: tuple[Fraction, ...]
    delta: int

    def __post_init__(self) -> None:
        if self.genus < 0 or self.delta < 0:
            raise ValueError("genus and cusp degree are nonnegative")
        if any(c <= 0 for c in self.coefficients):
            raise ValueError("stacky coefficients are positive")


def presentation_bounds(sig: RefinedSignature) -> tuple[int, int]:
    """Degree bounds (generators, relations) for the log canonical ring."""
    e = max((Fraction(c).denominator for c in sig.coefficients), default=1)
    c = sum(math.floor(x) for x in sig.coefficients)
    if sig.genus + c + sig.delta >= 2:
        b = max(3, e)
        return b, 2 * b
    return 3 * e, 6 * e


def trivial_canring_check(sig: RefinedSignature) -> bool:
    """True when every deg floor(k(K + Delta)) is negative, i.e. the ring is trivial in positive degree."""
    period = math.lcm(*(Fraction(c).denominator for c in sig.coefficients)) if sig.coefficients else 1
    for k in range(1, period + 1):
        deg = k * (2 * sig.genus - 2 + sig.delta) + sum(math.floor(k * c) for c in sig.coefficients)
        if deg >= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Jumps


@dataclass(frozen=True)
class CoverInstance:
    """An etale cover Y -> X of degree d with one unknown stacky coefficient.

    The canonical degree of X is ``known_degree + count * x * point_degree``
    where x is the unknown multiplicity of each of ``count`` symmetric stacky
    points.  ``absorbed`` records a coarse contribution that was folded into x
    by linear equivalence (as when -2H is rewritten in terms of the point).
    ``group_order`` / ``wild_order`` describe the filtration G_0, G_1 used to
    turn the coefficient into a jump; leave them unset to skip that step.
    """

    degree: int
    known_degree: Fraction
    point_degree: Fraction
    cover_genus: int | None = None
    cover_canonical_degree: Fraction | None = None
    count: int = 1
    absorbed: Fraction = Fraction(0)
    group_order: int | None = None
    wild_order: int | None = None
    characteristic: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError("cover degree must be positive")
        if (self.cover_genus is None) == (self.cover_canonical_degree is None):
            raise ValueError("give exactly one of cover_genus and cover_canonical_degree")
        if self.cover_genus is not None and self.cover_genus < 0:
            raise ValueError("genus must be nonnegative")


@dataclass(frozen=True)
class JumpSolution:
    multiplicity: Fraction
    coefficient: Fraction
    jump: int | None
    note: str = ""


def jump_from_coefficient(c: Fraction, group_order: int, wild_order: int, p: int) -> int:
    """Solve c * |G_0| = (|G_0| - 1) + (|G_1| - 1) m for m."""
    m = (c * group_order - (group_order - 1)) / (wild_order - 1)
    if m.denominator != 1 or m < 1:
        raise InvariantBreach(f"coefficient {c} gives non-integral or nonpositive jump {m}")
    if p and int(m) % p == 0:
        raise InvariantBreach(f"jump {m} is divisible by the characteristic {p}")
    return int(m)


def solve_jump(inst: CoverInstance) -> JumpSolution:
    """Solve deg K_Y = d * deg K_X for the unknown stacky multiplicity."""
    if inst.cover_canonical_degree is not None:
        ky = Fraction(inst.cover_canonical_degree)
    else:
        ky = Fraction(2 * inst.cover_genus - 2)  # type: ignore[operator]
    x = (ky / inst.degree - inst.known_degree) / (inst.count * inst.point_degree)
    coeff = x * inst.point_degree - Fraction(inst.absorbed) / inst.count
    jump = None
    if inst.group_order is not None and inst.wild_order is not None:
        jump = jump_from_coefficient(coeff, inst.group_order, inst.wild_order, inst.characteristic)
    return JumpSolution(x, coeff, jump, inst.name)


def jump_by_euler_conservation(
    colliding: Sequence[Fraction], group_order: int, wild_order: int, p: int
) -> JumpSolution:
    """Jump forced by keeping deg K constant when tame points collide into one wild point."""
    c = sum((Fraction(x) for x in colliding), Fraction(0))
    m = jump_from_coefficient(c, group_order, wild_order, p)
    return JumpSolution(c * group_order, c, m, "derived via Euler-characteristic conservation")


def _psl2_order(ell: int) -> int:
    return ell * (ell * ell - 1) // 2


def level_one_cover(ell: int, p: int) -> CoverInstance:
    """X(ell) -> [X(ell)/PSL_2] -> level-1 stack in characteristic 2 or 3."""
    from .charzero import genus_X_full

    if p not in (2, 3):
        raise PreconditionError("level-one wild covers exist in characteristic 2 or 3")
    e, wild = (6, 3) if p == 3 else (12, 4)
    return CoverInstance(
        degree=_psl2_order(ell),
        cover_genus=genus_X_full(ell),
        known_degree=Fraction(ell - 1, ell),
        point_degree=Fraction(1, e),
        absorbed=Fraction(-2),
        group_order=e,
        wild_order=wild,
        characteristic=p,
        name=f"X({ell}) over the level-1 stack, char {p}",
    )


def _genus_x1_prime(n: int) -> int:
    return (n - 5) * (n - 7) // 24


def prime_level_cover(n: int, p: int) -> CoverInstance:
    """X_1(N) -> X_0(N)^rig for a prime N >= 5, unknown wild coefficient in char p."""
    from .charzero import epsilon2, epsilon3, genus_X0

    if n < 5 or any(n % d == 0 for d in range(2, math.isqrt(n) + 1)):
        raise PreconditionError("prime_level_cover needs a prime N >= 5")
    if p not in (2, 3) or n % p == 0:
        raise PreconditionError("characteristic must be 2 or 3 and prime to N")
    g = genus_X0(n)
    if p == 2:
        count, tame = epsilon2(n) // 2, epsilon3(n) * Fraction(2, 3)
        order = 2
    else:
        count, tame = epsilon3(n) // 2, epsilon2(n) * Fraction(1, 2)
        order = 3
    if count == 0:
        raise PreconditionError(f"X_0({n}) has no wild points in characteristic {p}")
    return CoverInstance(
        degree=(n - 1) // 2,
        cover_genus=_genus_x1_prime(n),
        known_degree=2 * g - 2 + tame,
        point_degree=Fraction(1, order),
        count=count,
        group_order=order,
        wild_order=order,
        characteristic=p,
        name=f"X_1({n}) over X_0({n})^rig, char {p}",
    )


def cartan_chain() -> tuple[JumpSolution, JumpSolution]:
    """Non-split Cartan of level 3 in characteristic 2: X(3) -> X_ns(3) -> X_ns^+(3)."""
    first = solve_jump(
        CoverInstance(
            degree=2,
            cover_genus=0,
            known_degree=Fraction(-2),
            point_degree=Fraction(1, 2),
            characteristic=2,
            name="X(3) over X_ns(3)^rig",
        )
    )
    first = JumpSolution(first.multiplicity, first.coefficient, None, "b")
    k_ns = Fraction(-2) + first.multiplicity * Fraction(1, 2)
    second = solve_jump(
        CoverInstance(
            degree=2,
            cover_canonical_degree=k_ns,
            known_degree=Fraction(-2),
            point_degree=Fraction(1, 4),
            characteristic=2,
            name="X_ns(3) over X_ns^+(3)^rig",
        )
    )
    return first, JumpSolution(second.multiplicity, second.coefficient, None, "a")
