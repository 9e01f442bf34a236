"""Characteristic-zero data for X_0(N): invariants, dimensions and bases.

Bases of M_k(Gamma_0(N)) are generated from q-expansions alone:

* products of Eisenstein series with quadratic characters (and the weight-2
  differences E_2(q) - d E_2(q^d)) whose characters cancel,
* images V_d of bases at lower levels, holomorphic eta quotients, and products
  of lower-weight bases at the same level,
* when those still fall short, division: F lies in M_k exactly when F*E_4 is in
  M_{k+4} and F*E_6 is in M_{k+6}, so M_k is cut out from those two spaces by
  the linear condition G_4 E_6 = G_6 E_4 (certified at the weight k+10 Sturm
  bound).

Rows are made integral and then saturated at 2 and 3 (for p not dividing N),
so that reduction mod p yields the full image of M_k(Z[1/N]).
"""

from __future__ import annotations

import itertools
import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from . import _fplinalg
from .errors import FixtureError, WildformsError
from .exactnum import (
    dedekind_psi,
    divisors,
    euler_phi,
    factor,
    generalized_bernoulli,
    kronecker,
    to_fp,
)
from .qseries import (
    EtaQuotientError,
    QExpansion,
    eisenstein,
    eta_character_is_trivial,
    eta_quotient,
    poly_mul,
    reduce_mod_p,
    series_inverse,
    sturm_bound,
    v_operator,
)

__all__ = [
    "CurveInvariants",
    "SpaceBasis",
    "RankDeficiency",
    "FixtureError",
    "epsilon2",
    "epsilon3",
    "cusp_count",
    "genus_X0",
    "genus_X_full",
    "curve_invariants",
    "dimension_M",
    "build_basis",
    "basis_for",
    "saturate",
    "load_fixture",
    "dump_fixture",
    "fixture_filename",
]

FIXTURE_ENV = "WILDFORMS_FIXTURES"
_SELECTION_PRIME = 1_000_003


class RankDeficiency(WildformsError, RuntimeError):
    """The generated candidate pool does not span the full space (supply a fixture)."""

    exit_code = 4




# ---------------------------------------------------------------------------
# Invariants of X_0(N)


def epsilon2(n: int) -> int:
    """Number of elliptic points of order 2 on X_0(N)."""
    if n % 4 == 0:
        return 0
    out = 1
    for ell, _ in factor(n):
        if ell != 2:
            out *= 1 + kronecker(-1, ell)
    return out


def epsilon3(n: int) -> int:
    """Number of elliptic points of order 3 on X_0(N)."""
    if n % 9 == 0:
        return 0
    out = 1
    for ell, _ in factor(n):
        if ell != 3:
            out *= 1 + kronecker(-3, ell)
    return out


def cusp_count(n: int) -> int:
    return sum(euler_phi(math.gcd(d, n // d)) for d in divisors(n))


def genus_X0(n: int) -> int:
    g = 1 + Fraction(dedekind_psi(n), 12) - Fraction(epsilon2(n), 4) - Fraction(epsilon3(n), 3) - Fraction(cusp_count(n), 2)
    if g.denominator != 1 or g < 0:
        raise ArithmeticError(f"genus formula gave {g} at level {n}")
    return int(g)


def genus_X_full(ell: int) -> int:
    """Genus of the full-level curve X(ell) for a prime ell >= 7."""
    if ell < 7 or any(ell % d == 0 for d in range(2, math.isqrt(ell) + 1)):
        raise ValueError("genus_X_full expects a prime ell >= 7")
    order = ell * (ell * ell - 1) // 2
    g = 1 + Fraction(order * (ell - 6), 12 * ell)
    if g.denominator != 1:
        raise ArithmeticError(f"non-integral genus {g} for X({ell})")
    return int(g)


@dataclass(frozen=True)
class CurveInvariants:
    level: int
    genus: int
    cusps: int
    eps2: int
    eps3: int
    index: int

    def __post_init__(self) -> None:
        lhs = 12 * (self.genus - 1)
        rhs = self.index - 3 * self.eps2 - 4 * self.eps3 - 6 * self.cusps
        if lhs != rhs:
            raise ArithmeticError("genus identity violated")


def curve_invariants(n: int) -> CurveInvariants:
    return CurveInvariants(n, genus_X0(n), cusp_count(n), epsilon2(n), epsilon3(n), dedekind_psi(n))


def dimension_M(n: int, k: int) -> int:
    """dim M_k(Gamma_0(N)) for even k >= 0."""
    if k < 0 or k % 2:
        raise ValueError("dimension_M is defined here for even k >= 0")
    if k == 0:
        return 1
    if n == 1:
        return k // 12 if k % 12 == 2 else k // 12 + 1
    inv = curve_invariants(n)
    if k == 2:
        return inv.genus + inv.cusps - 1
    return (k - 1) * (inv.genus - 1) + (k // 4) * inv.eps2 + (k // 3) * inv.eps3 + (k // 2) * inv.cusps


# ---------------------------------------------------------------------------
# Bases


@dataclass(frozen=True)
class SpaceBasis:
    level: int
    weight: int
    prec: int
    forms: tuple[QExpansion, ...]
    provenance: str = "generated"

    def __post_init__(self) -> None:
        leads = [f.valuation() for f in self.forms]
        if any(a is None for a in leads) or any(b <= a for a, b in zip(leads, leads[1:])):  # type: ignore[operator]
            raise ValueError("basis forms must have strictly increasing leading exponents")

    @property
    def dimension(self) -> int:
        return len(self.forms)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(f.valuation() for f in self.forms)  # type: ignore[misc]

    def truncate(self, prec: int) -> SpaceBasis:
        return SpaceBasis(self.level, self.weight, prec, tuple(f.truncate(prec) for f in self.forms), self.provenance)

    def reductions(self, p: int) -> list[QExpansion]:
        return [reduce_mod_p(f, p) for f in self.forms]


def _fundamental_discriminants(n: int) -> list[int]:
    """Fundamental discriminants D != 1 with |D| dividing N."""
    out = []
    for a in divisors(n):
        for d in (a, -a):
            if d == 1:
                continue
            if d % 4 == 1 and all(e == 1 for _, e in factor(a)):
                out.append(d)
            elif d % 4 == 0 and (d // 4) % 4 in (2, 3) and all(e == 1 for _, e in factor(a // 4)):
                out.append(d)
    return sorted(out, key=lambda d: (abs(d), d))


def _char(disc: int):
    if disc == 1:
        return lambda m: 1
    return lambda m: kronecker(disc, m) if m else 0


@lru_cache(maxsize=None)
def _twisted_eisenstein(k: int, dpsi: int, dphi: int, t: int) -> tuple[Fraction, ...]:
    """Coefficients of E_k^{psi,phi} = c_0 + sum_n sum_{d|n} psi(n/d) phi(d) d^{k-1} q^n."""
    fpsi, fphi = abs(dpsi), abs(dphi)
    psi_tab = [_char(dpsi)(m) for m in range(fpsi)] if dpsi != 1 else None
    phi_tab = [_char(dphi)(m) for m in range(fphi)] if dphi != 1 else None
    coeffs = [0] * (t + 1)
    for d in range(1, t + 1):
        phid = phi_tab[d % fphi] if phi_tab else 1
        if not phid:
            continue
        w = phid * d ** (k - 1)
        for m in range(1, t // d + 1):
            psim = psi_tab[m % fpsi] if psi_tab else 1
            if psim:
                coeffs[m * d] += psim * w
    c0 = Fraction(0)
    if dpsi == 1:
        c0 = -generalized_bernoulli(k, dphi) / (2 * k)
    if k == 1 and dphi == 1 and dpsi != 1:
        c0 = -generalized_bernoulli(1, dpsi) / 2
    return (c0,) + tuple(Fraction(c) for c in coeffs[1:])


def _character_tag(n: int, discs: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(math.prod(_char(d)(a) for d in discs) for a in range(1, n + 1) if math.gcd(a, n) == 1)


def _eisenstein_pieces(n: int, k: int, t: int) -> list[tuple[tuple[int, ...], QExpansion]]:
    """Character-tagged Eisenstein series of weight k and level dividing N."""
    discs = [1] + _fundamental_discriminants(n)
    out = []
    for dpsi, dphi in itertools.product(discs, repeat=2):
        cond = abs(dpsi) * abs(dphi)
        if n % cond:
            continue
        parity = (1 if dpsi > 0 else -1) * (1 if dphi > 0 else -1)
        if parity != (-1) ** k:
            continue
        if k == 2 and dpsi == 1 and dphi == 1:
            continue
        if k == 1 and dphi == 1:
            continue
        base = QExpansion(_twisted_eisenstein(k, dpsi, dphi, t), 0)
        tag = _character_tag(n, (dpsi, dphi))
        for d in divisors(n // cond):
            out.append((tag, v_operator(base, d)))
    if k == 2:
        e2 = eisenstein(2, t)
        trivial = _character_tag(n, ())
        for d in divisors(n)[1:]:
            out.append((trivial, e2 - v_operator(e2, d).scale(d)))
    return out


def _eta_candidates(n: int, k: int, t: int, bound: int | None = None) -> list[QExpansion]:
    ds = divisors(n)
    if len(ds) == 1:
        return []
    bound = bound if bound is not None else 2 * k + 4
    if (2 * bound + 1) ** (len(ds) - 1) > 200_000:
        return []
    out = []
    for rs in itertools.product(range(-bound, bound + 1), repeat=len(ds) - 1):
        last = 2 * k - sum(rs)
        exps = dict(zip(ds, list(rs) + [last]))
        if not eta_character_is_trivial(exps):
            continue
        try:
            out.append(eta_quotient(exps, t, level=n, weight=k))
        except EtaQuotientError:
            continue
    return out


class _ModPSelector:
    """Greedy selection of Q-linearly independent rows via reduction mod a large prime."""

    def __init__(self, t: int):
        self.t = t
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []
        self.chosen: list[QExpansion] = []

    @staticmethod
    def _modp(f: QExpansion) -> np.ndarray | None:
        try:
            return np.array([to_fp(c, _SELECTION_PRIME) for c in f.coeffs], dtype=np.int64)
        except ZeroDivisionError:
            return None

    def offer_vector(self, v: np.ndarray) -> bool:
        P = _SELECTION_PRIME
        if self.rows:
            mat = np.array(self.rows)
            v = (v - (v[self.pivots] @ mat) % P) % P
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        c = int(nz[0])
        v = v * pow(int(v[c]), -1, P) % P
        for i, row in enumerate(self.rows):
            if row[c]:
                self.rows[i] = (row - row[c] * v) % P
        self.rows.append(v)
        self.pivots.append(c)
        return True

    def offer(self, f: QExpansion) -> bool:
        v = self._modp(f)
        if v is None or not self.offer_vector(v):
            return False
        self.chosen.append(f)
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def _normalize(level: int, weight: int, t: int, forms: list[QExpansion], provenance: str) -> SpaceBasis:
    """Fraction-free echelon form, primitive integral rows, saturated at 2 and 3."""
    ints = []
    for f in forms:
        den = math.lcm(*(c.denominator for c in f.coeffs))
        ints.append([ZZ(int(c * den)) for c in f.coeffs])
    mat = DomainMatrix(ints, (len(ints), t + 1), ZZ)
    red = mat.rref_den()[0]
    rows = []
    for r in red.to_list():
        vals = [int(x) for x in r]
        if not any(vals):
            continue
        g = math.gcd(*vals)
        lead = next(x for x in vals if x)
        sign = -1 if lead < 0 else 1
        rows.append([sign * x // g for x in vals])
    for p in (2, 3):
        if level % p:
            rows = _saturate_rows(rows, p)
    rows.sort(key=lambda r: next(i for i, x in enumerate(r) if x))
    return SpaceBasis(level, weight, t, tuple(QExpansion(tuple(r), 0) for r in rows), provenance)


def _saturate_rows(rows: list[list[int]], p: int) -> list[list[int]]:
    """Enlarge the Z-span until the rows stay independent mod p.

    Any Z-combination vanishing mod p through the Sturm bound is divisible by p
    as a form, so dividing by p stays inside M_k(Z[1/N]).  The row with the
    smallest leading exponent in the combination is replaced, which keeps the
    leading exponents distinct.
    """
    rows = [list(r) for r in rows]
    while True:
        red = np.array([[x % p for x in r] for r in rows], dtype=np.int64)
        ker = _fplinalg.left_kernel_mod(red, p)
        if len(ker) == 0:
            return rows
        vec = [int(x) for x in ker[0]]
        support = [i for i, c in enumerate(vec) if c]
        leads = {i: next(j for j, x in enumerate(rows[i]) if x) for i in support}
        target = min(support, key=lambda i: leads[i])
        scale = pow(vec[target], -1, p)
        vec = [c * scale % p for c in vec]
        combo = [sum(vec[i] * rows[i][j] for i in support) for j in range(len(rows[0]))]
        if any(x % p for x in combo):
            raise ArithmeticError("saturation produced a non-divisible combination")
        rows[target] = [x // p for x in combo]


def saturate(basis: SpaceBasis, p: int) -> SpaceBasis:
    """p-saturated version of an integral basis (p not dividing the level)."""
    if basis.level % p == 0:
        raise ValueError(f"{p} divides the level")
    rows = []
    for f in basis.forms:
        den = math.lcm(*(c.denominator for c in f.coeffs))
        if den % p == 0:
            raise ValueError(f"basis form is not {p}-integral")
        rows.append([int(c * den) for c in f.coeffs])
    rows = _saturate_rows(rows, p)
    rows.sort(key=lambda r: next(i for i, x in enumerate(r) if x))
    return SpaceBasis(
        basis.level, basis.weight, basis.prec, tuple(QExpansion(tuple(r), 0) for r in rows), basis.provenance
    )


_CACHE: dict[tuple[int, int], SpaceBasis] = {}
_PENDING: set[tuple[int, int]] = set()
_DIVISION_DEPTH = [0]
_MAX_DIVISION_DEPTH = 4


def build_basis(n: int, k: int, t: int) -> SpaceBasis:
    """Integral echelon basis of M_k(Gamma_0(N)) to precision t."""
    if k < 0 or k % 2:
        raise ValueError("build_basis needs an even weight k >= 0")
    if t < sturm_bound(k, n):
        raise ValueError(f"precision {t} is below the Sturm bound {sturm_bound(k, n)}")
    cached = _CACHE.get((n, k))
    if cached is not None and cached.prec >= t:
        return cached if cached.prec == t else cached.truncate(t)
    if (n, k) in _PENDING:
        raise RankDeficiency(f"level {n} weight {k} is already being generated")
    _PENDING.add((n, k))
    try:
        basis = _generate(n, k, t)
    finally:
        _PENDING.discard((n, k))
    _CACHE[(n, k)] = basis
    return basis


def _generate(n: int, k: int, t: int) -> SpaceBasis:
    dim = dimension_M(n, k)
    if dim == 0:
        return SpaceBasis(n, k, t, ())
    if k == 0:
        return SpaceBasis(n, k, t, (QExpansion.constant(1, t),))
    if n == 1:
        e4, e6 = eisenstein(4, t), eisenstein(6, t)
        forms = [e4**a * e6**b for a in range(k // 4 + 1) for b in range(k // 6 + 1) if 4 * a + 6 * b == k]
        return _normalize(1, k, t, forms, "generated")

    sel = _ModPSelector(t)
    P = _SELECTION_PRIME

    def product_vector(vf, vg):
        return np.array([x % P for x in poly_mul(vf, vg, t + 1)], dtype=np.int64)

    def candidates():
        """Yields (vector mod P or None, thunk producing the exact form)."""
        trivial = _character_tag(n, ())
        pieces = {}
        for w in range(1, k + 1):
            pieces[w] = []
            for tag, f in _eisenstein_pieces(n, w, t):
                v = _ModPSelector._modp(f)
                if v is not None:
                    pieces[w].append((tag, f, [int(x) for x in v]))
        for tag, f, v in pieces[k]:
            if tag == trivial:
                yield np.array(v, dtype=np.int64), lambda f=f: f
        for a in range(1, k // 2 + 1):
            for (tag1, f, vf), (tag2, g, vg) in itertools.product(pieces[a], pieces[k - a]):
                if tag1 == tag2:
                    yield product_vector(vf, vg), lambda f=f, g=g: f * g
        for m in divisors(n)[:-1]:
            try:
                low = build_basis(m, k, t)
            except RankDeficiency:
                continue
            for d in divisors(n // m):
                for f in low.forms:
                    yield None, lambda f=f, d=d: v_operator(f, d)
        for f in _eta_candidates(n, k, t):
            yield None, lambda f=f: f
        for a in range(2, k // 2 + 1, 2):
            try:
                lo, hi = build_basis(n, a, t), build_basis(n, k - a, t)
            except RankDeficiency:
                continue
            for f, g in itertools.product(lo.forms, hi.forms):
                vf, vg = _ModPSelector._modp(f), _ModPSelector._modp(g)
                if vf is not None and vg is not None:
                    yield product_vector([int(x) for x in vf], [int(x) for x in vg]), lambda f=f, g=g: f * g

    for vec, make in candidates():
        if sel.rank == dim:
            break
        if vec is None:
            sel.offer(make())
        elif sel.offer_vector(vec):
            sel.chosen.append(make())
    forms = sel.chosen
    provenance = "generated"
    if len(forms) < dim and _DIVISION_DEPTH[0] < _MAX_DIVISION_DEPTH:
        _DIVISION_DEPTH[0] += 1
        try:
            forms = _divide_out(n, k, t)
        finally:
            _DIVISION_DEPTH[0] -= 1
        provenance = "generated (division by E4, E6)"
    if len(forms) != dim:
        raise RankDeficiency(f"level {n} weight {k}: found {len(forms)} of {dim} forms")
    return _normalize(n, k, t, forms, provenance)


def _divide_out(n: int, k: int, t: int) -> list[QExpansion]:
    """M_k as {G4 / E4 : G4 in M_{k+4}, G6 in M_{k+6}, G4 E6 = G6 E4}."""
    check = sturm_bound(k + 10, n) + 1
    tt = max(t, check)
    b4 = build_basis(n, k + 4, tt)
    b6 = build_basis(n, k + 6, tt)
    e4, e6 = eisenstein(4, tt), eisenstein(6, tt)
    rows = [list((f * e6).coeffs[: check + 1]) for f in b4.forms]
    rows += [[-c for c in (f * e4).coeffs[: check + 1]] for f in b6.forms]
    mat = DomainMatrix([[QQ(c.numerator, c.denominator) for c in r] for r in rows], (len(rows), check + 1), QQ)
    null = mat.transpose().nullspace().to_list()
    inv4 = series_inverse(eisenstein(4, t))
    out = []
    for vec in null:
        coeffs = [Fraction(int(x.numerator), int(x.denominator)) for x in vec[: len(b4.forms)]]
        g4 = QExpansion.zero(t)
        for c, f in zip(coeffs, b4.forms):
            if c:
                g4 = g4 + f.truncate(t).scale(c)
        out.append(g4 * inv4)
    return out


def basis_for(n: int, k: int, t: int, fixture_dir: str | os.PathLike | None = None) -> SpaceBasis:
    """Generated basis, falling back to a fixture file when generation falls short."""
    try:
        return build_basis(n, k, t)
    except RankDeficiency:
        fixture_dir = fixture_dir or os.environ.get(FIXTURE_ENV)
        if not fixture_dir:
            raise
        path = Path(fixture_dir) / fixture_filename(n, k)
        if not path.exists():
            raise
        basis = load_fixture(path)
        if basis.prec < t:
            raise FixtureError(f"{path}: precision {basis.prec} below requested {t}")
        return basis.truncate(t)


# ---------------------------------------------------------------------------
# Fixtures


def fixture_filename(n: int, k: int) -> str:
    return f"level{n}_weight{k}.txt"


_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


def load_fixture(path: str | os.PathLike) -> SpaceBasis:
    """Parse a basis file: header ``N k t count`` then ``count`` rows of t+1 rationals."""
    lines = []
    for raw in Path(path).read_text(encoding="ascii").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise FixtureError(f"{path}: empty fixture")
    try:
        n, k, t, count = (int(x) for x in lines[0].split())
    except ValueError:
        raise FixtureError(f"{path}: malformed header {lines[0]!r}") from None
    if len(lines) - 1 != count:
        raise FixtureError(f"{path}: header announces {count} rows, found {len(lines) - 1}")
    forms = []
    for i, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if len(tokens) != t + 1 or not all(_RATIONAL.match(tok) for tok in tokens):
            raise FixtureError(f"{path}: row {i} must hold {t + 1} rationals num/den")
        coeffs = tuple(Fraction(tok) for tok in tokens)
        for c in coeffs:
            for p in (2, 3):
                if c.denominator % p == 0 and n % p:
                    raise FixtureError(f"{path}: denominator {c.denominator} is divisible by {p}, which does not divide {n}")
        forms.append(QExpansion(coeffs, 0))
    dim = dimension_M(n, k)
    if count != dim:
        raise FixtureError(f"{path}: {count} rows but dim M_{k}({n}) = {dim}")
    if count:
        mat = DomainMatrix([[QQ(c.numerator, c.denominator) for c in f.coeffs] for f in forms], (count, t + 1), QQ)
        if mat.rank() != count:
            raise FixtureError(f"{path}: rows are linearly dependent")
        return _normalize(n, k, t, forms, "fixture")
    return SpaceBasis(n, k, t, (), "fixture")


def dump_fixture(basis: SpaceBasis) -> str:
    out = [f"# basis of M_{basis.weight}(Gamma_0({basis.level}))", f"{basis.level} {basis.weight} {basis.prec} {basis.dimension}"]
    for f in basis.forms:
        out.append(" ".join(str(c) for c in f.coeffs))
    return "\n".join(out) + "\n"
