"""Mod-p rings of modular forms on X_0(N): ethereal generators and presentations.

The weight-k space over F_p is recovered from characteristic 0 through the
Hasse invariant.  Its q-expansion is 1, so a mod-p form f of weight k has
f^p equal (as a q-expansion) to a form of weight pk, and that space is spanned
by reductions of integral forms.  The p-th powers inside it are cut out by the
linear conditions "coefficients at exponents prime to p vanish", which theta
certifies once they hold past the Sturm bound of weight pk + p + 1.

The presentation is built weight by weight.  Monomials in the generators found
so far are evaluated; whenever they fall short of the dimension predicted by the
stacky model, new generators are taken from reduced characteristic-0 forms and
then from the full mod-p space.  Relations are the kernel of the evaluation map
modulo the multiples of lower-weight relations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _fplinalg
from .charzero import SpaceBasis, basis_for, dimension_M, saturate
from .errors import InvariantBreach, PreconditionError
from .exactnum import divisors
from .modcurve import dim_modp, effective_characteristic
from .qseries import (
    EchelonBasis,
    NotInSpan,
    PrecisionError,
    QExpansion,
    echelonize,
    empty_basis,
    express,
    pth_root,
    sturm_bound,
)

__all__ = [
    "Generator",
    "Relation",
    "RingPresentation",
    "FrobeniusRoot",
    "OldformMatch",
    "reduce_basis",
    "reduced_space",
    "find_frobenius_combinations",
    "modp_space",
    "ethereal_representatives",
    "verify_as_relation",
    "build_presentation",
    "oldspace",
    "oldform_scan",
    "working_precision",
]

HASSE = "Hasse invariant"
REDUCTION = "reduction of char-0 form"
ROOT = "p-th root of combination"


# ---------------------------------------------------------------------------
# Spaces over F_p


def reduce_basis(basis: SpaceBasis, p: int) -> EchelonBasis:
    """Echelonized reductions of a p-saturated integral basis."""
    if not basis.forms:
        return empty_basis(p, basis.prec)
    sat = saturate(basis, p)
    ech = echelonize(sat.reductions(p))
    if ech.rank != basis.dimension:
        raise InvariantBreach(
            f"reduction mod {p} dropped the rank of M_{basis.weight}({basis.level}) "
            f"from {basis.dimension} to {ech.rank}"
        )
    return ech


def reduced_space(n: int, k: int, p: int, t: int, fixtures=None) -> EchelonBasis:
    """Reductions mod p of M_k(Gamma_0(N)) at precision t."""
    return reduce_basis(basis_for(n, k, t, fixtures), p)


@dataclass(frozen=True)
class FrobeniusRoot:
    combination: tuple[int, ...]
    root: QExpansion
    rediscovered: bool = False


def find_frobenius_combinations(
    span: EchelonBasis, p: int, known: Sequence[EchelonBasis] = ()
) -> list[FrobeniusRoot]:
    """Basis of the p-th powers inside ``span``, each paired with its p-th root.

    Combinations are expressed over the rows of ``span``.  Roots that already
    lie in one of the ``known`` spans are kept but flagged as rediscovered.
    """
    if span.rank == 0:
        return []
    mat = span.matrix()
    cols = [j for j in range(span.prec + 1) if j % p]
    kernel = _fplinalg.left_kernel_mod(mat[:, cols], p) if cols else np.eye(span.rank, dtype=np.int64)
    out = []
    for vec in kernel:
        power = QExpansion(tuple(int(x) for x in vec @ mat % p), p)
        root = pth_root(power)
        seen = any(b.rank and b.contains(root.truncate(min(root.prec, b.prec))) for b in known)
        out.append(FrobeniusRoot(tuple(int(x) for x in vec), root, seen))
    return out


_SPACE_CACHE: dict[tuple[int, int, int], EchelonBasis] = {}


def modp_space(n: int, p: int, k: int, t: int, fixtures=None) -> EchelonBasis:
    """Echelon basis of M_k(N; F_p) at precision t, as p-th roots of weight pk forms."""
    p_eff = effective_characteristic(p)
    if p_eff not in (2, 3):
        raise PreconditionError("modp_space is for p = 2 or 3")
    if n % p == 0:
        raise PreconditionError(f"p = {p} divides N = {n}")
    if k < 2 or k % 2:
        raise PreconditionError("modp_space needs an even weight k >= 2")
    cached = _SPACE_CACHE.get((n, p, k))
    if cached is not None and cached.prec >= t:
        return cached if cached.prec == t else echelonize(cached.rows, t)
    big = p * (t + 1) - 1
    if big < sturm_bound(p * k + p + 1, n):
        raise PrecisionError(
            f"precision {t} is too small to certify p-th powers in weight {p * k} at level {n}"
        )
    power_space = reduced_space(n, p * k, p, big, fixtures)
    roots = [fr.root for fr in find_frobenius_combinations(power_space, p)]
    expected = dim_modp(n, p, k)
    space = echelonize(roots, t) if roots else empty_basis(p, t)
    if space.rank != expected:
        raise InvariantBreach(
            f"p-th roots give dimension {space.rank} for M_{k}({n}; F_{p}); the stacky model predicts {expected}"
        )
    _SPACE_CACHE[(n, p, k)] = space
    return space


def ethereal_representatives(full: EchelonBasis, lifted: EchelonBasis) -> list[QExpansion]:
    """Echelon rows of ``full`` whose pivots are not pivots of the liftable subspace.

    Since ``lifted`` sits inside ``full``, every pivot of ``lifted`` is a pivot of
    ``full``; the remaining rows span a complement.
    """
    taken = set(lifted.pivots)
    return [row for row, piv in zip(full.rows, full.pivots) if piv not in taken]


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class Generator:
    weight: int
    expansion: QExpansion
    ethereal: bool
    name: str
    provenance: str


@dataclass(frozen=True)
class Relation:
    weight: int
    coefficients: tuple[int, ...]
    monomials: tuple[tuple[int, ...], ...]

    def terms(self) -> list[tuple[int, tuple[int, ...]]]:
        return [(c, m) for c, m in zip(self.coefficients, self.monomials) if c]


def _monomial_text(mono: tuple[int, ...], names: Sequence[str]) -> str:
    parts = []
    for i, group in itertools.groupby(mono):
        e = len(list(group))
        parts.append(names[i] if e == 1 else f"{names[i]}^{e}")
    return "*".join(parts) if parts else "1"


@dataclass
class RingPresentation:
    level: int
    characteristic: int
    precision: int
    generators: list[Generator] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)
    dimensions: dict[int, int] = field(default_factory=dict)
    monomials: dict[int, tuple[tuple[int, ...], ...]] = field(default_factory=dict)

    @property
    def generator_weights(self) -> list[int]:
        return [g.weight for g in self.generators]

    @property
    def relation_weights(self) -> list[int]:
        return [r.weight for r in self.relations]

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.generators]

    def generator(self, name: str) -> Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)

    def ethereal_generators(self) -> list[Generator]:
        return [g for g in self.generators if g.ethereal]

    def evaluate_monomial(self, mono: tuple[int, ...]) -> QExpansion:
        out = QExpansion.constant(1, self.precision, self.characteristic)
        for i in mono:
            out = out * self.generators[i].expansion
        return out

    def evaluate(self, rel: Relation) -> QExpansion:
        out = QExpansion.zero(self.precision, self.characteristic)
        for c, mono in rel.terms():
            out = out + self.evaluate_monomial(mono).scale(c)
        return out

    def relation_text(self, rel: Relation) -> str:
        names = self.names
        pieces = []
        for c, mono in rel.terms():
            m = _monomial_text(mono, names)
            pieces.append(m if c == 1 else f"{c}*{m}")
        return " + ".join(pieces) + " = 0"


class _Reducer:
    """Incremental semi-echelon form over F_p with optional transform tracking."""

    def __init__(self, p: int, width: int, aux_width: int = 0):
        self.p = p
        self.width = width
        self.aux_width = aux_width
        self.pivots: list[int] = []
        self.rows: list[np.ndarray] = []
        self.aux: list[np.ndarray] = []

    @classmethod
    def from_rows(cls, rows: Sequence[np.ndarray], p: int, width: int) -> _Reducer:
        out = cls(p, width)
        if rows:
            red, pivots = _fplinalg.rref_mod(np.array(rows), p)
            out.pivots = list(pivots)
            out.rows = list(red)
            out.aux = [None] * len(out.rows)
        return out

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: np.ndarray, aux: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray | None]:
        v = vec % self.p
        a = None if aux is None else aux % self.p
        for piv, row, arow in itertools.zip_longest(self.pivots, self.rows, self.aux):
            c = int(v[piv])
            if c:
                v = (v - c * row) % self.p
                if a is not None:
                    a = (a - c * arow) % self.p
        return v, a

    def add(self, vec: np.ndarray, aux: np.ndarray | None = None) -> bool:
        """Insert ``vec``; return False (and leave the state alone) if it is dependent."""
        v, a = self.reduce(vec, aux)
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        inv = pow(int(v[piv]), -1, self.p)
        self.pivots.append(piv)
        self.rows.append(v * inv % self.p)
        self.aux.append(None if a is None else a * inv % self.p)  # type: ignore[arg-type]
        return True


def working_precision(n: int, max_weight: int, t: int | None = None) -> int:
    """Default precision: Sturm bound of the top weight plus slack, never below the request."""
    base = sturm_bound(max_weight, n) + 8
    return base if t is None else max(t, base)


def _monomials(weights: Sequence[int], w: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def walk(start: int, remaining: int, acc: list[int]) -> None:
        if remaining == 0:
            out.append(tuple(acc))
            return
        for i in range(start, len(weights)):
            if weights[i] <= remaining:
                acc.append(i)
                walk(i, remaining - weights[i], acc)
                acc.pop()

    walk(0, w, [])
    return sorted(out)


def _name_generators(gens: list[Generator]) -> list[Generator]:
    counts: dict[tuple[int, bool], int] = {}
    for g in gens:
        counts[(g.weight, g.ethereal)] = counts.get((g.weight, g.ethereal), 0) + 1
    seen: dict[tuple[int, bool], int] = {}
    out = []
    for g in gens:
        key = (g.weight, g.ethereal)
        seen[key] = seen.get(key, 0) + 1
        stem = f"{'y' if g.ethereal else 'x'}{g.weight}"
        name = stem if counts[key] == 1 else f"{stem}_{seen[key]}"
        out.append(Generator(g.weight, g.expansion, g.ethereal, name, g.provenance))
    return out


def _hasse(t: int, p: int) -> QExpansion:
    return QExpansion.constant(1, t, p)


def build_presentation(
    n: int,
    p: int,
    max_weight: int = 12,
    t: int | None = None,
    *,
    odd: bool = False,
    fixtures=None,
) -> RingPresentation:
    """Generators and minimal relations of the ring of mod-p forms through ``max_weight``."""
    if p not in (2, 3):
        raise PreconditionError("build_presentation works in characteristic 2 or 3")
    if n % p == 0:
        raise PreconditionError(f"p = {p} divides N = {n}")
    if max_weight < 4:
        raise PreconditionError("max weight must be at least 4")
    if odd and (n, p) != (1, 2):
        raise PreconditionError("odd weights are only available at level 1 in characteristic 2")
    prec = working_precision(n, max_weight, t)
    pres = RingPresentation(n, p, prec)
    gens: list[Generator] = []
    evals: dict[tuple[int, ...], np.ndarray] = {(): np.eye(1, prec + 1, 0, dtype=np.int64)[0]}
    weights = range(1, max_weight + 1) if odd else range(2, max_weight + 1, 2)

    def evaluate(mono: tuple[int, ...]) -> np.ndarray:
        hit = evals.get(mono)
        if hit is None:
            rest = evaluate(mono[:-1])
            last = gens[mono[-1]].expansion
            prod = QExpansion(tuple(int(x) for x in rest), p) * last
            hit = np.array(prod.coeffs, dtype=np.int64)
            evals[mono] = hit
        return hit

    for w in weights:
        dim = dim_modp(n, p, w)
        pres.dimensions[w] = dim
        lower = _monomials([g.weight for g in gens], w)
        span = _Reducer.from_rows([evaluate(m) for m in lower], p, prec + 1)
        if span.rank < dim:
            new = []
            lifted = reduced_space(n, w, p, prec, fixtures) if w % 2 == 0 else empty_basis(p, prec)
            for cand, provenance in _candidates(n, p, w, prec, lifted, fixtures):
                if span.add(np.array(cand.coeffs, dtype=np.int64)):
                    ethereal = not (lifted.rank and lifted.contains(cand))
                    new.append(Generator(w, cand, ethereal, "", provenance))
                    if span.rank == dim:
                        break
            gens = _name_generators(gens + new)
            for i, g in enumerate(gens):
                if g.weight == w:
                    evals[(i,)] = np.array(g.expansion.coeffs, dtype=np.int64)
        if span.rank != dim:
            raise InvariantBreach(
                f"weight {w}: monomials and candidates span {span.rank} dimensions, the stacky model predicts {dim}"
            )
        monos = _monomials([g.weight for g in gens], w)
        pres.monomials[w] = tuple(monos)
        pres.relations.extend(_new_relations(p, w, monos, evaluate, pres.relations, pres.monomials))
    pres.generators = gens
    return pres


def _candidates(n: int, p: int, w: int, prec: int, lifted: EchelonBasis, fixtures) -> Iterable[tuple[QExpansion, str]]:
    if w % 2:
        if w == 1:
            yield _hasse(prec, p), HASSE
        return
    for row in lifted.rows:
        yield row, REDUCTION
    full = modp_space(n, p, w, prec, fixtures)
    for row in ethereal_representatives(full, lifted):
        yield row, HASSE if row == _hasse(prec, p) else ROOT


def _new_relations(p, w, monos, evaluate, previous, all_monomials) -> list[Relation]:
    """Kernel of the weight-w evaluation map modulo the multiples of earlier relations."""
    index = {m: i for i, m in enumerate(monos)}
    size = len(monos)
    values = np.array([evaluate(m) for m in monos], dtype=np.int64)
    kernel = _fplinalg.nullspace_mod(values.T, p)
    if not len(kernel):
        return []
    products = []
    for rel in previous:
        for mult in _monomials_for(all_monomials, w - rel.weight):
            vec = np.zeros(size, dtype=np.int64)
            for c, mono in rel.terms():
                vec[index[tuple(sorted(mono + mult))]] += c
            products.append(vec % p)
    if products:
        ideal, pivots = _fplinalg.rref_mod(np.array(products), p)
        kernel = _fplinalg.reduce_against(kernel, ideal, pivots, p)
    fresh = _fplinalg.rref_mod(kernel, p)[0]
    return [Relation(w, tuple(int(x) for x in vec), tuple(monos)) for vec in fresh]


def _monomials_for(all_monomials: dict[int, tuple[tuple[int, ...], ...]], w: int) -> tuple[tuple[int, ...], ...]:
    if w == 0:
        return ((),)
    return all_monomials.get(w, ())


def verify_as_relation(
    y: Generator, s: Generator, span: EchelonBasis, p: int, level: int | None = None
) -> list | None:
    """Coordinates of y^p - s^{p-1} y in ``span`` (y^2 + s y in characteristic 2), or None."""
    target_weight = p * y.weight
    if s.weight * (p - 1) + y.weight != target_weight:
        raise PreconditionError("weights of y and s do not give a homogeneous Artin-Schreier expression")
    if level is not None and span.prec < sturm_bound(target_weight, level):
        raise PrecisionError("span precision is below the Sturm bound of the target weight")
    prec = min(y.expansion.prec, s.expansion.prec, span.prec)
    yy = y.expansion.truncate(prec)
    value = yy**p - (s.expansion.truncate(prec) ** (p - 1)) * yy
    try:
        return express(value, span)
    except NotInSpan:
        return None


# ---------------------------------------------------------------------------
# Oldforms


@dataclass(frozen=True)
class OldformMatch:
    lower_level: int
    dilation: int
    source: QExpansion
    source_name: str


def _lower_space(m: int, p: int, k: int, t: int, fixtures=None) -> EchelonBasis:
    need = working_precision(m, max(k, 4), t)
    return echelonize(modp_space(m, p, k, need, fixtures).rows, t) if dim_modp(m, p, k) else empty_basis(p, t)


def oldspace(n: int, p: int, k: int, t: int, fixtures=None) -> EchelonBasis:
    """Span of V_d images of forms from every proper divisor level M, d | N/M."""
    rows = []
    for m in divisors(n)[:-1]:
        for d in divisors(n // m):
            lower = _lower_space(m, p, k, t // d, fixtures)
            for row in lower.rows:
                rows.append(_dilate(row, d, t))
    return echelonize(rows, t) if rows else empty_basis(p, t)


def _dilate(f: QExpansion, d: int, t: int) -> QExpansion:
    coeffs = [0] * (t + 1)
    for m in range(t // d + 1):
        coeffs[m * d] = f.coeffs[m]
    return QExpansion(tuple(coeffs), f.modulus)


def _describe(f: QExpansion, k: int, pres: RingPresentation | None) -> str:
    """Name of f in a lower-level presentation: a generator, or a combination of weight-k monomials."""
    if pres is None:
        return "form"
    prec = min(f.prec, pres.precision)
    target = f.truncate(prec)
    for g in pres.generators:
        if g.weight == k and g.expansion.truncate(prec) == target:
            return g.name
    monos = pres.monomials.get(k, ())
    if not monos:
        return "form"
    evals = [pres.evaluate_monomial(m).truncate(prec) for m in monos]
    try:
        coords = express(target, echelonize(evals))
    except NotInSpan:
        return "form"
    names = pres.names
    pieces = []
    for c, mono in zip(coords, monos):
        if int(c):
            text = _monomial_text(mono, names)
            pieces.append(text if int(c) == 1 else f"{int(c)}*{text}")
    return " + ".join(pieces)


def oldform_scan(
    gen: Generator | QExpansion,
    n: int,
    p: int,
    weight: int | None = None,
    lower_presentations: dict[int, RingPresentation] | None = None,
    fixtures=None,
) -> OldformMatch | None:
    """Find d > 1 and f of level N/d with gen = f(q^d), certified by Sturm bounds."""
    f = gen.expansion if isinstance(gen, Generator) else gen
    k = gen.weight if isinstance(gen, Generator) else weight
    if k is None:
        raise PreconditionError("weight is required for a bare q-expansion")
    t = f.prec
    if t < sturm_bound(k, n):
        raise PrecisionError("expansion precision is below the Sturm bound")
    for d in sorted(divisors(n)[1:], reverse=True):
        if any(f.coeffs[j] for j in range(t + 1) if j % d):
            continue
        m = n // d
        short = t // d
        if short < sturm_bound(k, m):
            continue
        source = QExpansion(f.coeffs[::d][: short + 1], p)
        if dim_modp(m, p, k) == 0:
            continue
        if not _lower_space(m, p, k, short, fixtures).contains(source):
            continue
        pres = (lower_presentations or {}).get(m)
        return OldformMatch(m, d, source, _describe(source, k, pres))
    return None
