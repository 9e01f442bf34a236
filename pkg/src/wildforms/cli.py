"""Command-line front end: ``wildforms {analyze,ring,ethereal,jump}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .charzero import FIXTURE_ENV
from .errors import PreconditionError, WildformsError
from .ethereal import (
    build_presentation,
    ethereal_representatives,
    modp_space,
    oldform_scan,
    reduced_space,
    working_precision,
)
from .exactnum import divisors
from .modcurve import CONSERVATION_NOTE, effective_characteristic, ethereal_report, stacky_model
from .qseries import QExpansion
from .stacky import (
    cartan_chain,
    jump_by_euler_conservation,
    level_one_cover,
    presentation_bounds,
    prime_level_cover,
    solve_jump,
)

FORMATS = ("text", "json-lines")


@dataclass(frozen=True)
class RunConfig:
    command: str
    level: int | None = None
    characteristic: int = 0
    max_weight: int = 12
    precision: int | None = None
    fixtures: str | None = None
    output: str = "text"
    odd: bool = False

    def __post_init__(self) -> None:
        if self.output not in FORMATS:
            raise PreconditionError(f"unknown format {self.output!r}")
        effective_characteristic(self.characteristic)


# ---------------------------------------------------------------------------
# Serialization


def series_to_text(f: QExpansion) -> str:
    """Sparse ``exponent:coefficient`` pairs separated by spaces."""
    return " ".join(f"{n}:{c}" for n, c in sorted(f.terms().items()))


def series_from_text(text: str, prec: int, modulus: int = 0) -> QExpansion:
    terms = {}
    for pair in text.split():
        exp, coef = pair.split(":")
        terms[int(exp)] = Fraction(coef) if not modulus else int(coef)
    return QExpansion.from_dict(terms, prec, modulus)


def series_record(f: QExpansion) -> dict:
    return {"modulus": f.modulus, "prec": f.prec, "terms": series_to_text(f)}


def series_from_record(rec: dict) -> QExpansion:
    return series_from_text(rec["terms"], rec["prec"], rec["modulus"])


def dump_record(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def format_series(f: QExpansion, limit: int | None = None) -> str:
    terms = sorted(f.terms().items())
    shown = terms if limit is None else terms[:limit]
    parts = []
    for n, c in shown:
        mono = "1" if n == 0 else ("q" if n == 1 else f"q^{n}")
        if n == 0:
            parts.append(str(c))
        else:
            parts.append(mono if c == 1 else f"{c}*{mono}")
    if limit is not None and len(terms) > limit:
        parts.append("...")
    parts.append(f"O(q^{f.prec + 1})")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Commands (each yields records; the renderer picks text or JSON)


def cmd_analyze(n: int, p: int) -> Iterator[dict]:
    model = stacky_model(n, p)
    sig = model.signature
    gen_deg, rel_deg = presentation_bounds(sig)
    log_k = model.log_canonical
    rec = {
        "record": "analyze",
        "level": n,
        "char": model.characteristic,
        "genus": model.genus,
        "cusps": model.cusps,
        "census": model.census(),
        "points": [
            {
                "label": pt.label,
                "order": pt.order,
                "tame": pt.tame,
                "jumps": list(pt.jumps),
                "coefficient": str(pt.coefficient),
                "note": pt.note,
            }
            for pt in model.points
        ],
        "canonical_degree": str(model.canonical.degree),
        "log_canonical": log_k.render(),
        "log_canonical_degree": str(log_k.degree),
        "signature": [model.genus, [str(c) for c in sig.coefficients], sig.delta],
        "generator_weight_bound": 2 * gen_deg,
        "relation_weight_bound": 2 * rel_deg,
    }
    if model.characteristic in (2, 3):
        rep = ethereal_report(n, model.characteristic)
        rec["ethereal_count"] = rep.count
        rec["ethereal_criterion"] = rep.criterion
    yield rec


def cmd_ring(n: int, p: int, max_weight: int, t: int | None, odd: bool, fixtures: str | None) -> Iterator[dict]:
    pres = build_presentation(n, p, max_weight, t, odd=odd, fixtures=fixtures)
    yield {
        "record": "ring",
        "level": n,
        "char": p,
        "precision": pres.precision,
        "max_weight": max_weight,
        "dimensions": {str(w): d for w, d in pres.dimensions.items()},
    }
    for g in pres.generators:
        yield {
            "record": "generator",
            "name": g.name,
            "weight": g.weight,
            "ethereal": g.ethereal,
            "provenance": g.provenance,
            "series": series_record(g.expansion),
        }
    names = pres.names
    for rel in pres.relations:
        yield {
            "record": "relation",
            "weight": rel.weight,
            "text": pres.relation_text(rel),
            "terms": [[c, [names[i] for i in mono]] for c, mono in rel.terms()],
        }


def _lower_presentations(n: int, p: int, fixtures: str | None) -> dict:
    return {m: build_presentation(m, p, 4, fixtures=fixtures) for m in divisors(n)[:-1]}


def cmd_ethereal(n: int, p: int, t: int, fixtures: str | None) -> Iterator[dict]:
    if p not in (2, 3):
        raise PreconditionError("ethereal forms are computed for p = 2 or 3")
    if n % p == 0:
        raise PreconditionError(f"p = {p} divides N = {n}")
    lifted = reduced_space(n, 2, p, t, fixtures)
    reps = ethereal_representatives(modp_space(n, p, 2, t, fixtures), lifted)
    lower = _lower_presentations(n, p, fixtures) if reps and n > 1 else {}
    yield {"record": "ethereal", "level": n, "char": p, "precision": t, "count": len(reps)}
    for i, f in enumerate(reps, 1):
        name = "y2" if len(reps) == 1 else f"y2_{i}"
        match = oldform_scan(f, n, p, weight=2, lower_presentations=lower, fixtures=fixtures) if n > 1 else None
        yield {
            "record": "ethereal_form",
            "name": name,
            "weight": 2,
            "series": series_record(f),
            "oldform": None
            if match is None
            else {"level": match.lower_level, "d": match.dilation, "source": match.source_name},
        }


def cmd_jump(kind: str, value: int | None, p: int) -> Iterator[dict]:
    if kind == "cartan":
        b, a = cartan_chain()
        yield {"record": "jump", "cover": "X(3) over X_ns(3)^rig", "b": str(b.multiplicity)}
        yield {"record": "jump", "cover": "X_ns(3) over X_ns^+(3)^rig", "a": str(a.multiplicity)}
        return
    if value is None:
        raise PreconditionError(f"jump {kind} needs a level")
    if kind == "level1":
        inst = level_one_cover(value, p)
        colliding = [Fraction(1, 2), Fraction(2, 3)]
    else:
        inst = prime_level_cover(value, p)
        colliding = [Fraction(1, 2)] * 2 if p == 2 else [Fraction(2, 3)] * 2
    sol = solve_jump(inst)
    check = jump_by_euler_conservation(colliding, inst.group_order, inst.wild_order, p)  # type: ignore[arg-type]
    yield {
        "record": "jump",
        "cover": inst.name,
        "a": str(sol.multiplicity),
        "coefficient": str(sol.coefficient),
        "m": sol.jump,
        "conservation_m": check.jump,
        "agree": check.jump == sol.jump and check.coefficient == sol.coefficient,
    }


# ---------------------------------------------------------------------------
# Rendering


def render_text(rec: dict) -> list[str]:
    kind = rec["record"]
    if kind == "analyze":
        lines = [
            f"level {rec['level']}, characteristic {rec['char']}",
            f"coarse genus {rec['genus']}, cusps {rec['cusps']}",
            f"stacky points: {rec['census']}",
        ]
        if any(pt["note"] == CONSERVATION_NOTE for pt in rec["points"]):
            lines.append(f"wild jumps {CONSERVATION_NOTE}")
        coeffs = ", ".join(rec["signature"][1])
        lines += [
            f"deg K = {rec['canonical_degree']}",
            f"K + Delta = {rec['log_canonical']} (degree {rec['log_canonical_degree']})",
            f"refined signature ({rec['signature'][0]}; {coeffs}; {rec['signature'][2]})",
            f"generators in weights <= {rec['generator_weight_bound']}, "
            f"relations in weights <= {rec['relation_weight_bound']}",
        ]
        if "ethereal_count" in rec:
            lines.append(f"ethereal weight-2 forms: {rec['ethereal_count']} ({rec['ethereal_criterion']})")
        return lines
    if kind == "ring":
        dims = " ".join(f"{w}:{d}" for w, d in sorted(rec["dimensions"].items(), key=lambda kv: int(kv[0])))
        return [
            f"mod {rec['char']} modular forms of level {rec['level']} through weight {rec['max_weight']}"
            f" (precision {rec['precision']})",
            f"dimensions {dims}",
        ]
    if kind in ("generator", "ethereal_form"):
        f = series_from_record(rec["series"])
        tag = ", ethereal" if rec.get("ethereal") else ""
        head = f"{rec['name']} (weight {rec['weight']}{tag})"
        if "provenance" in rec:
            head += f" [{rec['provenance']}]"
        lines = [f"{head}: {format_series(f, None if kind == 'ethereal_form' else 12)}"]
        if kind == "ethereal_form":
            old = rec["oldform"]
            lines.append(
                "  new at this level"
                if old is None
                else f"  oldform: V_{old['d']} of {old['source']} from level {old['level']}"
            )
        return lines
    if kind == "relation":
        return [f"relation (weight {rec['weight']}): {rec['text']}"]
    if kind == "ethereal":
        return [f"level {rec['level']}, p = {rec['char']}: {rec['count']} ethereal weight-2 generator(s)"]
    if kind == "jump":
        fields = [f"{k} = {rec[k]}" for k in ("a", "b", "coefficient", "m") if k in rec]
        line = f"{rec['cover']}: " + ", ".join(fields)
        if "agree" in rec:
            line += f"; conservation gives m = {rec['conservation_m']} ({'agrees' if rec['agree'] else 'DISAGREES'})"
        return [line]
    raise ValueError(f"unknown record kind {kind}")


def emit(records: Iterator[dict], fmt: str, out) -> None:
    for rec in records:
        if fmt == "json-lines":
            out.write(dump_record(rec) + "\n")
        else:
            for line in render_text(rec):
                out.write(line + "\n")


# ---------------------------------------------------------------------------
# Argument parsing


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wildforms", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--char", type=int, default=0, dest="characteristic")
    common.add_argument("--format", choices=FORMATS, default="text", dest="output")
    common.add_argument("--fixtures", default=None, help=f"fixture directory (default: ${FIXTURE_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", parents=[common], help="stacky model and ethereal count")
    p_an.add_argument("level", type=int)

    p_ring = sub.add_parser("ring", parents=[common], help="presentation of the ring of mod-p forms")
    p_ring.add_argument("level", type=int)
    p_ring.add_argument("--max-weight", type=int, default=12)
    p_ring.add_argument("--prec", type=int, default=None)
    p_ring.add_argument("--odd", action="store_true", help="include odd weights (level 1, p = 2)")

    p_eth = sub.add_parser("ethereal", parents=[common], help="q-expansions of weight-2 ethereal forms")
    p_eth.add_argument("level", type=int)
    p_eth.add_argument("--prec", type=int, default=None)

    p_jump = sub.add_parser("jump", parents=[common], help="ramification jumps from covers")
    p_jump.add_argument("kind", choices=("level1", "prime", "cartan"))
    p_jump.add_argument("value", type=int, nargs="?", help="ell for level1, N for prime")
    return parser


def _min_precision(cfg: RunConfig, weight: int) -> int:
    floor = working_precision(cfg.level, weight)  # type: ignore[arg-type]
    if cfg.precision is None:
        return floor
    if cfg.precision < floor:
        raise PreconditionError(f"--prec {cfg.precision} is below the certified minimum {floor}")
    return cfg.precision


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = _parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            level=getattr(args, "level", None),
            characteristic=args.characteristic,
            max_weight=getattr(args, "max_weight", 12),
            precision=getattr(args, "prec", None),
            fixtures=args.fixtures or os.environ.get(FIXTURE_ENV),
            output=args.output,
            odd=getattr(args, "odd", False),
        )
        p = effective_characteristic(cfg.characteristic)
        if cfg.command == "analyze":
            records = cmd_analyze(cfg.level, cfg.characteristic)  # type: ignore[arg-type]
        elif cfg.command == "ring":
            t = _min_precision(cfg, cfg.max_weight)
            records = cmd_ring(cfg.level, cfg.characteristic, cfg.max_weight, t, cfg.odd, cfg.fixtures)  # type: ignore[arg-type]
        elif cfg.command == "ethereal":
            t = _min_precision(cfg, 4)
            records = cmd_ethereal(cfg.level, cfg.characteristic, t, cfg.fixtures)  # type: ignore[arg-type]
        else:
            records = cmd_jump(args.kind, args.value, p)
        emit(list(records), cfg.output, out)
    except WildformsError as exc:
        sys.stderr.write(f"error [{type(exc).__name__}]: {exc}\n")
        return exc.exit_code
    return 0


def main() -> None:
    sys.exit(run())
