"""Manifest-driven command line: validate, annihilator, classify, darboux,
reduce, and the named check suites.

Manifests are strict JSON (format "sheafplectic-manifest/1").  Rational
entries are strings like "3/2" or "-1"; prime-field entries are plain
integers reduced modulo p.  The machine report is line-delimited JSON with
a fixed key order and no timing, so identical inputs produce byte-identical
output; the human rendering adds timing.

Exit codes: 0 pass, 1 fail (with the witness in the report), 2 usage,
3 unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .exactalg import Matrix, PrimeField, QQ, Subspace
from .space import FiniteSpace, UnknownPoint, validate_topology
from .sheaf import FreeModuleSheaf, MorphismSheaf, Section, SubmoduleSheaf
from .pairing import PairingSheaf, annihilator
from .symplectic import (
    BadSeed,
    NoAdmissibleNeighborhood,
    NotCoisotropic,
    RankNotConstant,
    SymplecticModule,
    TwoFormSheaf,
    ZeroFormAt,
    classify,
    darboux,
    reduce as reduce_module,
)
from .suites import SUITES, run_suite

MANIFEST_FORMAT = "sheafplectic-manifest/1"
DEFAULT_MAX_POINTS = 12
MAX_OPENS = 64
COMMANDS = ("validate", "annihilator", "classify", "darboux", "reduce", "check")


class ParseError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__("parse error at %d:%d: %s" % (line, col, message))
        self.line = line
        self.col = col
        self.message = message


class ValidationError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__("invalid manifest at %s: %s" % (path, message))
        self.path = path
        self.message = message


class UnknownName(ValueError):
    def __init__(self, symbol: str):
        super().__init__("unknown name: %s" % symbol)
        self.symbol = symbol


@dataclass
class Manifest:
    space: FiniteSpace
    field: object
    rank: int
    form: Optional[TwoFormSheaf]
    pairings: Dict[str, PairingSheaf]
    submodules: Dict[str, SubmoduleSheaf]
    morphisms: Dict[str, MorphismSheaf]

    @property
    def module(self) -> FreeModuleSheaf:
        return FreeModuleSheaf(self.space, self.field, self.rank)


def _point_cap() -> int:
    cap = DEFAULT_MAX_POINTS
    env = os.environ.get("SHEAFPLECTIC_MAX_POINTS")
    if env is not None:
        try:
            cap = min(cap, int(env))
        except ValueError:
            pass
    return cap


def _parse_scalar(field, path: str, value):
    try:
        return field.parse(value)
    except ValueError as exc:
        raise ParseError(0, 0, "%s: %s" % (path, exc))


def _parse_matrix(field, path: str, value, cols: int,
                  rows: Optional[int] = None) -> Matrix:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise ValidationError(path, "matrix must be a list of rows")
    if rows is not None and len(value) != rows:
        raise ValidationError(path, "expected %d rows, got %d" % (rows, len(value)))
    parsed = []
    for i, row in enumerate(value):
        if len(row) != cols:
            raise ValidationError("%s[%d]" % (path, i),
                                  "expected %d entries, got %d" % (cols, len(row)))
        parsed.append([_parse_scalar(field, "%s[%d][%d]" % (path, i, j), v)
                       for j, v in enumerate(row)])
    return Matrix.from_rows(field, parsed, cols=cols)


def _require_point_map(space: FiniteSpace, path: str, value) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(path, "must map point names to matrices")
    missing = set(space.points) - set(value)
    extra = set(value) - set(space.points)
    if missing:
        raise ValidationError(path, "missing point %r" % sorted(missing)[0])
    if extra:
        raise ValidationError(path, "unknown point %r" % sorted(extra)[0])
    return value


def parse_manifest(text: str) -> Manifest:
    """Parse and fully validate a manifest; every invariant is enforced here."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.colno, exc.msg)
    if not isinstance(doc, dict):
        raise ValidationError("$", "top level must be an object")
    allowed = {"format", "space", "field", "rank", "form", "pairings",
               "submodules", "morphisms"}
    for key in doc:
        if key not in allowed:
            raise ValidationError(key, "unknown section")
    if doc.get("format") != MANIFEST_FORMAT:
        raise ValidationError("format", "expected %r" % MANIFEST_FORMAT)

    spc = doc.get("space")
    if not isinstance(spc, dict) or set(spc) != {"points", "opens"}:
        raise ValidationError("space", "needs exactly 'points' and 'opens'")
    points = spc["points"]
    if not isinstance(points, list) or \
            not all(isinstance(p, str) for p in points):
        raise ValidationError("space.points", "must be a list of names")
    if len(points) > _point_cap():
        raise ValidationError("space.points",
                              "%d points exceed the cap of %d"
                              % (len(points), _point_cap()))
    opens = spc["opens"]
    if not isinstance(opens, list) or \
            not all(isinstance(o, list) for o in opens):
        raise ValidationError("space.opens", "must be a list of point lists")
    try:
        space = FiniteSpace(points, opens)
    except (UnknownPoint, ValueError) as exc:
        raise ValidationError("space", str(exc))
    if len(space.opens) > MAX_OPENS:
        raise ValidationError("space.opens", "%d opens exceed the cap of %d"
                              % (len(space.opens), MAX_OPENS))
    topo = validate_topology(space)
    if not topo.ok:
        raise ValidationError("space", str(topo))

    fld = doc.get("field")
    if fld == "Q":
        field = QQ
    elif isinstance(fld, dict) and set(fld) == {"Fp"}:
        try:
            field = PrimeField(fld["Fp"])
        except (TypeError, ValueError) as exc:
            raise ValidationError("field.Fp", str(exc))
    else:
        raise ValidationError("field", "must be \"Q\" or {\"Fp\": prime}")

    rank = doc.get("rank")
    if not isinstance(rank, int) or isinstance(rank, bool) or rank < 0:
        raise ValidationError("rank", "must be a non-negative integer")
    module = FreeModuleSheaf(space, field, rank)

    form = None
    if "form" in doc:
        data = _require_point_map(space, "form", doc["form"])
        coeff = {}
        for x in space.points:
            m = _parse_matrix(field, "form.%s" % x, data[x], rank, rows=rank)
            for i in range(rank):
                if m.entries[i][i]:
                    raise ValidationError("form.%s" % x, "diagonal must be zero")
            if not m.is_skew():
                raise ValidationError("form.%s" % x, "matrix must be skew")
            coeff[x] = m
        form = TwoFormSheaf(module, coeff)

    pairings = {}
    if "pairings" in doc:
        if not isinstance(doc["pairings"], dict):
            raise ValidationError("pairings", "must map names to gram families")
        for name in sorted(doc["pairings"]):
            data = _require_point_map(space, "pairings.%s" % name,
                                      doc["pairings"][name])
            gram = {x: _parse_matrix(field, "pairings.%s.%s" % (name, x),
                                     data[x], rank, rows=rank)
                    for x in space.points}
            pairings[name] = PairingSheaf(module, module, gram)

    submodules = {}
    if "submodules" in doc:
        if not isinstance(doc["submodules"], dict):
            raise ValidationError("submodules", "must map names to stalk bases")
        for name in sorted(doc["submodules"]):
            data = _require_point_map(space, "submodules.%s" % name,
                                      doc["submodules"][name])
            stalks = {}
            for x in space.points:
                rows = data[x]
                if not isinstance(rows, list):
                    raise ValidationError("submodules.%s.%s" % (name, x),
                                          "must be a list of basis rows")
                m = _parse_matrix(field, "submodules.%s.%s" % (name, x),
                                  rows, rank)
                stalks[x] = Subspace.span(field, rank, m.entries)
            submodules[name] = SubmoduleSheaf(module, stalks)

    morphisms = {}
    if "morphisms" in doc:
        if not isinstance(doc["morphisms"], dict):
            raise ValidationError("morphisms", "must map names to matrix families")
        for name in sorted(doc["morphisms"]):
            data = _require_point_map(space, "morphisms.%s" % name,
                                      doc["morphisms"][name])
            mats = {}
            height = None
            for x in space.points:
                m = _parse_matrix(field, "morphisms.%s.%s" % (name, x),
                                  data[x], rank)
                if height is None:
                    height = m.rows
                elif m.rows != height:
                    raise ValidationError("morphisms.%s.%s" % (name, x),
                                          "row count differs between points")
                mats[x] = m
            morphisms[name] = MorphismSheaf(module, module, mats)

    return Manifest(space, field, rank, form, pairings, submodules, morphisms)


def _format_scalar(field, a):
    return field.format(a)


def _format_matrix(field, m: Matrix) -> list:
    return [[_format_scalar(field, a) for a in row] for row in m.entries]


def emit_manifest(m: Manifest) -> str:
    """Canonical manifest text; parse . emit is the identity on parses."""
    doc = {
        "format": MANIFEST_FORMAT,
        "space": {"points": list(m.space.points),
                  "opens": [sorted(o) for o in m.space.opens]},
        "field": "Q" if m.field == QQ else {"Fp": m.field.p},
        "rank": m.rank,
    }
    if m.form is not None:
        doc["form"] = {x: _format_matrix(m.field, m.form.coeff[x])
                       for x in m.space.points}
    if m.pairings:
        doc["pairings"] = {name: {x: _format_matrix(m.field, p.gram[x])
                                  for x in m.space.points}
                           for name, p in sorted(m.pairings.items())}
    if m.submodules:
        doc["submodules"] = {name: {x: _format_matrix(m.field,
                                                      f.stalks[x].matrix())
                                    for x in m.space.points}
                             for name, f in sorted(m.submodules.items())}
    if m.morphisms:
        doc["morphisms"] = {name: {x: _format_matrix(m.field, mor.mats[x])
                                   for x in m.space.points}
                           for name, mor in sorted(m.morphisms.items())}
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# commands

def _open_names(space: FiniteSpace, u: int) -> list:
    return sorted(space.opens[u])


def _cmd_validate(m: Manifest, args) -> Tuple[int, List[dict]]:
    rec = {
        "command": "validate",
        "verdict": "pass",
        "points": len(m.space.points),
        "opens": len(m.space.opens),
        "field": "Q" if m.field == QQ else "F%d" % m.field.p,
        "rank": m.rank,
        "form": m.form is not None,
        "pairings": sorted(m.pairings),
        "submodules": sorted(m.submodules),
        "morphisms": sorted(m.morphisms),
    }
    return 0, [rec]


def _cmd_annihilator(m: Manifest, args) -> Tuple[int, List[dict]]:
    if args.pairing not in m.pairings:
        raise UnknownName(args.pairing)
    if args.sub not in m.submodules:
        raise UnknownName(args.sub)
    perp = annihilator(m.pairings[args.pairing], m.submodules[args.sub])
    rec = {
        "command": "annihilator",
        "verdict": "value",
        "pairing": args.pairing,
        "sub": args.sub,
        "stalks": {x: _format_matrix(m.field, perp.stalks[x].matrix())
                   for x in m.space.points},
        "dims": {x: perp.stalks[x].dim for x in m.space.points},
    }
    return 0, [rec]


def _symplectic_of(m: Manifest) -> SymplecticModule:
    if m.form is None:
        raise UnknownName("form")
    return SymplecticModule(m.module, m.form)


def _cmd_classify(m: Manifest, args) -> Tuple[int, List[dict]]:
    if args.sub not in m.submodules:
        raise UnknownName(args.sub)
    sm = _symplectic_of(m)
    c = classify(sm, m.submodules[args.sub])
    rec = {
        "command": "classify",
        "verdict": "value",
        "sub": args.sub,
        "isotropic": c.isotropic,
        "coisotropic": c.coisotropic,
        "symplectic_sub": c.symplectic_sub,
        "lagrangian": c.lagrangian,
    }
    if c.isotropic_complement is not None:
        rec["isotropic_complement"] = {
            x: _format_matrix(m.field, c.isotropic_complement.stalks[x].matrix())
            for x in m.space.points}
    return 0, [rec]


def _cmd_darboux(m: Manifest, args) -> Tuple[int, List[dict]]:
    if m.form is None:
        raise UnknownName("form")
    if args.at not in m.space.points:
        raise UnknownName(args.at)
    seed = None
    if args.seed is not None:
        if args.seed not in m.morphisms:
            raise UnknownName(args.seed)
        mor = m.morphisms[args.seed]
        heights = {mor.mats[x].rows for x in m.space.points}
        if heights != {1}:
            raise BadSeed("seed %r must be a single covector row per point"
                          % args.seed)
        full = m.space.index_of(m.space.points)
        seed = Section(full, {x: mor.mats[x].row(0) for x in m.space.points})
    res = darboux(m.form, args.at, seed=seed, abs_normalize=args.abs_normalize)
    rec = {
        "command": "darboux",
        "verdict": "pass",
        "at": args.at,
        "neighborhood": _open_names(m.space, res.neighborhood),
        "half_rank": res.half_rank,
        "pairs": [
            {"first": {x: [_format_scalar(m.field, a) for a in s1.values[x]]
                       for x in m.space.member_points(res.neighborhood)},
             "second": {x: [_format_scalar(m.field, a) for a in s2.values[x]]
                        for x in m.space.member_points(res.neighborhood)}}
            for s1, s2 in res.pairs],
        "pivots": [list(step) for step in res.pivots],
        "permutation": list(res.permutation),
    }
    return 0, [rec]


def _cmd_reduce(m: Manifest, args) -> Tuple[int, List[dict]]:
    if args.sub not in m.submodules:
        raise UnknownName(args.sub)
    sm = _symplectic_of(m)
    f = m.submodules[args.sub]
    if not classify(sm, f).coisotropic:
        raise NotCoisotropic("submodule %r is not co-isotropic" % args.sub)
    red = reduce_module(sm, f)
    rec = {
        "command": "reduce",
        "verdict": "pass",
        "sub": args.sub,
        "reduced_dims": {x: red.reduced_dim(x) for x in m.space.points},
        "reduced_form": {x: _format_matrix(m.field, red.reduced_form[x])
                         for x in m.space.points},
    }
    return 0, [rec]


def _cmd_check(m: Manifest, args) -> Tuple[int, List[dict]]:
    if args.suite not in SUITES:
        raise UnknownName(args.suite)
    records = run_suite(args.suite, m, args.seed_rng)
    out = []
    ok_all = True
    for r in records:
        out.append({"command": "check", "suite": args.suite,
                    "check": r["check"],
                    "verdict": "pass" if r["ok"] else "fail",
                    "detail": r["detail"]})
        ok_all = ok_all and r["ok"]
    out.append({"command": "check", "suite": args.suite,
                "verdict": "pass" if ok_all else "fail",
                "checks": len(records)})
    return (0 if ok_all else 1), out


_DISPATCH = {
    "validate": _cmd_validate,
    "annihilator": _cmd_annihilator,
    "classify": _cmd_classify,
    "darboux": _cmd_darboux,
    "reduce": _cmd_reduce,
    "check": _cmd_check,
}


def run_command(m: Manifest, cmd: str, args) -> Tuple[int, List[dict]]:
    """Dispatch one command; math failures come back as fail reports."""
    try:
        return _DISPATCH[cmd](m, args)
    except (UnknownName, BadSeed, ZeroFormAt, NoAdmissibleNeighborhood,
            NotCoisotropic, RankNotConstant, ValueError) as exc:
        rec = {"command": cmd, "verdict": "fail",
               "error": type(exc).__name__, "witness": str(exc)}
        return 1, [rec]


def _render(records: List[dict], human: bool, elapsed: float) -> str:
    if not human:
        return "".join(json.dumps(r) + "\n" for r in records)
    lines = []
    for r in records:
        verdict = r.get("verdict", "")
        head = r.get("command", "")
        rest = {k: v for k, v in r.items() if k not in ("command", "verdict")}
        lines.append("[%s] %s %s" % (verdict, head,
                                     json.dumps(rest) if rest else ""))
    lines.append("elapsed: %.3fs" % elapsed)
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheafplectic",
        description="exact sheaf-module algebra over finite spaces")
    parser.add_argument("--manifest", "-m", required=True,
                        help="path to a sheafplectic-manifest/1 JSON file")
    parser.add_argument("--human", action="store_true",
                        help="human-readable report instead of JSON lines")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate")
    p_ann = sub.add_parser("annihilator")
    p_ann.add_argument("--pairing", required=True)
    p_ann.add_argument("--sub", required=True)
    p_cls = sub.add_parser("classify")
    p_cls.add_argument("--sub", required=True)
    p_dar = sub.add_parser("darboux")
    p_dar.add_argument("--at", required=True)
    p_dar.add_argument("--seed", default=None,
                       help="name of a 1-row morphism used as seed covector")
    p_dar.add_argument("--abs-normalize", action="store_true",
                       dest="abs_normalize")
    p_red = sub.add_parser("reduce")
    p_red.add_argument("--sub", required=True)
    p_chk = sub.add_parser("check")
    p_chk.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_chk.add_argument("--seed-rng", type=int, default=0, dest="seed_rng")
    return parser


def main(argv=None) -> int:
    started = time.monotonic()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with open(args.manifest, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        sys.stdout.write(json.dumps({"command": args.command,
                                     "verdict": "fail",
                                     "error": "InputError",
                                     "witness": str(exc)}) + "\n")
        return 3
    try:
        manifest = parse_manifest(text)
    except (ParseError, ValidationError) as exc:
        sys.stdout.write(json.dumps({"command": args.command,
                                     "verdict": "fail",
                                     "error": type(exc).__name__,
                                     "witness": str(exc)}) + "\n")
        return 3
    code, records = run_command(manifest, args.command, args)
    sys.stdout.write(_render(records, args.human, time.monotonic() - started))
    return code


if __name__ == "__main__":
    sys.exit(main())
