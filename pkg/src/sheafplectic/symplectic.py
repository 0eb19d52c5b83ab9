"""Alternating 2-forms on free module sheaves: contraction, the flat map,
constant-rank checks, constructive Darboux decompositions, classification
of sub-sheaves and symplectic reduction.

Covectors are sections whose point values are row vectors; a 2-form is a
family of skew coefficient matrices with zero diagonal (alternating even in
characteristic two).  The Darboux routine fixes its pivots at the requested
point and then keeps exactly the largest open neighbourhood on which every
pivot stays nonzero and the residual dies; on a finite space that floor is
the minimal open of the point, and failure there is reported with the
offending witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .exactalg import (
    Field,
    Matrix,
    Subspace,
    coordinates_in,
    kernel_basis,
    rank_of,
    solve,
    subspace_intersection,
    subspace_sum,
)
from .sheaf import (
    FreeModuleSheaf,
    MorphismSheaf,
    ParentMismatch,
    QuotientSheaf,
    Section,
    SubmoduleSheaf,
    quotient,
    quotient_within,
)
from .pairing import PairingSheaf, annihilator
from .space import FiniteSpace, UnknownPoint


class RankMismatch(ValueError):
    pass


class RankNotConstant(ValueError):
    def __init__(self, x: str, y: str):
        super().__init__("form rank differs between points %r and %r" % (x, y))
        self.points = (x, y)


class ZeroFormAt(ValueError):
    def __init__(self, x: str):
        super().__init__("the form vanishes at point %r" % x)
        self.point = x


class NoAdmissibleNeighborhood(ValueError):
    def __init__(self, x: str, witness: str):
        super().__init__("no neighbourhood of %r works: pivot or rank fails "
                         "at %r inside the minimal open" % (x, witness))
        self.point = x
        self.witness = witness


class BadSeed(ValueError):
    pass


class NotLagrangian(ValueError):
    pass


class NotCoisotropic(ValueError):
    pass


class TwoFormSheaf:
    """Skew coefficient matrices, one per point, with zero diagonal."""

    def __init__(self, module: FreeModuleSheaf, coeff: Dict[str, Matrix]):
        n = module.rank
        for x in module.space.points:
            a = coeff.get(x)
            if a is None:
                raise ValueError("missing coefficient matrix at point %r" % x)
            if (a.rows, a.cols) != (n, n):
                raise ValueError("coefficients at %r are %dx%d, rank is %d"
                                 % (x, a.rows, a.cols, n))
            if not a.is_skew():
                raise ValueError("coefficients at %r are not alternating" % x)
        self.module = module
        self.coeff = dict(coeff)

    @property
    def space(self) -> FiniteSpace:
        return self.module.space

    @property
    def field(self) -> Field:
        return self.module.field

    def evaluate(self, s: Section, t: Section) -> Dict[str, object]:
        if s.over != t.over:
            raise ValueError("sections live over different opens")
        out = {}
        for x in s.values:
            row = self.coeff[x].vec_mat(s.values[x])
            acc = self.field.zero
            for a, b in zip(row, t.values[x]):
                acc = acc + a * b
            out[x] = acc
        return out

    def pairing(self) -> PairingSheaf:
        return PairingSheaf(self.module, self.module, dict(self.coeff))


def contract(w: TwoFormSheaf, s: Section) -> Section:
    """Inner product with a section: the covector t -> w(s, t)."""
    for x, v in s.values.items():
        if len(v) != w.module.rank:
            raise RankMismatch("section value at %r has length %d, rank is %d"
                               % (x, len(v), w.module.rank))
    return Section(s.over, {x: w.coeff[x].vec_mat(v) for x, v in s.values.items()})


def evaluate_covector(eta: Section, s: Section, field: Field) -> Dict[str, object]:
    """Inner product in degree one: plain evaluation of a covector."""
    if eta.over != s.over:
        raise ValueError("sections live over different opens")
    out = {}
    for x in eta.values:
        acc = field.zero
        for a, b in zip(eta.values[x], s.values[x]):
            acc = acc + a * b
        out[x] = acc
    return out


@dataclass
class FlatResult:
    """The lowering map of a 2-form with its image, kernel and quotient."""

    map: MorphismSheaf
    image: SubmoduleSheaf            # row-functional stalks of the image
    kernel: SubmoduleSheaf
    quotient: QuotientSheaf          # module / kernel
    projection: MorphismSheaf
    iso: Dict[str, Matrix]           # quotient coords -> image coords, invertible


def flat(w: TwoFormSheaf) -> FlatResult:
    """s -> -i(s)w as a map into the dual; kernel and image stalkwise.

    For skew coefficients the matrix is the coefficient matrix itself.  The
    quotient by the kernel is identified with the image through an explicit
    pointwise isomorphism.
    """
    e = w.module
    field = e.field
    mats = {x: w.coeff[x] for x in e.space.points}
    image = SubmoduleSheaf(e, {x: Subspace.span(field, e.rank, w.coeff[x].entries)
                               for x in e.space.points})
    kernel = SubmoduleSheaf(e, {x: kernel_basis(w.coeff[x])
                                for x in e.space.points})
    quot, proj = quotient(e, kernel)
    iso = {}
    for x in e.space.points:
        cols = []
        for rep in quot.complements[x].basis:
            lowered = w.coeff[x].mat_vec(rep)
            coords = coordinates_in(image.stalks[x], lowered)
            if coords is None:
                raise RuntimeError("lowered representative escaped the image at %r" % x)
            cols.append(coords)
        d = quot.stalk_dim(x)
        iso[x] = Matrix.from_rows(field,
                                  [tuple(col[i] for col in cols) for i in range(d)],
                                  cols=d)
        if d and rank_of(iso[x]) != d:
            raise RuntimeError("quotient-image comparison is singular at %r" % x)
    return FlatResult(MorphismSheaf(e, e, mats), image, kernel, quot, proj, iso)


def form_rank(w: TwoFormSheaf, u: int) -> int:
    """Common rank of the coefficients over a nonempty open; even by skewness."""
    pts = w.space.member_points(u)
    if not pts:
        raise ValueError("rank over the empty open is undefined")
    ranks = [(x, rank_of(w.coeff[x])) for x in pts]
    first_x, first_r = ranks[0]
    for x, r in ranks[1:]:
        if r != first_r:
            raise RankNotConstant(first_x, x)
    return first_r


# ---------------------------------------------------------------------------
# Darboux decomposition

@dataclass
class DarbouxResult:
    """Covector pairs reconstructing the form on a neighbourhood.

    ``pivots`` traces each elimination step; ``permutation`` records the
    basis reordering implied by entry pivots so runs are reproducible.
    """

    at: str
    neighborhood: int
    pairs: List[Tuple[Section, Section]]
    half_rank: int
    pivots: tuple
    permutation: tuple


def _wedge_coeff(field: Field, a: Sequence, b: Sequence) -> Matrix:
    n = len(a)
    rows = [tuple(a[i] * b[j] - b[i] * a[j] for j in range(n)) for i in range(n)]
    return Matrix.from_rows(field, rows, cols=n)


def _first_nonzero_entry(m: Matrix) -> Optional[Tuple[int, int]]:
    for i in range(m.rows):
        for j in range(i + 1, m.cols):
            if m.entries[i][j]:
                return (i, j)
    return None


def _replay(field: Field, a: Matrix, steps: tuple, seed_row: Optional[tuple],
            abs_normalize: bool):
    """Run a fixed pivot program at one point.

    Returns ``(ok, pairs, residual)``; ``ok`` is False as soon as a pivot
    vanishes.  Reconstruction at the point holds exactly when the final
    residual is zero.
    """
    resid = a
    pairs = []
    for step in steps:
        if step[0] == "seed":
            i0 = step[1]
            t = seed_row
            p = -t[i0]
            if not p:
                return False, pairs, resid
            s1 = tuple(c / p for c in resid.row(i0))
            s2 = t
        else:
            i, j = step[1], step[2]
            p = resid.entries[i][j]
            if not p:
                return False, pairs, resid
            norm = field.abs(p) if abs_normalize else p
            s1 = tuple(c / norm for c in resid.row(i))
            s2 = resid.row(j)
        pairs.append((s1, s2))
        resid = resid - _wedge_coeff(field, s1, s2)
    return True, pairs, resid


def darboux(w: TwoFormSheaf, x: str, seed: Optional[Section] = None,
            abs_normalize: bool = False) -> DarbouxResult:
    """Decompose the form near ``x`` as a sum of wedge products of covectors.

    Pivots are chosen at ``x`` (lexicographically first nonzero entry) and
    the returned neighbourhood is the largest open around ``x`` on which
    every pivot stays nonzero and the rank stays put, so the reconstruction
    is exact at all of its points.  With a seed covector in the image of the
    flat map, the first pair's second member is the seed itself.
    """
    space = w.space
    field = w.field
    if x not in space.points:
        raise UnknownPoint(x)
    if abs_normalize and not field.ordered:
        raise ValueError("absolute-value normalization needs an ordered field")
    if w.coeff[x].is_zero():
        raise ZeroFormAt(x)

    seed_rows: Dict[str, tuple] = {}
    if seed is not None:
        candidate_pts = tuple(space.member_points(seed.over))
        if x not in candidate_pts:
            raise BadSeed("seed is not defined at %r" % x)
        for y in candidate_pts:
            row = tuple(seed.values[y])
            if len(row) != w.module.rank:
                raise BadSeed("seed row at %r has wrong length" % y)
            if solve(w.coeff[y], tuple(-c for c in row)) is None:
                raise BadSeed("seed is outside the image of the flat map at %r" % y)
            seed_rows[y] = row
        if not any(seed_rows[x]):
            raise BadSeed("seed vanishes at %r" % x)
    else:
        candidate_pts = space.points

    # derive the pivot program at x
    steps: List[tuple] = []
    resid = w.coeff[x]
    if seed is not None:
        i0 = next(i for i, c in enumerate(seed_rows[x]) if c)
        steps.append(("seed", i0))
        ok, _, resid = _replay(field, w.coeff[x], tuple(steps), seed_rows[x],
                               abs_normalize)
        if not ok:
            raise BadSeed("seed pairing degenerates at %r" % x)
    while True:
        entry = _first_nonzero_entry(resid)
        if entry is None:
            break
        steps.append(("entry",) + entry)
        prev = resid
        ok, _, resid = _replay(field, prev, (steps[-1],), None, abs_normalize)
        if not ok or (abs_normalize
                      and any(resid.entries[entry[0]]) ):
            raise ValueError("absolute-value normalization only reconstructs "
                             "positive-pivot instances")

    steps_t = tuple(steps)
    m = len(steps_t)

    # replay pointwise; a point is good when all pivots survive and the
    # residual dies, which pins the rank at exactly twice the step count
    good = set()
    point_pairs: Dict[str, list] = {}
    for y in candidate_pts:
        ok, pairs, res = _replay(field, w.coeff[y], steps_t, seed_rows.get(y),
                                 abs_normalize)
        if ok and res.is_zero():
            good.add(y)
            point_pairs[y] = pairs
    u = space.largest_open_inside(good, x)
    if u is None:
        min_u = space.minimal_open(x)
        witness = next(y for y in space.member_points(min_u) if y not in good)
        raise NoAdmissibleNeighborhood(x, witness)

    upts = space.member_points(u)
    pairs_sections = []
    for k in range(m):
        s1 = Section(u, {y: point_pairs[y][k][0] for y in upts})
        s2 = Section(u, {y: point_pairs[y][k][1] for y in upts})
        pairs_sections.append((s1, s2))

    if form_rank(w, u) != 2 * m:
        raise RuntimeError("rank mismatch on the returned neighbourhood")

    used = []
    for step in steps_t:
        if step[0] == "entry":
            used.extend([step[1], step[2]])
    permutation = tuple(used) + tuple(i for i in range(w.module.rank)
                                      if i not in used)
    return DarbouxResult(x, u, pairs_sections, m, steps_t, permutation)


def darboux_reconstructs(w: TwoFormSheaf, result: DarbouxResult) -> bool:
    """Exact equality of coefficients with the wedge sum on the neighbourhood."""
    field = w.field
    for y in w.space.member_points(result.neighborhood):
        acc = Matrix.zeros(field, w.module.rank, w.module.rank)
        for s1, s2 in result.pairs:
            acc = acc + _wedge_coeff(field, s1.values[y], s2.values[y])
        if (w.coeff[y] - acc).entries != Matrix.zeros(field, w.module.rank,
                                                      w.module.rank).entries:
            return False
    return True


# ---------------------------------------------------------------------------
# symplectic structure, classification, reduction

@dataclass
class SymplecticModule:
    """A free module sheaf with a nondegenerate alternating form."""

    module: FreeModuleSheaf
    form: TwoFormSheaf

    def __post_init__(self):
        if self.form.module != self.module:
            raise ParentMismatch("form lives on a different module")
        if self.module.rank % 2 != 0:
            raise ValueError("symplectic rank must be even")
        for x in self.module.space.points:
            if rank_of(self.form.coeff[x]) != self.module.rank:
                raise ValueError("form is degenerate at point %r" % x)


def standard_form(e: FreeModuleSheaf) -> TwoFormSheaf:
    """Block form pairing coordinates (1,2), (3,4), ... with +1 above the diagonal."""
    n = e.rank
    if n % 2 != 0:
        raise ValueError("standard form needs even rank")
    field = e.field
    rows = [[field.zero] * n for _ in range(n)]
    for k in range(n // 2):
        rows[2 * k][2 * k + 1] = field.one
        rows[2 * k + 1][2 * k] = -field.one
    j = Matrix.from_rows(field, [tuple(r) for r in rows], cols=n)
    return TwoFormSheaf(e, {x: j for x in e.space.points})


@dataclass
class Classification:
    isotropic: bool
    coisotropic: bool
    symplectic_sub: bool
    lagrangian: bool
    isotropic_complement: Optional[SubmoduleSheaf] = None


def form_perp(sm: SymplecticModule, f: SubmoduleSheaf) -> SubmoduleSheaf:
    """Stalkwise orthogonal of a sub-sheaf for the symplectic form."""
    if f.parent != sm.module:
        raise ParentMismatch("sub-sheaf lives in a different module")
    return annihilator(sm.form.pairing(), f)


def classify(sm: SymplecticModule, f: SubmoduleSheaf) -> Classification:
    """Isotropic, co-isotropic, symplectic and Lagrangian flags.

    Lagrangian means the sub-sheaf equals its own orthogonal; the isotropic
    complement built by ``lagrangian_complement`` is attached as certificate.
    """
    perp = form_perp(sm, f)
    isotropic = all(f.stalks[x].is_subspace_of(perp.stalks[x])
                    for x in sm.module.space.points)
    coisotropic = all(perp.stalks[x].is_subspace_of(f.stalks[x])
                      for x in sm.module.space.points)
    symplectic_sub = True
    for x in sm.module.space.points:
        b = f.stalks[x].matrix()
        restricted = b @ sm.form.coeff[x] @ b.transpose()
        if rank_of(restricted) != f.stalks[x].dim:
            symplectic_sub = False
            break
    lagrangian = all(f.stalks[x] == perp.stalks[x]
                     for x in sm.module.space.points)
    complement = lagrangian_complement(sm, f) if lagrangian else None
    return Classification(isotropic, coisotropic, symplectic_sub, lagrangian,
                          complement)


def lagrangian_complement(sm: SymplecticModule, f: SubmoduleSheaf) -> SubmoduleSheaf:
    """Isotropic complement of a Lagrangian sub-sheaf, built stalk by stalk.

    Each new generator is the first canonical-basis vector of the orthogonal
    of the already chosen ones that falls outside the running sum; the rule
    is deterministic and always terminates at half rank.
    """
    perp = form_perp(sm, f)
    field = sm.module.field
    n = sm.module.rank
    stalks = {}
    for x in sm.module.space.points:
        if f.stalks[x] != perp.stalks[x]:
            raise NotLagrangian("stalk at %r does not equal its orthogonal" % x)
        chosen: List[tuple] = []
        running = f.stalks[x]
        while running.dim < n:
            candidates = orthogonal_of_rows(field, n, chosen, sm.form.coeff[x])
            pick = None
            for row in candidates.basis:
                if not running.contains(row):
                    pick = row
                    break
            if pick is None:
                raise RuntimeError("complement construction got stuck at %r" % x)
            chosen.append(pick)
            running = subspace_sum(running, Subspace.span(field, n, [pick]))
        g = Subspace.span(field, n, chosen)
        bg = g.matrix()
        if not (bg @ sm.form.coeff[x] @ bg.transpose()).is_zero():
            raise RuntimeError("complement is not isotropic at %r" % x)
        if subspace_intersection(f.stalks[x], g).dim != 0:
            raise RuntimeError("complement meets the sub-sheaf at %r" % x)
        stalks[x] = g
    return SubmoduleSheaf(sm.module, stalks)


def orthogonal_of_rows(field: Field, n: int, rows: Sequence[tuple],
                       gram: Matrix) -> Subspace:
    from .exactalg import orthogonal_complement
    return orthogonal_complement(Subspace.span(field, n, rows), gram)


@dataclass
class ReducedModule:
    """Quotient of a sub-sheaf by its self-orthogonal part, with the induced form.

    The reduced form is one skew matrix per point on the quotient's
    complement coordinates; its dimensions may vary from point to point, and
    it is nondegenerate everywhere.
    """

    source: SymplecticModule
    by: SubmoduleSheaf
    perp: SubmoduleSheaf
    quotient: QuotientSheaf
    projection: MorphismSheaf
    reduced_form: Dict[str, Matrix]

    def reduced_dim(self, x: str) -> int:
        return self.quotient.stalk_dim(x)

    def evaluate(self, s: Section, t: Section) -> Dict[str, object]:
        if s.over != t.over:
            raise ValueError("sections live over different opens")
        field = self.source.module.field
        out = {}
        for x in s.values:
            row = self.reduced_form[x].vec_mat(s.values[x])
            acc = field.zero
            for a, b in zip(row, t.values[x]):
                acc = acc + a * b
            out[x] = acc
        return out


def reduce(sm: SymplecticModule, f: SubmoduleSheaf) -> ReducedModule:
    """Reduction of a sub-sheaf: quotient by its intersection with its
    orthogonal, carrying the induced nondegenerate form.

    Co-isotropy is not required here; when it holds the denominator is the
    whole orthogonal, which is the classical reduced module.
    """
    if f.parent != sm.module:
        raise ParentMismatch("sub-sheaf lives in a different module")
    perp = form_perp(sm, f)
    core = SubmoduleSheaf(sm.module,
                          {x: subspace_intersection(f.stalks[x], perp.stalks[x])
                           for x in sm.module.space.points})
    quot, proj = quotient_within(sm.module, core, within=f)
    reduced = {}
    for x in sm.module.space.points:
        c = quot.complements[x].matrix()
        g = c @ sm.form.coeff[x] @ c.transpose()
        if not g.is_skew():
            raise RuntimeError("reduced form not alternating at %r" % x)
        if rank_of(g) != quot.stalk_dim(x):
            raise RuntimeError("reduced form degenerate at %r" % x)
        reduced[x] = g
    return ReducedModule(sm, f, perp, quot, proj, reduced)


@dataclass
class QuotientSubmodule:
    """Stalkwise subspaces of a reduction, in quotient coordinates."""

    reduction: ReducedModule
    stalks: Dict[str, Subspace]

    def stalk_dim(self, x: str) -> int:
        return self.stalks[x].dim


def reduce_lagrangian(sm: SymplecticModule, f: SubmoduleSheaf,
                      g: SubmoduleSheaf) -> QuotientSubmodule:
    """Project a Lagrangian through the reduction by a co-isotropic sub-sheaf.

    The image of their intersection is Lagrangian for the reduced form:
    isotropic of exactly half the reduced dimension at every point.
    """
    if not classify(sm, f).coisotropic:
        raise NotCoisotropic("reduction needs a co-isotropic sub-sheaf")
    if not classify(sm, g).lagrangian:
        raise NotLagrangian("second argument must be Lagrangian")
    red = reduce(sm, f)
    field = sm.module.field
    stalks = {}
    for x in sm.module.space.points:
        meet = subspace_intersection(g.stalks[x], f.stalks[x])
        rows = [red.projection.mats[x].mat_vec(v) for v in meet.basis]
        img = Subspace.span(field, red.reduced_dim(x), rows)
        b = img.matrix()
        if not (b @ red.reduced_form[x] @ b.transpose()).is_zero():
            raise RuntimeError("projected Lagrangian is not isotropic at %r" % x)
        if 2 * img.dim != red.reduced_dim(x):
            raise RuntimeError("projected Lagrangian has wrong dimension at %r" % x)
        stalks[x] = img
    return QuotientSubmodule(red, stalks)
