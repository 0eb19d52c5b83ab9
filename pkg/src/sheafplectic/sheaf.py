"""Free module sheaves on finite spaces, their sub-sheaves and quotients.

The coefficient sheaf is functional: a scalar section over an open set is a
map from its points into the field, so a section of the rank-n free sheaf
is a point-indexed family of n-vectors and restriction is plain function
restriction.  Sub-sheaves are stalkwise: one subspace per point, with the
sections over U being exactly the families that hit the subspace at every
point of U.  Quotients pick deterministic echelon complements so that
projections are concrete matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .exactalg import (
    Field,
    Matrix,
    Subspace,
    coordinates_in,
    echelon_complement,
    kernel_basis,
    inverse,
    zero_vector,
)
from .space import Cover, FiniteSpace


class ParentMismatch(ValueError):
    pass


class OverlapMismatch(ValueError):
    def __init__(self, alpha: int, beta: int, point: str):
        super().__init__("cover members %d and %d disagree at point %r"
                         % (alpha, beta, point))
        self.alpha = alpha
        self.beta = beta
        self.point = point


@dataclass(frozen=True)
class FreeModuleSheaf:
    """The free module sheaf of a fixed rank over the functional coefficients."""

    space: FiniteSpace
    field: Field
    rank: int

    def stalk_dim(self, x: str) -> int:
        return self.rank

    def zero_section(self, u: int) -> "Section":
        return Section(u, {x: zero_vector(self.field, self.rank)
                           for x in self.space.member_points(u)})

    def basis_sections(self, u: int) -> List["Section"]:
        """One section per (point, coordinate): the unit vector there, zero elsewhere."""
        out = []
        pts = self.space.member_points(u)
        for x in pts:
            for i in range(self.rank):
                values = {y: zero_vector(self.field, self.rank) for y in pts}
                vec = list(values[x])
                vec[i] = self.field.one
                values[x] = tuple(vec)
                out.append(Section(u, values))
        return out

    def restrict_to(self, u: int) -> "FreeModuleSheaf":
        return FreeModuleSheaf(self.space.restrict_to(u), self.field, self.rank)

    def dual(self) -> "FreeModuleSheaf":
        """Functionals are represented as row vectors on the standard basis."""
        return self


@dataclass
class Section:
    """Point-indexed values over one open set."""

    over: int
    values: Dict[str, tuple]

    def at(self, x: str) -> tuple:
        return self.values[x]

    def __add__(self, other: "Section") -> "Section":
        if self.over != other.over:
            raise ValueError("sections over different opens")
        return Section(self.over, {x: tuple(a + b for a, b in zip(v, other.values[x]))
                                   for x, v in self.values.items()})

    def scale(self, c) -> "Section":
        return Section(self.over, {x: tuple(c * a for a in v)
                                   for x, v in self.values.items()})

    def is_zero(self) -> bool:
        return all(not a for v in self.values.values() for a in v)


def make_section(module, u: int, values: Dict[str, Sequence]) -> Section:
    """Validated section constructor for any stalked module."""
    pts = module.space.member_points(u) if hasattr(module, "space") else None
    if set(values) != set(pts):
        raise ValueError("section values must cover exactly the points of the open")
    vals = {}
    for x in pts:
        v = tuple(values[x])
        if len(v) != module.stalk_dim(x):
            raise ValueError("value at %r has length %d, stalk needs %d"
                             % (x, len(v), module.stalk_dim(x)))
        vals[x] = v
    return Section(u, vals)


def restrict_section(space: FiniteSpace, s: Section, v: int) -> Section:
    target = space.opens[v]
    if not target <= {x for x in s.values}:
        raise ValueError("restriction target is not inside the section's open")
    return Section(v, {x: s.values[x] for x in space.member_points(v)})


def glue(space: FiniteSpace, cover: Cover, locals_: Sequence[Section]) -> Section:
    """The unique section over the cover target restricting to each local piece."""
    if len(locals_) != len(cover.members):
        raise ValueError("one local section per cover member required")
    member_sets = [space.opens[m] for m in cover.members]
    union = frozenset().union(*member_sets) if member_sets else frozenset()
    if union != space.opens[cover.target]:
        raise ValueError("cover members do not cover the target")
    for a in range(len(locals_)):
        for b in range(a + 1, len(locals_)):
            for x in space.points:
                if x in member_sets[a] and x in member_sets[b]:
                    if locals_[a].values[x] != locals_[b].values[x]:
                        raise OverlapMismatch(a, b, x)
    values: Dict[str, tuple] = {}
    for x in space.member_points(cover.target):
        for piece, mset in zip(locals_, member_sets):
            if x in mset:
                values[x] = piece.values[x]
                break
    return Section(cover.target, values)


# ---------------------------------------------------------------------------
# stalkwise sub-sheaves

class SubmoduleSheaf:
    """One subspace per point; sections over U hit the subspace at each point."""

    def __init__(self, parent: FreeModuleSheaf, stalks: Dict[str, Subspace]):
        for x in parent.space.points:
            if x not in stalks:
                raise ValueError("missing stalk at point %r" % x)
            if stalks[x].ambient_dim != parent.rank:
                raise ValueError("stalk at %r has ambient %d, parent rank is %d"
                                 % (x, stalks[x].ambient_dim, parent.rank))
        self.parent = parent
        self.stalks = dict(stalks)

    def __repr__(self):
        dims = [self.stalks[x].dim for x in self.parent.space.points]
        return "SubmoduleSheaf(rank=%d, stalk_dims=%r)" % (self.parent.rank, dims)

    @property
    def space(self) -> FiniteSpace:
        return self.parent.space

    @property
    def field(self) -> Field:
        return self.parent.field

    def stalk_dim(self, x: str) -> int:
        return self.stalks[x].dim

    def contains_section(self, s: Section) -> bool:
        return all(self.stalks[x].contains(v) for x, v in s.values.items())

    def __eq__(self, other):
        return (isinstance(other, SubmoduleSheaf) and self.parent == other.parent
                and self.stalks == other.stalks)


def full_submodule(e: FreeModuleSheaf) -> SubmoduleSheaf:
    return SubmoduleSheaf(e, {x: Subspace.full(e.field, e.rank)
                              for x in e.space.points})


def zero_submodule(e: FreeModuleSheaf) -> SubmoduleSheaf:
    return SubmoduleSheaf(e, {x: Subspace.zero(e.field, e.rank)
                              for x in e.space.points})


def sections_basis(f: SubmoduleSheaf, u: int) -> List[Section]:
    """Basis of the sections over ``u``: stalk bases placed point by point."""
    pts = f.space.member_points(u)
    out = []
    for x in pts:
        for row in f.stalks[x].basis:
            values = {y: zero_vector(f.field, f.parent.rank) for y in pts}
            values[x] = row
            out.append(Section(u, values))
    return out


def _require_same_parent(fs: Sequence[SubmoduleSheaf]) -> FreeModuleSheaf:
    if not fs:
        raise ValueError("need at least one sub-sheaf")
    parent = fs[0].parent
    for f in fs[1:]:
        if f.parent != parent:
            raise ParentMismatch("sub-sheaves of different parents")
    return parent


def sum_submodules(fs: Sequence[SubmoduleSheaf]) -> SubmoduleSheaf:
    from .exactalg import subspace_sum
    parent = _require_same_parent(fs)
    stalks = {}
    for x in parent.space.points:
        acc = fs[0].stalks[x]
        for f in fs[1:]:
            acc = subspace_sum(acc, f.stalks[x])
        stalks[x] = acc
    return SubmoduleSheaf(parent, stalks)


def intersect_submodules(fs: Sequence[SubmoduleSheaf]) -> SubmoduleSheaf:
    from .exactalg import subspace_intersection
    parent = _require_same_parent(fs)
    stalks = {}
    for x in parent.space.points:
        acc = fs[0].stalks[x]
        for f in fs[1:]:
            acc = subspace_intersection(acc, f.stalks[x])
        stalks[x] = acc
    return SubmoduleSheaf(parent, stalks)


# ---------------------------------------------------------------------------
# morphisms (pointwise matrix families acting on sections)

@dataclass
class MorphismSheaf:
    """Pointwise matrices between stalked modules; commutes with restriction."""

    source: object
    target: object
    mats: Dict[str, Matrix]

    @classmethod
    def identity_on(cls, module) -> "MorphismSheaf":
        mats = {x: Matrix.identity(module.field, module.stalk_dim(x))
                for x in module.space.points}
        return cls(module, module, mats)

    @property
    def space(self) -> FiniteSpace:
        return self.source.space

    def apply(self, s: Section) -> Section:
        return Section(s.over, {x: self.mats[x].mat_vec(v)
                                for x, v in s.values.items()})

    def compose(self, first: "MorphismSheaf") -> "MorphismSheaf":
        """self after first."""
        mats = {x: self.mats[x] @ first.mats[x] for x in self.mats}
        return MorphismSheaf(first.source, self.target, mats)

    def __add__(self, other: "MorphismSheaf") -> "MorphismSheaf":
        return MorphismSheaf(self.source, self.target,
                             {x: self.mats[x] + other.mats[x] for x in self.mats})

    def transpose(self) -> "MorphismSheaf":
        """Precomposition on row functionals; pointwise the matrix transpose."""
        return MorphismSheaf(self.target, self.source,
                             {x: m.transpose() for x, m in self.mats.items()})

    def inverse(self) -> "MorphismSheaf":
        mats = {}
        for x, m in self.mats.items():
            mi = inverse(m)
            if mi is None:
                raise ValueError("morphism is not invertible at point %r" % x)
            mats[x] = mi
        return MorphismSheaf(self.target, self.source, mats)


# ---------------------------------------------------------------------------
# explicitly presented presheaves and the completeness checker

class ExplicitPresheaf:
    """A finite presheaf presentation: a dimension per open, a matrix per pair.

    ``restrictions[(u, v)]`` is the matrix of the restriction map from
    sections over ``u`` to sections over ``v``, for every open ``v``
    contained in ``u``.
    """

    def __init__(self, space: FiniteSpace, field: Field,
                 dims: Sequence[int],
                 restrictions: Dict[Tuple[int, int], Matrix]):
        if len(dims) != len(space.opens):
            raise ValueError("need one dimension per open set")
        self.space = space
        self.field = field
        self.dims = tuple(dims)
        self.restrictions = dict(restrictions)
        for u in range(len(space.opens)):
            for v in range(len(space.opens)):
                if space.opens[v] <= space.opens[u]:
                    m = self.restrictions.get((u, v))
                    if m is None:
                        raise ValueError("missing restriction (%d, %d)" % (u, v))
                    if (m.rows, m.cols) != (self.dims[v], self.dims[u]):
                        raise ValueError("restriction (%d, %d) has shape %dx%d, "
                                         "expected %dx%d" % (u, v, m.rows, m.cols,
                                                             self.dims[v], self.dims[u]))
        for u in range(len(space.opens)):
            eye = Matrix.identity(field, self.dims[u])
            if self.restrictions[(u, u)].entries != eye.entries:
                raise ValueError("restriction (%d, %d) is not the identity" % (u, u))

    def functoriality_failures(self) -> List[Tuple[int, int, int]]:
        """Chains w <= v <= u where composing restrictions disagrees."""
        bad = []
        n = len(self.space.opens)
        for u in range(n):
            for v in range(n):
                if not self.space.opens[v] <= self.space.opens[u]:
                    continue
                for w in range(n):
                    if not self.space.opens[w] <= self.space.opens[v]:
                        continue
                    lhs = self.restrictions[(v, w)] @ self.restrictions[(u, v)]
                    if lhs.entries != self.restrictions[(u, w)].entries:
                        bad.append((u, v, w))
        return bad


def sections_presheaf(f: SubmoduleSheaf) -> ExplicitPresheaf:
    """Concrete presentation of the sections of a stalkwise sub-sheaf.

    The basis over each open is the point-by-point stalk basis, so the
    restriction matrices are plain coordinate selections.
    """
    space = f.space
    field = f.field
    layout = {}
    dims = []
    for u in range(len(space.opens)):
        slots = []
        for x in space.member_points(u):
            for i in range(f.stalks[x].dim):
                slots.append((x, i))
        layout[u] = {slot: k for k, slot in enumerate(slots)}
        dims.append(len(slots))
    restrictions = {}
    for u in range(len(space.opens)):
        for v in range(len(space.opens)):
            if not space.opens[v] <= space.opens[u]:
                continue
            rows = []
            for slot in layout[v]:
                row = [field.zero] * dims[u]
                row[layout[u][slot]] = field.one
                rows.append(tuple(row))
            restrictions[(u, v)] = Matrix.from_rows(field, rows, cols=dims[u])
    return ExplicitPresheaf(space, field, dims, restrictions)


def constant_presheaf(space: FiniteSpace, field: Field, dim: int) -> ExplicitPresheaf:
    """Same module over every open, identity restrictions; not a sheaf in general."""
    eye = Matrix.identity(field, dim)
    n = len(space.opens)
    restrictions = {(u, v): eye for u in range(n) for v in range(n)
                    if space.opens[v] <= space.opens[u]}
    return ExplicitPresheaf(space, field, [dim] * n, restrictions)


@dataclass
class Counterexample:
    open: int
    cover: Cover
    section: Optional[tuple] = None          # S1: a nonzero section restricting to zero
    family: Optional[tuple] = None           # S2: compatible member sections with no gluing

    def __str__(self):
        kind = "S1" if self.section is not None else "S2"
        return "%s fails over open %d with cover %r" % (kind, self.open,
                                                        list(self.cover.members))


@dataclass
class CompletenessReport:
    s1: Optional[Counterexample]
    s2: Optional[Counterexample]

    @property
    def ok(self) -> bool:
        return self.s1 is None and self.s2 is None


def check_completeness(p: ExplicitPresheaf) -> CompletenessReport:
    """Check both sheaf axioms over every irredundant cover of every open.

    S1: the joint restriction to the cover is injective.  S2: every family
    of member sections agreeing on overlaps is the restriction of some
    section over the target.  Redundant covers never change either verdict,
    so only irredundant ones are inspected.
    """
    space = p.space
    field = p.field
    s1_witness: Optional[Counterexample] = None
    s2_witness: Optional[Counterexample] = None
    for u in range(len(space.opens)):
        for cover in space.irredundant_covers(u):
            members = cover.members
            offsets = []
            total = 0
            for m in members:
                offsets.append(total)
                total += p.dims[m]
            joint_rows = []
            for m in members:
                joint_rows.extend(p.restrictions[(u, m)].entries)
            joint = Matrix.from_rows(field, joint_rows, cols=p.dims[u])

            if s1_witness is None:
                ker = kernel_basis(joint)
                if ker.dim > 0:
                    s1_witness = Counterexample(u, cover, section=ker.basis[0])

            if s2_witness is None:
                constraint_rows = []
                for a in range(len(members)):
                    for b in range(a + 1, len(members)):
                        overlap = space.opens[members[a]] & space.opens[members[b]]
                        if not overlap:
                            continue  # the axiom only constrains nonempty overlaps
                        w = space.index_of(overlap)
                        ra = p.restrictions[(members[a], w)]
                        rb = p.restrictions[(members[b], w)]
                        for k in range(p.dims[w]):
                            row = [field.zero] * total
                            for c in range(ra.cols):
                                row[offsets[a] + c] = ra.entries[k][c]
                            for c in range(rb.cols):
                                row[offsets[b] + c] = row[offsets[b] + c] - rb.entries[k][c]
                            constraint_rows.append(tuple(row))
                compatible = kernel_basis(
                    Matrix.from_rows(field, constraint_rows, cols=total))
                for fam in compatible.basis:
                    from .exactalg import solve
                    if solve(joint, fam) is None:
                        pieces = tuple(tuple(fam[offsets[i]:offsets[i] + p.dims[m]])
                                       for i, m in enumerate(members))
                        s2_witness = Counterexample(u, cover, family=pieces)
                        break
        if s1_witness is not None and s2_witness is not None:
            break
    return CompletenessReport(s1_witness, s2_witness)


def sheafify(p: ExplicitPresheaf):
    """The generated sheaf: compatible families over minimal opens.

    Returns the sheafified presheaf together with the unit morphism, one
    matrix per open, sending a section to its family of germs.  When the
    input is already complete every unit matrix is invertible.
    """
    space = p.space
    field = p.field
    mins = {x: space.minimal_open(x) for x in space.points}

    bases: Dict[int, Subspace] = {}
    layouts: Dict[int, List[Tuple[str, int, int]]] = {}  # (point, offset, dim)
    dims = []
    for u in range(len(space.opens)):
        pts = space.member_points(u)
        layout = []
        total = 0
        for x in pts:
            layout.append((x, total, p.dims[mins[x]]))
            total += p.dims[mins[x]]
        layouts[u] = layout
        constraint_rows = []
        for xi, (x, ox, dx) in enumerate(layout):
            for yj, (y, oy, dy) in enumerate(layout):
                if xi == yj:
                    continue
                if space.opens[mins[y]] <= space.opens[mins[x]]:
                    r = p.restrictions[(mins[x], mins[y])]
                    for k in range(dy):
                        row = [field.zero] * total
                        for c in range(dx):
                            row[ox + c] = r.entries[k][c]
                        row[oy + k] = row[oy + k] - field.one
                        constraint_rows.append(tuple(row))
        bases[u] = kernel_basis(Matrix.from_rows(field, constraint_rows, cols=total))
        dims.append(bases[u].dim)

    restrictions = {}
    for u in range(len(space.opens)):
        for v in range(len(space.opens)):
            if not space.opens[v] <= space.opens[u]:
                continue
            cols = []
            positions = {x: (ox, dx) for x, ox, dx in layouts[v]}
            for b in bases[u].basis:
                proj = [field.zero] * sum(dx for _, _, dx in layouts[v])
                for x, ox, dx in layouts[u]:
                    if x in positions:
                        tx, _ = positions[x]
                        for c in range(dx):
                            proj[tx + c] = b[ox + c]
                coords = coordinates_in(bases[v], tuple(proj))
                if coords is None:
                    raise ValueError("projection of a compatible family escaped "
                                     "the target family space; presheaf is not functorial")
                cols.append(coords)
            rows = [tuple(col[k] for col in cols) for k in range(dims[v])]
            restrictions[(u, v)] = Matrix.from_rows(field, rows, cols=dims[u])

    unit: Dict[int, Matrix] = {}
    for u in range(len(space.opens)):
        cols = []
        for j in range(p.dims[u]):
            germ = []
            for x, _, _ in layouts[u]:
                r = p.restrictions[(u, mins[x])]
                germ.extend(r.column(j))
            coords = coordinates_in(bases[u], tuple(germ))
            if coords is None:
                raise ValueError("section germs are incompatible; presheaf is "
                                 "not functorial")
            cols.append(coords)
        rows = [tuple(col[k] for col in cols) for k in range(dims[u])]
        unit[u] = Matrix.from_rows(field, rows, cols=p.dims[u])

    return ExplicitPresheaf(space, field, dims, restrictions), unit


# ---------------------------------------------------------------------------
# quotients

@dataclass
class QuotientSheaf:
    """Stalkwise quotient with a deterministic complement of representatives.

    ``within`` bounds the numerator (default: the whole parent), so the same
    type covers both the plain quotient of the free sheaf and quotients of a
    sub-sheaf by a smaller one.  Quotient coordinates live on the canonical
    complement basis at each point.
    """

    parent: FreeModuleSheaf
    by: SubmoduleSheaf
    within: Optional[SubmoduleSheaf]
    complements: Dict[str, Subspace]
    proj: Dict[str, Matrix]

    @property
    def space(self) -> FiniteSpace:
        return self.parent.space

    @property
    def field(self) -> Field:
        return self.parent.field

    def stalk_dim(self, x: str) -> int:
        return self.complements[x].dim

    def representative(self, x: str, coords: Sequence) -> tuple:
        """Ambient vector representing the class with the given coordinates."""
        basis = self.complements[x].basis
        vec = [self.field.zero] * self.parent.rank
        for c, row in zip(coords, basis):
            for i, a in enumerate(row):
                vec[i] = vec[i] + c * a
        return tuple(vec)


def quotient_within(e: FreeModuleSheaf, f: SubmoduleSheaf,
                    within: Optional[SubmoduleSheaf] = None):
    """Quotient (within / f) with its projection, both stalkwise explicit."""
    if f.parent != e:
        raise ParentMismatch("numerator does not live in the given sheaf")
    if within is not None and within.parent != e:
        raise ParentMismatch("enclosing sub-sheaf does not live in the given sheaf")
    field = e.field
    n = e.rank
    complements: Dict[str, Subspace] = {}
    proj: Dict[str, Matrix] = {}
    for x in e.space.points:
        by_stalk = f.stalks[x]
        within_stalk = within.stalks[x] if within is not None else Subspace.full(field, n)
        if not by_stalk.is_subspace_of(within_stalk):
            raise ParentMismatch("stalk at %r is not inside the enclosing stalk" % x)
        cplt = echelon_complement(by_stalk, within_stalk)
        pad = echelon_complement(within_stalk)
        rows = by_stalk.basis + cplt.basis + pad.basis
        m = Matrix.from_rows(field, rows, cols=n)
        minv = inverse(m.transpose())
        if minv is None:
            raise RuntimeError("complement construction failed at %r" % x)
        j = by_stalk.dim
        d = cplt.dim
        proj_rows = [minv.entries[j + t] for t in range(d)]
        q = Matrix.from_rows(field, proj_rows, cols=n)
        for row in by_stalk.basis:
            if any(q.mat_vec(row)):
                raise RuntimeError("projection does not kill the denominator at %r" % x)
        complements[x] = cplt
        proj[x] = q
    quot = QuotientSheaf(e, f, within, complements, proj)
    q_mor = MorphismSheaf(within if within is not None else e, quot, dict(proj))
    return quot, q_mor


def quotient(e: FreeModuleSheaf, f: SubmoduleSheaf):
    """Quotient of the free sheaf by a stalkwise sub-sheaf, with projection."""
    return quotient_within(e, f, None)
