# fans.py
#
# Strongly convex rational polyhedral cones and fans in N_R = R^n.

import logging
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Matrix

from services.core_algebra import (
    IntVector,
    QSubspace,
    RealVector,
    dot,
    formal_real_sign,
    integer_kernel,
    primitive,
    rank,
    vec,
)
from utils.errors import DimensionMismatch, NotAFan, NotStronglyConvex, OutsideSupport, RayOutsideSupport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cone:
    """
    A strongly convex rational polyhedral cone.

    Two cones are equal when they have the same ambient rank and the same
    (sorted, primitive, non-redundant) generators. `equations` and `facets` are
    the derived halfspace description: x is in the cone iff e.x = 0 for every
    equation and a.x >= 0 for every facet normal.
    """

    rank: int
    generators: Tuple[IntVector, ...]
    equations: Tuple[IntVector, ...] = field(default=(), compare=False, repr=False)
    facets: Tuple[IntVector, ...] = field(default=(), compare=False, repr=False)

    @cached_property
    def dim(self) -> int:
        return rank(self.generators)

    @cached_property
    def span(self) -> QSubspace:
        return QSubspace.span(self.rank, self.generators)

    def contains(self, x: Sequence) -> bool:
        x = vec(x)
        return all(dot(e, x) == 0 for e in self.equations) and all(dot(a, x) >= 0 for a in self.facets)

    def relint_contains(self, x: Sequence) -> bool:
        x = vec(x)
        return all(dot(e, x) == 0 for e in self.equations) and all(dot(a, x) > 0 for a in self.facets)

    def contains_cone(self, other: "Cone") -> bool:
        return all(self.contains(g) for g in other.generators)

    def interior_point(self) -> IntVector:
        """A lattice point in the relative interior (the sum of the generators)."""
        return tuple(sum(g[k] for g in self.generators) for k in range(self.rank))

    def faces(self) -> List["Cone"]:
        return list(_faces(self))

    def is_face_of(self, other: "Cone") -> bool:
        return self in _faces(other)

    def intersect(self, other: "Cone") -> "Cone":
        if self.rank != other.rank:
            raise DimensionMismatch(f"cones of rank {self.rank} and {other.rank}")
        return cone_from_inequalities(self.rank, self.equations + other.equations, self.facets + other.facets)

    def face_for(self, normals: Iterable[Sequence]) -> "Cone":
        """The face of generators on which every given normal vanishes."""
        normals = list(normals)
        return cone_from_generators(
            [g for g in self.generators if all(dot(a, g) == 0 for a in normals)], self.rank
        )

    def key(self):
        return (self.dim, self.generators)


def _reduce_redundant(gens: List[IntVector], facets: List[IntVector], d: int) -> List[IntVector]:
    if d <= 1:
        return gens[:1] if d == 1 else []
    extreme = []
    for g in gens:
        tight = [a for a in facets if dot(a, g) == 0]
        if rank(tight) == d - 1:
            extreme.append(g)
    return extreme


def _facet_normals(gens: List[IntVector], n: int) -> Tuple[int, List[IntVector]]:
    span = QSubspace.span(n, gens)
    d = span.dim
    B = Matrix(list(span.basis))
    normals = set()
    for chosen in combinations(gens, d - 1):
        if chosen and rank(chosen) != d - 1:
            continue
        if chosen:
            constraints = Matrix([list(B * Matrix(s)) for s in chosen])
            null = constraints.nullspace()
            if len(null) != 1:
                continue
            a = primitive(tuple((null[0].T * B)))
        else:
            a = primitive(span.basis[0])
        values = [dot(a, g) for g in gens]
        if all(v >= 0 for v in values):
            normals.add(a)
        elif all(v <= 0 for v in values):
            normals.add(tuple(-x for x in a))
    return d, sorted(normals)


def cone_from_generators(vectors: Iterable[Sequence], rank_: Optional[int] = None) -> Cone:
    """
    Build a cone from integer (or rational) generators.

    Args:
        vectors: generators in Z^n.
        rank_: ambient rank, required when `vectors` is empty.

    Returns:
        The cone with primitive, deduplicated, non-redundant generators and its
        facet normals.

    Raises:
        NotStronglyConvex: the generators positively span a line.
    """
    vectors = [tuple(v) for v in vectors]
    n = rank_ if rank_ is not None else (len(vectors[0]) if vectors else 0)
    if any(len(v) != n for v in vectors):
        raise DimensionMismatch(f"generators are not all in Z^{n}")
    gens = sorted({primitive(v) for v in vectors if any(x != 0 for x in vec(v))})
    if not gens:
        return Cone(n, (), tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), ())

    d, normals = _facet_normals(gens, n)
    if rank(normals) < d:
        raise NotStronglyConvex(f"cone generated by {gens} contains a line")
    extreme = _reduce_redundant(gens, normals, d)
    equations = tuple(sorted(integer_kernel(extreme, n)))
    return Cone(n, tuple(sorted(extreme)), equations, tuple(normals))


def cone_from_inequalities(n: int, equations: Sequence[Sequence], inequalities: Sequence[Sequence]) -> Cone:
    """The cone {x : e.x = 0, a.x >= 0}, converted to generators by enumerating tight sets."""
    equations = [vec(e) for e in equations if any(x != 0 for x in vec(e))]
    inequalities = [vec(a) for a in inequalities if any(x != 0 for x in vec(a))]
    if rank(equations + inequalities) < n:
        raise NotStronglyConvex("the halfspace system has a nonzero lineality space")
    free = n - rank(equations)
    if free == 0:
        return cone_from_generators([], n)

    rays = set()
    for tight in combinations(inequalities, free - 1):
        rows = equations + list(tight)
        if rank(rows) != n - 1:
            continue
        null = Matrix([list(r) for r in rows]).nullspace() if rows else Matrix.eye(n).columnspace()
        r = primitive(tuple(null[0]))
        for candidate in (r, tuple(-x for x in r)):
            if all(dot(a, candidate) >= 0 for a in inequalities):
                rays.add(candidate)
    return cone_from_generators(sorted(rays), n)


@lru_cache(maxsize=None)
def _faces(cone: Cone) -> Tuple[Cone, ...]:
    found = {cone}
    for a in cone.facets:
        facet = cone.face_for([a])
        found.update(_faces(facet))
    return tuple(sorted(found, key=Cone.key))


def faces(P: Cone) -> List[Cone]:
    """All faces of P, including the zero cone and P itself."""
    return P.faces()


def split_cone(cone: Cone, hyperplanes: Iterable[Sequence]) -> List[Cone]:
    """Subdivide a cone by hyperplanes so that each hyperplane has a constant weak sign on every piece."""
    pieces = [cone]
    for h in hyperplanes:
        refined = []
        for piece in pieces:
            values = [dot(h, g) for g in piece.generators]
            if all(v >= 0 for v in values) or all(v <= 0 for v in values):
                refined.append(piece)
                continue
            for side in (h, tuple(-x for x in h)):
                part = cone_from_inequalities(cone.rank, piece.equations, piece.facets + (tuple(side),))
                if part.dim == piece.dim:
                    refined.append(part)
        pieces = refined
    return pieces


# ----------------------------------------------------------------------------
# Lexicographic points
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LexPoint:
    """The point l_1 + e l_2 + e^2 l_3 + ... for arbitrarily small e > 0."""

    rank: int
    levels: Tuple[RealVector, ...] = ()

    def __post_init__(self):
        for level in self.levels:
            if level.dim != self.rank:
                raise DimensionMismatch(f"level of length {level.dim} in a rank {self.rank} lattice")

    @classmethod
    def rational(cls, rank_: int, *vectors: Sequence) -> "LexPoint":
        return cls(rank_, tuple(RealVector.from_rational(v) for v in vectors))

    def sign(self, m: Sequence) -> int:
        """Sign of m on the perturbed point: the first nonzero sign of m(l_1), ..., m(l_r)."""
        for level in self.levels:
            s = formal_real_sign(level.pair(m))
            if s:
                return s
        return 0


def lex_tight_facets(cone: Cone, x: LexPoint) -> Optional[List[IntVector]]:
    """Facet normals vanishing at x when x lies in the cone, else None."""
    if any(x.sign(e) != 0 for e in cone.equations):
        return None
    tight = []
    for a in cone.facets:
        s = x.sign(a)
        if s < 0:
            return None
        if s == 0:
            tight.append(a)
    return tight


# ----------------------------------------------------------------------------
# Fans
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Fan:
    """A face-closed collection of cones; `cones` is sorted by (dim, generators)."""

    rank: int
    cones: Tuple[Cone, ...] = ()
    maximal: Tuple[Cone, ...] = ()

    @classmethod
    def from_maximal(cls, rank_: int, cones: Iterable[Cone]) -> "Fan":
        """Auto-complete faces. The fan axioms are not checked here (see is_fan)."""
        given = set(cones)
        for c in given:
            if c.rank != rank_:
                raise DimensionMismatch(f"cone of rank {c.rank} in a rank {rank_} fan")
        closure = set()
        for c in given:
            closure.update(_faces(c))
        maximal = [c for c in given if not any(c != d and c.is_face_of(d) for d in given)]
        return cls(rank_, tuple(sorted(closure, key=Cone.key)), tuple(sorted(maximal, key=Cone.key)))

    @classmethod
    def from_rays(cls, rank_: int, rays: Sequence[Sequence[int]], cones: Sequence[Sequence[int]]) -> "Fan":
        return cls.from_maximal(rank_, [cone_from_generators([rays[i] for i in idx], rank_) for idx in cones])

    @classmethod
    def empty(cls, rank_: int) -> "Fan":
        return cls(rank_, (), ())

    @property
    def rays(self) -> Tuple[IntVector, ...]:
        return tuple(c.generators[0] for c in self.cones if c.dim == 1)

    @property
    def dim(self) -> int:
        return max((c.dim for c in self.maximal), default=-1)

    def cones_of_dim(self, k: int) -> List[Cone]:
        return [c for c in self.cones if c.dim == k]

    def __contains__(self, cone: Cone) -> bool:
        return cone in self.cones

    def support_contains(self, x: Sequence) -> bool:
        return any(c.contains(x) for c in self.maximal)

    def hyperplanes(self) -> List[IntVector]:
        """Every equation and facet normal of the maximal cones, up to sign."""
        found = set()
        for c in self.maximal:
            for h in c.equations + c.facets:
                h = primitive(h)
                lead = next(x for x in h if x != 0)
                found.add(h if lead > 0 else tuple(-x for x in h))
        return sorted(found)


@dataclass(frozen=True)
class FanViolation:
    kind: str
    first: Cone
    second: Optional[Cone] = None

    def describe(self) -> str:
        if self.kind == "face_missing":
            return f"face {self.second.generators} of {self.first.generators} is missing"
        if self.kind == "rank_mismatch":
            return f"cone {self.first.generators} has rank {self.first.rank}"
        return f"{self.first.generators} and {self.second.generators} meet in a non-face"


def is_fan(cones: Sequence[Cone]) -> Tuple[bool, Optional[FanViolation]]:
    """Check face closure, then the pairwise intersection axiom on inclusion-maximal cones."""
    cones = sorted(set(cones), key=Cone.key)
    if not cones:
        return True, None
    n = cones[0].rank
    for c in cones:
        if c.rank != n:
            return False, FanViolation("rank_mismatch", c)
    present = set(cones)
    for c in cones:
        for f in _faces(c):
            if f not in present:
                return False, FanViolation("face_missing", c, f)
    maximal = [c for c in cones if not any(c != d and d.contains_cone(c) for d in cones)]
    for c in cones:
        if c not in maximal and not any(c.is_face_of(m) for m in maximal):
            container = next(m for m in maximal if m.contains_cone(c))
            return False, FanViolation("bad_intersection", container, c)
    for a, b in combinations(maximal, 2):
        meet = a.intersect(b)
        if not (meet.is_face_of(a) and meet.is_face_of(b)):
            return False, FanViolation("bad_intersection", a, b)
    return True, None


def check_fan(fan: Fan) -> Fan:
    ok, violation = is_fan(fan.cones)
    if not ok:
        raise NotAFan(violation.describe())
    return fan


def locate_lex(fan: Fan, x: LexPoint) -> Cone:
    """
    The cone of the fan whose relative interior contains the perturbed point x.

    Raises:
        OutsideSupport: x is in no cone of the fan.
        IndeterminateSign: propagated from the FormalReal sign oracle.
    """
    if x.rank != fan.rank:
        raise DimensionMismatch(f"point of rank {x.rank} in a rank {fan.rank} fan")
    for cone in fan.maximal:
        tight = lex_tight_facets(cone, x)
        if tight is not None:
            located = cone.face_for(tight) if tight else cone
            logger.debug("located lex point in %s", located.generators)
            return located
    raise OutsideSupport("the perturbed point lies outside the support of the fan")


def locate_point(fan: Fan, v: Sequence) -> Cone:
    return locate_lex(fan, LexPoint.rational(fan.rank, v))


def refine(fan: Fan, common: Optional[Fan] = None, ray: Optional[Sequence[int]] = None) -> Fan:
    """
    Common refinement with another fan, or stellar subdivision at a ray.

    Raises:
        RayOutsideSupport: the stellar ray is not in the support.
    """
    if (common is None) == (ray is None):
        raise ValueError("refine takes exactly one of common= or ray=")
    if common is not None:
        if common.rank != fan.rank:
            raise DimensionMismatch("fans of different rank")
        pieces = [a.intersect(b) for a in fan.maximal for b in common.maximal]
        return Fan.from_maximal(fan.rank, pieces)

    rho = primitive(ray)
    if not any(x != 0 for x in rho) or not fan.support_contains(rho):
        raise RayOutsideSupport(f"ray {tuple(ray)} is not in the support")
    new = []
    for sigma in fan.maximal:
        if not sigma.contains(rho):
            new.append(sigma)
            continue
        for tau in _faces(sigma):
            if tau.dim == sigma.dim - 1 and not tau.contains(rho):
                new.append(cone_from_generators(tau.generators + (rho,), fan.rank))
        if sigma.dim == 1:
            new.append(sigma)
    return Fan.from_maximal(fan.rank, new)


def support_contains_fan(A: Fan, B: Fan) -> bool:
    """Whether |B| is contained in |A|."""
    if A.rank != B.rank:
        raise DimensionMismatch("fans of different rank")
    hyperplanes = A.hyperplanes()
    for beta in B.maximal:
        for piece in split_cone(beta, hyperplanes):
            for face in _faces(piece):
                if not A.support_contains(face.interior_point()):
                    return False
    return True


def support_predicates(A: Fan, B: Fan) -> dict:
    """Exact support comparison: contains is |B| inside |A|."""
    contains = support_contains_fan(A, B)
    equal = contains and support_contains_fan(B, A)
    return {"contains": contains, "equal": equal}


def is_complete(fan: Fan) -> bool:
    n = fan.rank
    if not fan.maximal or any(c.dim != n for c in fan.maximal):
        return False
    if n == 0:
        return True
    for wall in fan.cones_of_dim(n - 1):
        if sum(1 for c in fan.maximal if wall.is_face_of(c)) != 2:
            return False
    return True


def random_stellar_refinement(fan: Fan, rng: random.Random) -> Fan:
    """Stellar subdivision at a random positive combination of a random maximal cone's generators."""
    candidates = [c for c in fan.maximal if c.dim >= 2]
    if not candidates:
        return fan
    sigma = rng.choice(candidates)
    weights = [rng.randint(1, 3) for _ in sigma.generators]
    rho = primitive([sum(w * g[k] for w, g in zip(weights, sigma.generators)) for k in range(fan.rank)])
    logger.debug("stellar refinement at %s", rho)
    return refine(fan, ray=rho)


# ----------------------------------------------------------------------------
# Named fans
# ----------------------------------------------------------------------------

def _unit(n: int, i: int, sign: int = 1) -> IntVector:
    return tuple(sign * int(i == j) for j in range(n))


def projective_space(n: int) -> Fan:
    rays = [_unit(n, i) for i in range(n)] + [tuple(-1 for _ in range(n))]
    return Fan.from_rays(n, rays, list(combinations(range(n + 1), n)))


def p1_times_p1() -> Fan:
    rays = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    return Fan.from_rays(2, rays, [(0, 1), (1, 2), (2, 3), (3, 0)])


def hirzebruch(a: int) -> Fan:
    rays = [(1, 0), (0, 1), (-1, a), (0, -1)]
    return Fan.from_rays(2, rays, [(0, 1), (1, 2), (2, 3), (3, 0)])


def orthant_fan(n: int) -> Fan:
    cones = [
        cone_from_generators([_unit(n, i, s) for i, s in enumerate(signs)], n)
        for signs in product((1, -1), repeat=n)
    ]
    return Fan.from_maximal(n, cones)


def tropical_line() -> Fan:
    return Fan.from_rays(2, [(1, 0), (0, 1), (-1, -1)], [(0,), (1,), (2,)])


def tropical_plane() -> Fan:
    rays = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1)]
    return Fan.from_rays(3, rays, list(combinations(range(4), 2)))


NAMED_FANS = {
    "p1": lambda: projective_space(1),
    "p2": lambda: projective_space(2),
    "p3": lambda: projective_space(3),
    "p1xp1": p1_times_p1,
    "f1": lambda: hirzebruch(1),
    "f2": lambda: hirzebruch(2),
    "orthant2": lambda: orthant_fan(2),
    "orthant3": lambda: orthant_fan(3),
    "line": tropical_line,
    "plane": tropical_plane,
}
