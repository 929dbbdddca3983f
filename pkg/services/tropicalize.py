# tropicalize.py
#
# Supports of tropicalizations over a trivially valued field: hypersurfaces from
# their exponent vectors, images under monomial maps, and Trop^ad of monomial
# valuations.

import logging
from dataclasses import dataclass
from itertools import combinations, product
from typing import List, Sequence, Tuple

from sympy import Matrix

from services.core_algebra import IntVector, integer_kernel, primitive
from services.fans import (
    Cone,
    Fan,
    cone_from_generators,
    cone_from_inequalities,
    is_fan,
    split_cone,
    support_predicates,
)
from services.higher_rank_trop import Flag, canonicalize, limit_point
from services.valuations import MonomialValuation
from utils.errors import DimensionMismatch, InvalidInput, NoCenter, NotStronglyConvex, OutsideSupport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExponentPolynomial:
    """A Laurent polynomial with nonzero coefficients, remembered by its exponents only."""

    vars: int
    exponents: Tuple[IntVector, ...]

    @classmethod
    def build(cls, n: int, exponents: Sequence[Sequence[int]]) -> "ExponentPolynomial":
        merged = sorted({tuple(int(x) for x in e) for e in exponents})
        if not merged:
            raise InvalidInput("a polynomial needs at least one exponent")
        if any(len(e) != n for e in merged):
            raise DimensionMismatch(f"exponent vectors must have length {n}")
        return cls(n, tuple(merged))


@dataclass(frozen=True)
class TropicalHypersurface:
    polynomial: ExponentPolynomial
    fan: Fan


def _lineality_orthants(differences: List[IntVector], n: int) -> List[List[IntVector]]:
    """Sign constraints cutting the common lineality space of the normal cones into pointed pieces."""
    lineality = integer_kernel(differences, n)
    if not lineality:
        return [[]]
    return [
        [tuple(s * x for x in b) for s, b in zip(signs, lineality)]
        for signs in product((1, -1), repeat=len(lineality))
    ]


def tropical_hypersurface(f: ExponentPolynomial) -> TropicalHypersurface:
    """
    The locus where min_m <m, w> is attained at least twice, as a fan of
    dimension vars - 1.

    For every pair of exponents the region where both attain the minimum is a
    polyhedral cone; the full-dimensional ones (dimension n - 1) are the
    maximal cones. A nonzero common lineality space is split into orthants.
    """
    n = f.vars
    if len(f.exponents) < 2:
        return TropicalHypersurface(f, Fan.empty(n))
    base = f.exponents[0]
    differences = [tuple(a - b for a, b in zip(m, base)) for m in f.exponents[1:]]
    orthants = _lineality_orthants(differences, n)

    maximal = []
    for m, m2 in combinations(f.exponents, 2):
        equation = tuple(a - b for a, b in zip(m2, m))
        inequalities = [tuple(a - b for a, b in zip(other, m)) for other in f.exponents if other not in (m, m2)]
        for signs in orthants:
            cone = cone_from_inequalities(n, [equation], inequalities + signs)
            if cone.dim == n - 1:
                maximal.append(cone)
    logger.debug("hypersurface with %d exponents has %d maximal cones", len(f.exponents), len(set(maximal)))
    return TropicalHypersurface(f, Fan.from_maximal(n, maximal))


@dataclass(frozen=True)
class MonomialMap:
    """
    A lattice map N = Z^source -> N' = Z^target given by an integer matrix.

    It is dual to the map of character lattices M' -> M, m' -> matrix^T m'.
    """

    matrix: Tuple[IntVector, ...]
    source_rank: int
    target_rank: int

    @classmethod
    def build(cls, rows: Sequence[Sequence[int]], source_rank: int = None) -> "MonomialMap":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        source = source_rank if source_rank is not None else (len(rows[0]) if rows else 0)
        if any(len(r) != source for r in rows):
            raise DimensionMismatch("rows of a monomial map must have equal length")
        return cls(rows, source, len(rows))

    @classmethod
    def identity(cls, n: int) -> "MonomialMap":
        return cls.build([[int(i == j) for j in range(n)] for i in range(n)], n)

    @property
    def as_matrix(self) -> Matrix:
        return Matrix(self.target_rank, self.source_rank, lambda i, j: self.matrix[i][j])

    def apply(self, v: Sequence) -> Tuple:
        return tuple(sum(a * x for a, x in zip(row, v)) for row in self.matrix)

    def pullback_character(self, m: Sequence) -> Tuple:
        return tuple(sum(self.matrix[i][j] * m[i] for i in range(self.target_rank)) for j in range(self.source_rank))


def _images(psi: MonomialMap, cones: Sequence[Cone]) -> List[Cone]:
    return [cone_from_generators([psi.apply(g) for g in c.generators], psi.target_rank) for c in cones]


def _sign_normalized(h: IntVector) -> IntVector:
    h = primitive(h)
    lead = next(x for x in h if x != 0)
    return h if lead > 0 else tuple(-x for x in h)


def image_support(psi: MonomialMap, A: Fan) -> Fan:
    """
    A fan structure on psi(|A|).

    When the images of the maximal cones are strongly convex and already form
    a fan they are returned directly. Otherwise the source cones are cut so that
    each maps into a coordinate orthant, and the images are subdivided by the
    arrangement of all their facet hyperplanes together with the coordinate
    hyperplanes.
    """
    if A.rank != psi.source_rank:
        raise DimensionMismatch(f"map on Z^{psi.source_rank} applied to a rank {A.rank} fan")
    r = psi.target_rank
    if not A.maximal:
        return Fan.empty(r)
    try:
        images = _images(psi, A.maximal)
        candidate = Fan.from_maximal(r, images)
        if is_fan(candidate.cones)[0]:
            return candidate
    except NotStronglyConvex:
        pass

    logger.debug("image cones overlap; subdividing by the image arrangement")
    rows = [row for row in psi.matrix if any(row)]
    pieces = [piece for cone in A.maximal for piece in split_cone(cone, rows)]
    images = _images(psi, pieces)
    hyperplanes = {_sign_normalized(tuple(int(i == j) for j in range(r))) for i in range(r)}
    for image in images:
        hyperplanes.update(_sign_normalized(h) for h in image.facets + image.equations)
    ordered = sorted(hyperplanes)
    cells = [cell for image in images for cell in split_cone(image, ordered)]
    return Fan.from_maximal(r, cells)


def properness_check(A: Fan, sigma: Fan) -> bool:
    """Whether |A| lies in |sigma|, i.e. the closure in the toric variety of sigma is proper."""
    return support_predicates(sigma, A)["contains"]


def trop_ad(v: MonomialValuation, fan: Fan) -> Cone:
    """
    Raises:
        NoCenter: the valuation has no center on the toric variety of the fan.
    """
    try:
        return limit_point(canonicalize(Flag(v.rank, v.levels)), fan)
    except OutsideSupport as exc:
        raise NoCenter(str(exc)) from exc


def curve_chart_support(k: int) -> Fan:
    """Tropicalization of t -> (t - c_1, ..., t - c_k) for distinct c_i: rays e_i and -(1, ..., 1)."""
    rays = [tuple(int(i == j) for j in range(k)) for i in range(k)] + [tuple(-1 for _ in range(k))]
    return Fan.from_maximal(k, [cone_from_generators([ray], k) for ray in rays])
