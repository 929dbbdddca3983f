# valuations.py
#
# Finitely generated ordered groups inside lexicographically ordered tuples of
# FormalReals, and monomial valuations on monomial fields K(M) given by flags.

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from services.core_algebra import (
    RATIONAL_BASIS,
    FormalReal,
    IntVector,
    QSubspace,
    RealBasis,
    RealVector,
    formal_real_sign,
    integer_kernel,
    lattice_contains,
    primitive,
    rank,
)
from services.fans import Cone, Fan, LexPoint, locate_lex
from utils.errors import (
    ConditionFails,
    DimensionMismatch,
    LevelsNotOnResidueLattice,
    NoCenter,
    NotConvex,
    OutsideSupport,
    PropertyViolation,
)

logger = logging.getLogger(__name__)

Value = Tuple[FormalReal, ...]


def lex_sign(value: Value) -> int:
    """Sign of a value in the lexicographic order."""
    for x in value:
        s = formal_real_sign(x)
        if s:
            return s
    return 0


def lex_compare(a: Value, b: Value) -> int:
    if len(a) != len(b):
        raise DimensionMismatch("values with different level counts")
    return lex_sign(tuple(x - y for x, y in zip(a, b)))


@dataclass(frozen=True)
class OrderedValueGroup:
    """The subgroup of lexicographic R^levels generated by `generators`."""

    levels: int
    generators: Tuple[Value, ...]
    basis: RealBasis = RATIONAL_BASIS

    def __post_init__(self):
        for g in self.generators:
            if len(g) != self.levels:
                raise DimensionMismatch(f"generator with {len(g)} entries in a {self.levels}-level group")

    @classmethod
    def build(cls, levels: int, generators: Sequence[Sequence[FormalReal]]) -> "OrderedValueGroup":
        """Bring every entry onto one declared basis."""
        declared = [x.basis for g in generators for x in g if x.basis != RATIONAL_BASIS]
        # a second declared basis makes over() raise UnknownBasis
        basis = declared[0] if declared else RATIONAL_BASIS
        return cls(levels, tuple(tuple(x.over(basis) for x in g) for g in generators), basis)

    def coefficient_rows(self, upto: Optional[int] = None) -> List[List]:
        """Per generator, the concatenated coefficient vectors of the first `upto` levels."""
        upto = self.levels if upto is None else upto
        return [[c for x in g[:upto] for c in x.coefficients] for g in self.generators]

    @property
    def rational_rank(self) -> int:
        return rank(self.coefficient_rows())

    def jump_levels(self) -> List[int]:
        """Levels (1-based) at which the cumulative coefficient rank increases."""
        jumps, previous = [], 0
        for i in range(1, self.levels + 1):
            current = rank(self.coefficient_rows(i))
            if current > previous:
                jumps.append(i)
            previous = current
        return jumps


@dataclass(frozen=True)
class ConvexChain:
    """
    The convex subgroups 0 = H_0 < ... < H_h = G, each given by a level cut.

    The cut c stands for the subgroup of elements whose first c levels vanish;
    `cuts` lists one canonical cut per subgroup in increasing order, so
    cuts[0] is G itself and cuts[-1] is the zero subgroup.
    """

    levels: int
    cuts: Tuple[int, ...]

    @property
    def height(self) -> int:
        return len(self.cuts) - 1

    def __contains__(self, cut: int) -> bool:
        return cut in self.cuts


@dataclass(frozen=True)
class HeightResult:
    height: int
    rational_rank: int
    chain: ConvexChain


def convex_chain_of(G: OrderedValueGroup) -> ConvexChain:
    jumps = G.jump_levels()
    # the largest cut in each run of equal subgroups keeps the most levels
    cuts = [j - 1 for j in jumps] + [G.levels]
    return ConvexChain(G.levels, tuple(cuts))


def height(G: OrderedValueGroup) -> HeightResult:
    """
    Height, rational rank and convex chain of a finitely generated value group.

    The convex subgroups are the intersections of G with the coordinate
    subspaces {first c levels vanish}; they change exactly where the
    cumulative level-by-level coefficient rank jumps.
    """
    chain = convex_chain_of(G)
    return HeightResult(chain.height, G.rational_rank, chain)


def convex_chain(G: OrderedValueGroup) -> List[QSubspace]:
    """
    Distinct convex subgroups enumerated cut by cut, as rational spans of their elements.

    Independent of the rank-jump count used by `height`.
    """
    full = G.coefficient_rows()
    width = len(full[0]) if full else 0
    spans = []
    for c in range(G.levels + 1):
        prefix = G.coefficient_rows(c)
        if prefix and prefix[0]:
            relations = QSubspace.span(len(prefix), [list(col) for col in zip(*prefix)]).annihilator().basis
        else:
            relations = QSubspace.full(len(full)).basis
        elements = [[sum(r[k] * full[k][j] for k in range(len(full))) for j in range(width)] for r in relations]
        span = QSubspace.span(width, elements)
        if span not in spans:
            spans.append(span)
    return spans


def hahn_reduce(G: OrderedValueGroup) -> OrderedValueGroup:
    """
    Order-isomorphic copy of G with exactly height(G) levels.

    Levels where the cumulative rank does not grow are determined by earlier
    levels on G and are dropped.

    Raises:
        IndeterminateSign: a generator comparison cannot be decided.
    """
    keep = [j - 1 for j in G.jump_levels()]
    reduced = OrderedValueGroup(len(keep), tuple(tuple(g[j] for j in keep) for g in G.generators), G.basis)
    for g in G.generators:
        for h in G.generators:
            before = lex_compare(g, h)
            after = lex_compare(tuple(g[j] for j in keep), tuple(h[j] for j in keep))
            if before != after:
                raise PropertyViolation("level reduction changed the order of two generators")
    return reduced


# ----------------------------------------------------------------------------
# Monomial valuations
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MonomialValuation:
    """
    The valuation on K(M), M = Z^rank, with v(chi^m) = (l_1(m), ..., l_r(m)).

    Trivial on K; the value of a polynomial is the lexicographic minimum over
    its monomials.
    """

    rank: int
    levels: Tuple[RealVector, ...] = ()

    def __post_init__(self):
        for level in self.levels:
            if level.dim != self.rank:
                raise DimensionMismatch(f"level of length {level.dim} on a rank {self.rank} lattice")

    @classmethod
    def rational(cls, rank_: int, *levels: Sequence) -> "MonomialValuation":
        return cls(rank_, tuple(RealVector.from_rational(l) for l in levels))

    @property
    def lex_point(self) -> LexPoint:
        return LexPoint(self.rank, self.levels)

    def value(self, m: Sequence[int]) -> Value:
        return tuple(level.pair(m) for level in self.levels)

    def value_group(self) -> OrderedValueGroup:
        units = [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]
        return OrderedValueGroup.build(len(self.levels), [self.value(e) for e in units])

    def residue_lattice(self, upto: Optional[int] = None) -> List[IntVector]:
        """Z-basis of {m : l_1(m) = ... = l_upto(m) = 0}."""
        upto = len(self.levels) if upto is None else upto
        rows = [list(c) for level in self.levels[:upto] for c in level.components]
        return integer_kernel([primitive(r) for r in rows], self.rank)

    def height(self) -> int:
        return height(self.value_group()).height


def _resolve_cut(v: MonomialValuation, H: Union[int, Sequence[Sequence[int]]], error) -> int:
    """A convex subgroup given as a cut or as characters generating it, resolved to its canonical cut."""
    chain = convex_chain_of(v.value_group())
    if isinstance(H, int):
        if not 0 <= H <= len(v.levels):
            raise error(f"cut {H} outside 0..{len(v.levels)}")
        return next(c for c in chain.cuts if c >= H)
    generators = [tuple(m) for m in H]
    kernel = v.residue_lattice()
    for c in chain.cuts:
        lattice = v.residue_lattice(c)
        inside = all(lattice_contains(lattice, m) for m in generators)
        covers = all(lattice_contains(generators + kernel, b) for b in lattice)
        if inside and covers:
            return c
    raise error(f"the subgroup generated by the values of {generators} is not convex")


def quotient_by_convex(v: MonomialValuation, H: Union[int, Sequence[Sequence[int]]]) -> MonomialValuation:
    """
    The valuation v/H with values in G/H: the flag truncated at the cut of H.

    Raises:
        NotConvex: H is not a convex subgroup of the value group.
    """
    cut = _resolve_cut(v, H, NotConvex)
    return MonomialValuation(v.rank, v.levels[:cut])


@dataclass(frozen=True)
class RestrictedValuation:
    """
    v|H: chi^m goes to v(chi^m) when that value lies in H and to infinity otherwise.

    The characters with finite value form the residue lattice M_H; on K(M_H)
    the restriction is the monomial valuation `induced`, written in the
    coordinates of `lattice`.
    """

    source: MonomialValuation
    cut: int
    lattice: Tuple[IntVector, ...]
    induced: MonomialValuation

    def value(self, m: Sequence[int]) -> Optional[Value]:
        if not lattice_contains(self.lattice, m):
            return None
        return self.source.value(m)[self.cut:]


def restrict_to_convex(v: MonomialValuation, H: Union[int, Sequence[Sequence[int]]]) -> RestrictedValuation:
    """
    Raises:
        ConditionFails: H is not a convex subgroup, so v|H is not a valuation.
    """
    cut = _resolve_cut(v, H, ConditionFails)
    lattice = tuple(v.residue_lattice(cut))
    levels = tuple(
        RealVector.from_entries([level.pair(b) for b in lattice], level.basis)
        if lattice
        else RealVector(level.basis, tuple(() for _ in level.components))
        for level in v.levels[cut:]
    )
    return RestrictedValuation(v, cut, lattice, MonomialValuation(len(lattice), levels))


def vertical_specialize(v: MonomialValuation, extra: Sequence[RealVector]) -> MonomialValuation:
    """
    Append levels coming from a valuation of the residue field.

    Raises:
        LevelsNotOnResidueLattice: an appended level vanishes on the residue
            lattice of the flag built so far.
    """
    current = v
    for level in extra:
        if level.dim != v.rank:
            raise DimensionMismatch(f"level of length {level.dim} on a rank {v.rank} lattice")
        lattice = current.residue_lattice()
        if all(level.pair(b).is_zero for b in lattice):
            raise LevelsNotOnResidueLattice("the appended level is zero on the residue lattice")
        current = MonomialValuation(v.rank, current.levels + (level,))
    return current


def divisorial(ray: Sequence[int]) -> MonomialValuation:
    """The divisorial valuation of the toric divisor of a ray: flag (u_rho)."""
    u = primitive(ray)
    return MonomialValuation.rational(len(u), u)


def toric_valuation_center(fan: Fan, v: MonomialValuation) -> Cone:
    """
    The cone whose orbit is the center of v.

    Raises:
        NoCenter: the perturbed point of the flag is outside the support.
    """
    try:
        return locate_lex(fan, v.lex_point)
    except OutsideSupport as exc:
        raise NoCenter(str(exc)) from exc

