# higher_rank_trop.py
#
# Flags (l_1, ..., l_r) of real vectors in N_R as higher-rank tropical points.

import logging
import threading
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

from services.compactified_fans import CompactifiedFan, boundary_trace, star_fan, stratum_projection
from services.core_algebra import (
    RATIONAL_BASIS,
    FormalReal,
    QSubspace,
    RealBasis,
    RealVector,
    Vector,
    formal_real_sign,
    primitive,
    vec,
)
from services.fans import Cone, Fan, LexPoint, cone_from_generators, locate_lex, refine
from services.valuations import MonomialValuation, height
from utils.errors import DimensionMismatch, PropertyViolation, UnknownBasis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Flag:
    rank: int
    levels: Tuple[RealVector, ...] = ()

    def __post_init__(self):
        bases = {level.basis for level in self.levels}
        if len(bases - {RATIONAL_BASIS}) > 1:
            raise UnknownBasis("levels of one flag must share a declared basis")
        for level in self.levels:
            if level.dim != self.rank:
                raise DimensionMismatch(f"level of length {level.dim} in rank {self.rank}")

    @classmethod
    def rational(cls, rank_: int, *levels: Sequence) -> "Flag":
        return cls(rank_, tuple(RealVector.from_rational(l) for l in levels))

    @property
    def basis(self) -> RealBasis:
        return next((l.basis for l in self.levels if l.basis != RATIONAL_BASIS), RATIONAL_BASIS)

    @property
    def lex_point(self) -> LexPoint:
        return LexPoint(self.rank, self.levels)

    def extend(self, extra: Sequence[RealVector]) -> "Flag":
        return Flag(self.rank, self.levels + tuple(extra))


@dataclass(frozen=True)
class ResidualLevel:
    """l = sum_k coefficients[k] * components[k] with independent rational components."""

    components: Tuple[Vector, ...]
    coefficients: Tuple[FormalReal, ...]


@dataclass(frozen=True)
class ResidualDecomposition:
    rank: int
    levels: Tuple[ResidualLevel, ...]

    def span(self) -> QSubspace:
        """Rational span of every component of every level."""
        return QSubspace.span(self.rank, [c for level in self.levels for c in level.components])


def _decompose(level: RealVector) -> ResidualLevel:
    span = level.rational_span()
    coefficients = [[] for _ in span.basis]
    for component in level.components:
        coords = span.coordinates(component)
        for k, c in enumerate(coords):
            coefficients[k].append(c)
    return ResidualLevel(
        tuple(span.basis),
        tuple(FormalReal(level.basis, tuple(c)) for c in coefficients),
    )


def residual_decomposition(x: Flag) -> ResidualDecomposition:
    """Split each level into a FormalReal combination of independent rational vectors."""
    return ResidualDecomposition(x.rank, tuple(_decompose(level) for level in x.levels))


# ----------------------------------------------------------------------------
# Canonical forms
# ----------------------------------------------------------------------------

def _reverse(v: Sequence) -> Tuple:
    return tuple(reversed(tuple(v)))


class _RightEchelon:
    """A subspace in echelon form with pivots at the last nonzero coordinate of each row."""

    def __init__(self, n: int):
        self.n = n
        self.reversed = QSubspace.zero(n)

    def reduce(self, v: Sequence) -> Vector:
        return _reverse(self.reversed.reduce(_reverse(vec(v))))

    def add(self, vectors: Sequence[Sequence]):
        self.reversed = self.reversed.sum(QSubspace.span(self.n, [_reverse(vec(v)) for v in vectors]))

    @property
    def span(self) -> QSubspace:
        return QSubspace.span(self.n, [_reverse(r) for r in self.reversed.basis])


@dataclass(frozen=True)
class CanonicalFlag:
    """A flag in J_r with positively normalized residuals."""

    rank: int
    levels: Tuple[RealVector, ...] = ()

    @property
    def length(self) -> int:
        return len(self.levels)

    @property
    def flag(self) -> Flag:
        return Flag(self.rank, self.levels)

    @property
    def lex_point(self) -> LexPoint:
        return LexPoint(self.rank, self.levels)


def _normalize_residual(residual: RealVector, basis: RealBasis) -> RealVector:
    span = residual.rational_span()
    if span.dim == 1:
        direction = span.basis[0]
        scale = FormalReal(residual.basis, tuple(span.coordinates(c)[0] for c in residual.components))
        sign = formal_real_sign(scale)
        return RealVector.from_rational(tuple(sign * x for x in primitive(direction)), basis)
    lead = next(k for k in range(residual.dim) if not residual.entry(k).is_zero)
    coefficients = residual.entry(lead).coefficients
    target = primitive(coefficients)
    ratio = next(t / c for t, c in zip(target, coefficients) if c != 0)
    return residual.scale(ratio)


def canonicalize(x: Flag) -> CanonicalFlag:
    """
    Canonical representative of a flag.

    Each level is reduced modulo the rational span of the earlier levels'
    components (a right-pivot echelon complement), levels with zero residual
    are deleted, and the surviving residuals are normalized: rank-one residuals
    a*d become the primitive vector sign(a)*d, others are scaled by a positive
    rational to content 1 in their first nonzero coordinate.

    Raises:
        IndeterminateSign: the sign of a rank-one residual coefficient cannot be decided.
    """
    basis = x.basis
    earlier = _RightEchelon(x.rank)
    out = []
    for level in x.levels:
        reduced = RealVector(
            basis, tuple(earlier.reduce(c) for c in _components_over(level, basis))
        )
        if reduced.is_zero:
            continue
        out.append(_normalize_residual(reduced, basis))
        earlier.add(level.components)
    return CanonicalFlag(x.rank, tuple(out))


def _components_over(level: RealVector, basis: RealBasis) -> Tuple[Vector, ...]:
    if level.basis == basis:
        return level.components
    zero = tuple(0 for _ in range(level.dim))
    return level.components + (zero,) * (basis.size - level.basis.size)


# ----------------------------------------------------------------------------
# Limit points
# ----------------------------------------------------------------------------

FanLike = Union[Fan, CompactifiedFan]


def _as_fan(fan: FanLike) -> Fan:
    return fan.open_part() if isinstance(fan, CompactifiedFan) else fan


def limit_point(x: CanonicalFlag, fan: FanLike) -> Cone:
    """
    The cone of the fan structure containing the perturbed point of x.

    Raises:
        OutsideSupport: the perturbed point is outside the support.
    """
    return locate_lex(_as_fan(fan), x.lex_point)


class LimitPoint:
    """A canonical flag evaluated lazily on fan structures."""

    def __init__(self, flag: CanonicalFlag):
        self.flag = flag
        self._cache: Dict[Fan, Cone] = {}
        self._lock = threading.Lock()

    def at(self, fan: FanLike) -> Cone:
        fan = _as_fan(fan)
        with self._lock:
            cached = self._cache.get(fan)
        if cached is not None:
            return cached
        cone = limit_point(self.flag, fan)
        with self._lock:
            return self._cache.setdefault(fan, cone)

    def cached(self) -> Dict[Fan, Cone]:
        with self._lock:
            return dict(self._cache)


@dataclass(frozen=True)
class FlagHeight:
    height: int
    group_height: int
    rational_rank: int


def flag_height(x: Flag) -> FlagHeight:
    """
    Length of the canonical flag, cross-checked against the height of the value
    group generated by the levels on the standard basis of M.

    Raises:
        PropertyViolation: the two heights differ.
    """
    length = canonicalize(x).length
    group = height(MonomialValuation(x.rank, x.levels).value_group())
    if group.height != length:
        raise PropertyViolation(f"canonical length {length} but value group height {group.height}")
    return FlagHeight(length, group.height, group.rational_rank)


@dataclass(frozen=True)
class SpanStabilization:
    span: QSubspace
    index: int
    target: QSubspace

    @property
    def reached(self) -> bool:
        return self.span == self.target


def span_stabilization(x: CanonicalFlag, tower: Sequence[FanLike]) -> SpanStabilization:
    """
    Spans of the located cones along a refinement tower.

    Returns the final span, the first tower index from which the span no longer
    changes, and the rational span of all residual components it should reach.

    Raises:
        OutsideSupport: x leaves the support of a fan of the tower.
    """
    spans = [limit_point(x, fan).span for fan in tower]
    if not spans:
        raise ValueError("empty tower")
    index = len(spans) - 1
    while index > 0 and spans[index - 1] == spans[-1]:
        index -= 1
    target = residual_decomposition(x.flag).span()
    logger.debug("span stabilized at tower index %d", index)
    return SpanStabilization(spans[-1], index, target)


def ht1_compare(direction: Union[RealVector, Sequence]) -> CanonicalFlag:
    """The canonical flag of length at most one attached to a direction of N_R."""
    if not isinstance(direction, RealVector):
        direction = RealVector.from_rational(direction)
    if direction.is_zero:
        return CanonicalFlag(direction.dim, ())
    return canonicalize(Flag(direction.dim, (direction,)))


# ----------------------------------------------------------------------------
# Toric checks
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class VerticalTrace:
    carrier: Cone
    located: Cone
    tail_cone: Cone
    trace: Cone

    @property
    def agrees(self) -> bool:
        return self.tail_cone == self.trace


def vertical_trace_check(fan: Fan, x: Flag, extra: Sequence[RealVector]) -> VerticalTrace:
    """
    Locate w = x extended by `extra`, then compare the trace of its cone on the
    stratum of x's cone with the cone of the star fan containing the tail.
    """
    sigma = locate_lex(fan, x.lex_point)
    w = x.extend(extra)
    located = locate_lex(fan, w.lex_point)
    stratum = stratum_projection(fan, sigma)
    tail = LexPoint(stratum.rank, tuple(level.apply(stratum.projection) for level in extra))
    tail_cone = locate_lex(star_fan(fan, sigma), tail)
    zero = cone_from_generators([], fan.rank)
    trace = boundary_trace(fan, zero, located, sigma)
    return VerticalTrace(sigma, located, tail_cone, trace)


def separating_tower(x: CanonicalFlag, y: CanonicalFlag, fan: Fan) -> List[Fan]:
    """Stellar refinements of `fan` at the rational residual directions of two flags."""
    directions = []
    for flag in (x, y):
        for level in residual_decomposition(flag.flag).levels:
            for c in level.components:
                d = primitive(c)
                for candidate in (d, tuple(-t for t in d)):
                    if candidate not in directions:
                        directions.append(candidate)
    tower = [fan]
    for d in directions:
        current = tower[-1]
        if d in current.rays or not current.support_contains(d):
            continue
        tower.append(refine(current, ray=d))
    return tower


def separates(x: CanonicalFlag, y: CanonicalFlag, tower: Sequence[Fan]) -> bool:
    return any(limit_point(x, fan) != limit_point(y, fan) for fan in tower)
