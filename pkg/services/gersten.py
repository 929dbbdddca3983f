# gersten.py
#
# The torus-invariant Gersten complex of a toric variety for tropical K-theory,
# and an independent presentation of its rational Chow groups.

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Tuple

from sympy import ImmutableMatrix, Matrix

from services.core_algebra import dot, integer_kernel, primitive
from services.fans import Cone, Fan, is_complete
from services.tropical_k import MonomialSymbol, residue_contract
from utils.errors import DifferentialNotSquareZero, GerstenMismatch, InvalidInput, NotComplete

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToricGerstenComplex:
    """
    C^i = sum over cones sigma of dimension i of wedge^(p-i)(M n sigma^perp)_Q, for 0 <= i <= p.

    `differentials[i]` is d^i: C^i -> C^(i+1) as a (dim C^(i+1)) x (dim C^i)
    matrix. Each stratum carries the ordered lattice basis of its
    stratum_projection, which fixes the orientation of every block.
    """

    fan: Fan = field(repr=False)
    p: int
    terms: Tuple[Tuple[Cone, ...], ...]
    differentials: Tuple[ImmutableMatrix, ...] = field(compare=False, repr=False)

    @property
    def term_dims(self) -> List[int]:
        n = self.fan.rank
        return [len(cones) * comb(n - i, self.p - i) for i, cones in enumerate(self.terms)]


def _offsets(cones: Tuple[Cone, ...], width: int) -> Dict[Cone, int]:
    return {cone: k * width for k, cone in enumerate(cones)}


def _differential(fan: Fan, p: int, i: int, source: Tuple[Cone, ...], target: Tuple[Cone, ...]) -> ImmutableMatrix:
    n = fan.rank
    q = p - i
    width_in, width_out = comb(n - i, q), comb(n - i - 1, q - 1)
    rows, cols = len(target) * width_out, len(source) * width_in
    D = Matrix.zeros(rows, cols)
    offsets_in, offsets_out = _offsets(source, width_in), _offsets(target, width_out)
    for tau in source:
        for sigma in target:
            if not tau.is_face_of(sigma):
                continue
            for j in range(width_in):
                unit = tuple(int(k == j) for k in range(width_in))
                image = residue_contract(fan, tau, sigma, MonomialSymbol(n - i, q, unit))
                for k, c in enumerate(image.coordinates):
                    D[offsets_out[sigma] + k, offsets_in[tau] + j] = c
    return ImmutableMatrix(D)


def build_complex(fan: Fan, p: int) -> ToricGerstenComplex:
    """
    Assemble the complex from residue contractions.

    The (tau, sigma) block is zero unless tau is a facet of sigma.

    Raises:
        InvalidInput: p is outside 0..rank.
    """
    if not 0 <= p <= fan.rank:
        raise InvalidInput(f"p must lie in 0..{fan.rank}")
    terms = tuple(tuple(sorted(fan.cones_of_dim(i), key=Cone.key)) for i in range(p + 1))
    differentials = tuple(_differential(fan, p, i, terms[i], terms[i + 1]) for i in range(p))
    logger.debug("gersten complex p=%d with term sizes %s", p, [len(t) for t in terms])
    return ToricGerstenComplex(fan, p, terms, differentials)


def check_square_zero(cx: ToricGerstenComplex) -> None:
    """
    Raises:
        DifferentialNotSquareZero: some d^(i+1) d^i is nonzero.
    """
    for i, (first, second) in enumerate(zip(cx.differentials, cx.differentials[1:])):
        if second.shape[1] and first.shape[1] and not (second * first).is_zero_matrix:
            raise DifferentialNotSquareZero(f"d^{i + 1} d^{i} is not zero")


def _rank(D: ImmutableMatrix) -> int:
    return D.rank() if D.shape[0] and D.shape[1] else 0


def cohomology_dims(cx: ToricGerstenComplex) -> List[int]:
    """h^i = dim C^i - rank d^i - rank d^(i-1); the last entry is the top cokernel."""
    check_square_zero(cx)
    ranks = [_rank(D) for D in cx.differentials]
    dims = cx.term_dims
    return [
        dims[i] - (ranks[i] if i < len(ranks) else 0) - (ranks[i - 1] if i > 0 else 0)
        for i in range(len(dims))
    ]


# ----------------------------------------------------------------------------
# Chow groups
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ChowOracleResult:
    p: int
    dim: int
    method: str


def _relation_matrix(fan: Fan, p: int) -> Matrix:
    """
    Relations sum_sigma <m, n_(sigma, tau)> [V(sigma)] = 0 among orbit closures of
    codimension p, one per tau of dimension p - 1 and m in a basis of M n tau^perp.
    """
    n = fan.rank
    columns = sorted(fan.cones_of_dim(p), key=Cone.key)
    rows = []
    for tau in sorted(fan.cones_of_dim(p - 1), key=Cone.key):
        dual = integer_kernel(tau.generators, n)
        normals: Dict[Cone, Tuple[int, ...]] = {}
        for sigma in columns:
            if not tau.is_face_of(sigma):
                continue
            outside = next(g for g in sigma.generators if not tau.span.contains(g))
            normals[sigma] = primitive([dot(m, outside) for m in dual])
        for j in range(len(dual)):
            rows.append([normals[sigma][j] if sigma in normals else 0 for sigma in columns])
    if not rows:
        return Matrix.zeros(0, len(columns))
    return Matrix(rows)


def chow_oracle(fan: Fan, p: int) -> ChowOracleResult:
    """
    dim CH^p(X)_Q for a complete fan, computed without the Gersten differentials.

    Raises:
        NotComplete: the fan is not complete.
    """
    if not is_complete(fan):
        raise NotComplete("the Chow comparison needs a complete fan")
    n = fan.rank
    if p < 0 or p > n:
        return ChowOracleResult(p, 0, "out-of-range")
    if p == 0:
        return ChowOracleResult(p, 1, "fundamental-class")
    if p == n:
        return ChowOracleResult(p, 1, "degree")
    if p == 1:
        rays = fan.rays
        return ChowOracleResult(p, len(rays) - Matrix([list(r) for r in rays]).rank(), "ray-class-rank")
    R = _relation_matrix(fan, p)
    return ChowOracleResult(p, R.shape[1] - _rank(ImmutableMatrix(R)), "orbit-relation")


@dataclass(frozen=True)
class GerstenReport:
    p: int
    term_dims: Tuple[int, ...]
    h: Tuple[int, ...]
    top_cokernel: int
    chow_oracle: Optional[int]
    match: bool


def compare(cx: ToricGerstenComplex, oracle: ChowOracleResult, strict: bool = True) -> GerstenReport:
    """
    Compare the top cokernel of the complex with the Chow oracle.

    With strict unset a mismatch is only logged and reported through `match`.

    Raises:
        InvalidInput: the oracle was computed for another degree.
        GerstenMismatch: strict is set (the default) and the top cokernel differs from the oracle.
    """
    if oracle.p != cx.p:
        raise InvalidInput(f"oracle for p={oracle.p} compared with a complex for p={cx.p}")
    h = cohomology_dims(cx)
    match = h[-1] == oracle.dim
    if not match:
        logger.warning("top cokernel %d differs from Chow dimension %d at p=%d", h[-1], oracle.dim, cx.p)
        if strict:
            raise GerstenMismatch(f"top cokernel {h[-1]} but CH^{cx.p} has dimension {oracle.dim}")
    return GerstenReport(cx.p, tuple(cx.term_dims), tuple(h), h[-1], oracle.dim, match)
