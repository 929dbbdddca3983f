# serialization.py
#
# Conversions between JSON documents and service objects. Rationals are written
# as strings ("3", "-1/2") so documents stay exact.

from typing import List, Sequence

from sympy import Rational

from models.base_models import FactoredFunctionDocument, FanDocument, FlagDocument, PolynomialDocument
from services.core_algebra import RATIONAL_BASIS, BasisElement, FormalReal, RealBasis, RealVector, as_rational
from services.fans import Cone, Fan, check_fan, cone_from_generators
from services.higher_rank_trop import Flag
from services.tropical_k import FactoredFunction
from services.tropicalize import ExponentPolynomial
from services.valuations import MonomialValuation
from utils.errors import InvalidInput


def rational_str(q) -> str:
    return str(Rational(q))


def rationals(values: Sequence) -> List[str]:
    return [rational_str(q) for q in values]


# Fans

def fan_to_document(fan: Fan) -> FanDocument:
    """Rays sorted lexicographically; maximal cones as sorted ray-index lists in sorted order."""
    rays = sorted(fan.rays)
    position = {r: i for i, r in enumerate(rays)}
    cones = sorted(sorted(position[g] for g in c.generators) for c in fan.maximal)
    return FanDocument(rank=fan.rank, rays=[list(r) for r in rays], cones=cones)


def fan_from_document(doc: FanDocument) -> Fan:
    """
    Raises:
        NotStronglyConvex: a listed cone contains a line.
        NotAFan: the cones do not form a fan.
    """
    cones = [cone_from_generators([doc.rays[i] for i in idx], doc.rank) for idx in doc.cones]
    return check_fan(Fan.from_maximal(doc.rank, cones))


def cone_from_indices(doc: FanDocument, indices: Sequence[int]) -> Cone:
    try:
        return cone_from_generators([doc.rays[i] for i in indices], doc.rank)
    except IndexError as exc:
        raise InvalidInput(f"cone {list(indices)} refers to a missing ray") from exc


def cone_to_document(cone: Cone) -> List[List[int]]:
    return [list(g) for g in cone.generators]


def polynomial_from_document(doc: PolynomialDocument) -> ExponentPolynomial:
    return ExponentPolynomial.build(doc.vars, doc.exponents)


# Flags and valuations

def basis_from_document(doc: FlagDocument) -> RealBasis:
    if not doc.basis:
        return RATIONAL_BASIS
    elements = tuple(
        BasisElement(
            e.name,
            as_rational(e.enclosure[0]),
            as_rational(e.enclosure[1]),
            tuple(as_rational(c) for c in e.polynomial or ()),
        )
        for e in doc.basis
    )
    return RealBasis(elements)


def _entry(value, basis: RealBasis) -> FormalReal:
    if not isinstance(value, list):
        return FormalReal.rational(value, basis)
    coefficients = [as_rational(c) for c in value]
    coefficients += [Rational(0)] * (basis.size - len(coefficients))
    return FormalReal(basis, tuple(coefficients))


def levels_from_document(doc: FlagDocument) -> tuple:
    basis = basis_from_document(doc)
    return tuple(RealVector.from_entries([_entry(v, basis) for v in level], basis) for level in doc.levels)


def flag_from_document(doc: FlagDocument) -> Flag:
    return Flag(doc.rank, levels_from_document(doc))


def valuation_from_document(doc: FlagDocument) -> MonomialValuation:
    return MonomialValuation(doc.rank, levels_from_document(doc))


def formal_real_to_document(x: FormalReal) -> List[str]:
    return rationals(x.coefficients)


def real_vector_to_document(v: RealVector) -> List[List[str]]:
    return [formal_real_to_document(v.entry(i)) for i in range(v.dim)]


# Symbols

def factored_from_document(doc: FactoredFunctionDocument) -> FactoredFunction:
    if doc.polynomial is not None:
        base = FactoredFunction.from_polynomial(doc.polynomial)
        return base * FactoredFunction.constant_function(doc.constant)
    return FactoredFunction.build(doc.roots, doc.exps, doc.constant)


def symbol_entries(entries) -> list:
    return [factored_from_document(e) if isinstance(e, FactoredFunctionDocument) else list(e) for e in entries]
