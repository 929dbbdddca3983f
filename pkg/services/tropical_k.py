# tropical_k.py
#
# Finite-level presentations of tropical K-groups, their pull-backs, residue
# maps (toric contraction and tame symbols over Q(t)), monomial transfer, and
# the factorization of Milnor symbols through wedge powers of exponent lattices.

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import Matrix, Poly, Rational, eye, factor_list, factorint, symbols

from services.compactified_fans import CompactifiedFan, stratum_projection
from services.core_algebra import (
    IntVector,
    QSubspace,
    Vector,
    as_rational,
    compound_matrix,
    contract,
    dot,
    lattice_index,
    solve_rows,
    unimodular_complement,
    vec,
    wedge_of,
    wedge_power,
)
from services.fans import Cone, Fan, orthant_fan, support_predicates
from services.higher_rank_trop import Flag, canonicalize, residual_decomposition
from services.tropicalize import MonomialMap, curve_chart_support, image_support
from utils.errors import (
    DimensionMismatch,
    InfiniteIndex,
    InvalidInput,
    InvalidUniformizer,
    NotAFacePair,
    PropertyViolation,
    SupportMismatch,
    UnsplitFactor,
    UnsupportedEntry,
)

logger = logging.getLogger(__name__)

t = symbols("t")


# ----------------------------------------------------------------------------
# F_p and F^p
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class FpSpace:
    """F_p: the sum over maximal cones of the p-th wedge power of their spans, inside wedge^p N_Q."""

    rank: int
    p: int
    space: QSubspace
    cone_spans: Tuple[QSubspace, ...] = field(repr=False, default=())

    @property
    def dim(self) -> int:
        return self.space.dim


@dataclass(frozen=True)
class FpClassGroup:
    """
    F^p = wedge^p M_Q / {f : f pairs to zero with F_p}.

    A class is recorded by its pairings with the echelon basis of F_p.
    """

    rank: int
    p: int
    kernel: QSubspace
    pairing_basis: Tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.pairing_basis)

    def class_of(self, f: Sequence) -> Vector:
        f = vec(f)
        if len(f) != comb(self.rank, self.p):
            raise DimensionMismatch(f"element of length {len(f)} in wedge^{self.p} of rank {self.rank}")
        return tuple(dot(f, b) for b in self.pairing_basis)

    def is_zero(self, f: Sequence) -> bool:
        return all(c == 0 for c in self.class_of(f))

    def lift(self, coordinates: Sequence) -> Vector:
        """A representative with the given class coordinates, chosen inside F_p."""
        coordinates = vec(coordinates)
        if not self.pairing_basis:
            return tuple(Rational(0) for _ in range(comb(self.rank, self.p)))
        B = Matrix([list(b) for b in self.pairing_basis])
        gram = B * B.T
        c = gram.LUsolve(Matrix(coordinates))
        return tuple(Rational(x) for x in (c.T * B))


def _as_fan(fan: Union[Fan, CompactifiedFan]) -> Fan:
    return fan.open_part() if isinstance(fan, CompactifiedFan) else fan


def f_spaces(fan: Union[Fan, CompactifiedFan], p: int) -> Tuple[FpSpace, FpClassGroup]:
    """
    F_p(0, fan) and F^p(0, fan).

    Both depend only on the support of the fan.
    """
    fan = _as_fan(fan)
    if p < 0:
        raise InvalidInput("p must be nonnegative")
    n = fan.rank
    ambient = comb(n, p)
    spans = tuple(wedge_power(c.span, p) for c in fan.maximal)
    space = QSubspace.zero(ambient)
    for s in spans:
        space = space.sum(s)
    group = FpClassGroup(n, p, space.annihilator(), space.basis)
    return FpSpace(n, p, space, spans), group


def pullback_matrix(psi: MonomialMap, source: Fan, target: Fan, p: int) -> Matrix:
    """
    Matrix of the induced map F^p(target) -> F^p(source) in class coordinates.

    Raises:
        SupportMismatch: |target| is not the image of |source|.
    """
    if psi.source_rank != source.rank or psi.target_rank != target.rank:
        raise DimensionMismatch("the monomial map does not match the fans")
    if not support_predicates(target, image_support(psi, source))["equal"]:
        raise SupportMismatch("the target support is not the image of the source support")
    _, down = f_spaces(target, p)
    _, up = f_spaces(source, p)
    wedge_map = compound_matrix(psi.as_matrix.T, p)
    columns = []
    for k in range(down.dim):
        unit = [int(i == k) for i in range(down.dim)]
        representative = Matrix(down.lift(unit))
        columns.append(up.class_of(tuple(wedge_map * representative)))
    if not columns:
        return Matrix.zeros(up.dim, 0)
    return Matrix([list(c) for c in columns]).T


def pullback(psi: MonomialMap, source: Fan, target: Fan, p: int, f: Sequence) -> Vector:
    """Class in F^p(source) of the pull-back of f in wedge^p M'."""
    if not support_predicates(target, image_support(psi, source))["equal"]:
        raise SupportMismatch("the target support is not the image of the source support")
    _, up = f_spaces(source, p)
    return up.class_of(tuple(compound_matrix(psi.as_matrix.T, p) * Matrix(vec(f))))


@dataclass(frozen=True)
class Stabilization:
    dims: Tuple[int, ...]
    isomorphisms: Tuple[bool, ...]
    index: int


def stabilize(diagram: Sequence[Tuple[Optional[MonomialMap], Fan]], p: int) -> Stabilization:
    """
    Pull back along a chain fan_0 <- fan_1 <- ... where each entry carries the
    map from its lattice to the previous one (the first map is ignored).

    Returns the dimensions of F^p along the chain, whether each pull-back is an
    isomorphism, and the first index after which every pull-back is one.
    """
    dims = [f_spaces(fan, p)[1].dim for _, fan in diagram]
    isos = []
    for (_, previous), (psi, fan) in zip(diagram, diagram[1:]):
        M = pullback_matrix(psi, fan, previous, p)
        isos.append(M.rank() == M.shape[0] == M.shape[1])
    index = len(isos)
    while index > 0 and isos[index - 1]:
        index -= 1
    return Stabilization(tuple(dims), tuple(isos), index)


@dataclass(frozen=True)
class FlagKernelCheck:
    equal: bool
    annihilator_kernel: QSubspace
    flag_kernel: QSubspace


def _maximal_height_flag(cone: Cone) -> Flag:
    """A flag of height dim(cone) whose perturbed point lies in the relative interior of the cone."""
    levels = [cone.interior_point()]
    chosen = [cone.interior_point()]
    for g in cone.generators:
        if QSubspace.span(cone.rank, chosen + [g]).dim > len(chosen):
            chosen.append(g)
            levels.append(g)
    return Flag.rational(cone.rank, *levels)


def flag_kernel_check(fan: Fan, p: int) -> FlagKernelCheck:
    """
    Compare the annihilator of F_p with the intersection, over maximal cones,
    of the kernels of wedge^p of the residual components of a maximal-height
    flag on each cone.
    """
    _, group = f_spaces(fan, p)
    ambient = comb(fan.rank, p)
    kernel = QSubspace.full(ambient)
    for cone in fan.maximal:
        canonical = canonicalize(_maximal_height_flag(cone))
        rows = [c for level in residual_decomposition(canonical.flag).levels for c in level.components]
        if len(canonical.levels) != cone.dim:
            raise PropertyViolation(f"flag on {cone.generators} does not have maximal height")
        if p == 0:
            cone_kernel = QSubspace.zero(ambient)
        elif len(rows) < p:
            cone_kernel = QSubspace.full(ambient)
        else:
            R = Matrix([list(r) for r in rows])
            cone_kernel = QSubspace.span(ambient, [tuple(v) for v in compound_matrix(R, p).nullspace()])
        kernel = kernel.intersection(cone_kernel)
    return FlagKernelCheck(kernel == group.kernel, group.kernel, kernel)


# ----------------------------------------------------------------------------
# Monomial symbols and toric residues
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MonomialSymbol:
    """An element of wedge^degree Q^rank, the exponent lattice of a monomial field."""

    rank: int
    degree: int
    coordinates: Vector

    def __post_init__(self):
        if len(self.coordinates) != comb(self.rank, self.degree):
            raise DimensionMismatch(f"{len(self.coordinates)} coordinates for wedge^{self.degree} of rank {self.rank}")

    @classmethod
    def of(cls, rank_: int, vectors: Sequence[Sequence]) -> "MonomialSymbol":
        """The symbol {chi^m_1, ..., chi^m_p} as m_1 ^ ... ^ m_p."""
        return cls(rank_, len(vectors), wedge_of(vectors, rank_))

    @classmethod
    def zero(cls, rank_: int, degree: int) -> "MonomialSymbol":
        return cls(rank_, degree, tuple(Rational(0) for _ in range(comb(rank_, degree))))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)

    def __add__(self, other: "MonomialSymbol") -> "MonomialSymbol":
        if (self.rank, self.degree) != (other.rank, other.degree):
            raise DimensionMismatch("symbols of different shape")
        return MonomialSymbol(self.rank, self.degree, tuple(a + b for a, b in zip(self.coordinates, other.coordinates)))

    def scale(self, q) -> "MonomialSymbol":
        q = as_rational(q)
        return MonomialSymbol(self.rank, self.degree, tuple(q * c for c in self.coordinates))


def ray_over(fan: Fan, tau: Cone, sigma: Cone) -> IntVector:
    """Primitive generator in N_tau of the image of sigma, for tau a facet of sigma."""
    if not (tau.is_face_of(sigma) and sigma.dim == tau.dim + 1):
        raise NotAFacePair(f"{tau.generators} is not a facet of {sigma.generators}")
    return stratum_projection(fan, tau).project_cone(sigma).generators[0]


def residue_contract(
    fan: Fan, tau: Cone, sigma: Cone, omega: MonomialSymbol, m_pi: Optional[Sequence[int]] = None
) -> MonomialSymbol:
    """
    Residue of a symbol over M n tau^perp along the divisor of sigma in the orbit closure of tau.

    Contract with the ray generator u, then project m -> m - <m, u> m_pi onto
    M n sigma^perp and express the result in the lattice basis of sigma's stratum.

    Args:
        fan: ambient fan.
        tau, sigma: cones of the fan with tau a facet of sigma.
        omega: symbol in the coordinates of the stratum basis of tau.
        m_pi: uniformizer in the same coordinates; defaults to a unimodular complement of u.

    Raises:
        NotAFacePair: tau is not a facet of sigma.
        InvalidUniformizer: <m_pi, u> != 1.
    """
    u = ray_over(fan, tau, sigma)
    here = stratum_projection(fan, tau)
    there = stratum_projection(fan, sigma)
    k, q = here.rank, omega.degree
    if omega.rank != k:
        raise DimensionMismatch(f"symbol of rank {omega.rank} on a stratum of rank {k}")
    if q == 0:
        raise InvalidInput("degree 0 symbols have no residue")
    m_pi = unimodular_complement(u) if m_pi is None else tuple(int(x) for x in m_pi)
    if len(m_pi) != k or dot(m_pi, u) != 1:
        raise InvalidUniformizer(f"<{m_pi}, {u}> is not 1")

    contracted = Matrix(contract(u, omega.coordinates, k, q))
    projection = eye(k) - Matrix(m_pi) * Matrix([list(u)])
    projected = compound_matrix(projection, q - 1) * contracted
    inclusion = compound_matrix(here.map_to(there).T, q - 1)
    coords = solve_rows([tuple(inclusion.col(j)) for j in range(inclusion.shape[1])], tuple(projected))
    if coords is None:
        raise PropertyViolation("projected residue does not lie in wedge of M n sigma^perp")
    return MonomialSymbol(there.rank, q - 1, coords)


# ----------------------------------------------------------------------------
# Factored functions and tame symbols over Q(t)
# ----------------------------------------------------------------------------

INFINITY = "inf"
Point = Union[Rational, str]


@dataclass(frozen=True)
class FactoredFunction:
    """
    constant * prod (t - roots[i])^exps[i] * prod q_j(t)^e_j over Q.

    `others` holds irreducible factors of degree >= 2 as (coefficients, exponent),
    coefficients listed from the highest degree.
    """

    constant: Rational
    roots: Tuple[Rational, ...] = ()
    exps: Tuple[int, ...] = ()
    others: Tuple[Tuple[Tuple[Rational, ...], int], ...] = ()

    def __post_init__(self):
        if self.constant == 0:
            raise InvalidInput("the constant of a factored function must be nonzero")
        if len(self.roots) != len(self.exps):
            raise DimensionMismatch("roots and exponents differ in length")

    @classmethod
    def build(cls, roots: Sequence = (), exps: Sequence[int] = (), constant=1, others=()) -> "FactoredFunction":
        merged: Dict[Rational, int] = {}
        for c, e in zip(roots, exps):
            c = as_rational(c)
            merged[c] = merged.get(c, 0) + int(e)
        ordered = sorted((c, e) for c, e in merged.items() if e != 0)
        return cls(
            as_rational(constant),
            tuple(c for c, _ in ordered),
            tuple(e for _, e in ordered),
            tuple(sorted((tuple(as_rational(a) for a in q), int(e)) for q, e in others if e != 0)),
        )

    @classmethod
    def constant_function(cls, c) -> "FactoredFunction":
        return cls(as_rational(c))

    @classmethod
    def from_polynomial(cls, coefficients: Sequence, exponent: int = 1) -> "FactoredFunction":
        """Factor a polynomial in t over Q; linear factors become roots."""
        poly = Poly([as_rational(c) for c in coefficients], t, domain="QQ")
        if poly.is_zero:
            raise InvalidInput("the zero polynomial has no symbol")
        return cls._from_factors(poly, exponent)

    @classmethod
    def _from_factors(cls, poly: Poly, exponent: int) -> "FactoredFunction":
        constant, factors = factor_list(poly.as_expr(), t)
        constant = Rational(constant) ** exponent
        roots, exps, others = [], [], []
        for factor, multiplicity in factors:
            f = Poly(factor, t, domain="QQ")
            coeffs = [Rational(c) for c in f.all_coeffs()]
            lead = coeffs[0]
            constant *= lead ** (multiplicity * exponent)
            monic = [c / lead for c in coeffs]
            if f.degree() == 1:
                roots.append(-monic[1])
                exps.append(multiplicity * exponent)
            else:
                others.append((tuple(monic), multiplicity * exponent))
        return cls.build(roots, exps, constant, others)

    @property
    def is_split(self) -> bool:
        return not self.others

    @property
    def is_constant(self) -> bool:
        return not self.roots and not self.others

    @property
    def degree(self) -> int:
        return sum(self.exps) + sum((len(q) - 1) * e for q, e in self.others)

    def __mul__(self, other: "FactoredFunction") -> "FactoredFunction":
        return FactoredFunction.build(
            self.roots + other.roots,
            self.exps + other.exps,
            self.constant * other.constant,
            _merge_others(self.others + other.others),
        )

    def order_at(self, point: Point) -> int:
        if _is_infinity(point):
            return -self.degree
        point = as_rational(point)
        return sum(e for c, e in zip(self.roots, self.exps) if c == point)

    def unit_value(self, point: Point) -> Rational:
        """Value at the point of the unit part (the function divided by the uniformizer power)."""
        if _is_infinity(point):
            value = self.constant
            for q, e in self.others:
                value *= q[0] ** e
            return value
        point = as_rational(point)
        value = self.constant
        for c, e in zip(self.roots, self.exps):
            if c != point:
                value *= (point - c) ** e
        for q, e in self.others:
            acc = Rational(0)
            for a in q:
                acc = acc * point + a
            value *= acc ** e
        return value

    def substitute_power(self, d: int) -> "FactoredFunction":
        """The function of t obtained by substituting t^d for the variable."""
        result = FactoredFunction.constant_function(self.constant)
        factors = [((Rational(1), -c), e) for c, e in zip(self.roots, self.exps)] + list(self.others)
        for q, e in factors:
            expr = sum(a * t ** (d * (len(q) - 1 - i)) for i, a in enumerate(q))
            result = result * FactoredFunction._from_factors(Poly(expr, t, domain="QQ"), e)
        return result


def _is_infinity(point) -> bool:
    return isinstance(point, str)


def _merge_others(others):
    merged: Dict[Tuple, int] = {}
    for q, e in others:
        merged[q] = merged.get(q, 0) + e
    return tuple(merged.items())


SymbolEntry = Union[FactoredFunction, Sequence[int]]


@dataclass(frozen=True)
class RationalKElement:
    """
    An element of K^M_degree(Q) tensor Q.

    Degree 0 is Q (`scalar`); degree 1 is Q^x tensor Q, recorded as exponents
    of primes (signs are torsion); higher degrees are zero.
    """

    degree: int
    scalar: Rational = Rational(0)
    primes: Tuple[Tuple[int, Rational], ...] = ()

    @property
    def is_zero(self) -> bool:
        return self.scalar == 0 and not self.primes

    @classmethod
    def of_unit(cls, a: Rational, coefficient=1) -> "RationalKElement":
        return cls(1, Rational(0), _prime_vector(a, coefficient))

    def __add__(self, other: "RationalKElement") -> "RationalKElement":
        if self.degree != other.degree:
            raise DimensionMismatch("elements of different degree")
        merged: Dict[int, Rational] = dict(self.primes)
        for prime, c in other.primes:
            merged[prime] = merged.get(prime, 0) + c
        return RationalKElement(
            self.degree,
            self.scalar + other.scalar,
            tuple(sorted((q, c) for q, c in merged.items() if c != 0)),
        )


def _prime_vector(a: Rational, coefficient=1) -> Tuple[Tuple[int, Rational], ...]:
    a = as_rational(a)
    exponents: Dict[int, Rational] = {}
    for prime, e in factorint(abs(a.p)).items():
        exponents[prime] = exponents.get(prime, 0) + e * as_rational(coefficient)
    for prime, e in factorint(a.q).items():
        exponents[prime] = exponents.get(prime, 0) - e * as_rational(coefficient)
    return tuple(sorted((q, c) for q, c in exponents.items() if c != 0))


def _parse_point(point) -> Point:
    if isinstance(point, str) and point.strip().lower() in ("inf", "infinity", "oo"):
        return INFINITY
    if isinstance(point, (list, tuple)):
        poly = Poly([as_rational(c) for c in point], t, domain="QQ")
        if poly.degree() != 1:
            raise UnsplitFactor(f"the point {poly.as_expr()} = 0 is not rational")
        a, b = [Rational(c) for c in poly.all_coeffs()]
        return -b / a
    return as_rational(point)


def _as_function(entry: SymbolEntry) -> FactoredFunction:
    if isinstance(entry, FactoredFunction):
        return entry
    raise UnsupportedEntry(f"{entry!r} is not a function of t")


def tame_residue(entries: Sequence[SymbolEntry], point) -> RationalKElement:
    """
    Tame symbol of {f_1, ..., f_p} in K^M_p(Q(t)) tensor Q at a point of P^1.

    With f_i = pi^(e_i) u_i the residue is sum_i (-1)^(i-1) e_i {u_1(x), ..., u_i omitted, ..., u_p(x)};
    terms with two uniformizers are torsion and vanish rationally.

    Raises:
        UnsplitFactor: the point is not rational.
    """
    point = _parse_point(point)
    functions = [_as_function(e) for e in entries]
    p = len(functions)
    if p == 0:
        raise InvalidInput("the empty symbol has no residue")
    orders = [f.order_at(point) for f in functions]
    if p == 1:
        return RationalKElement(0, Rational(orders[0]))
    if p > 2:
        # K^M_n(Q) is torsion for n >= 2
        return RationalKElement(p - 1)
    total = RationalKElement(1)
    for i, e in enumerate(orders):
        if e == 0:
            continue
        other = functions[1 - i]
        total = total + RationalKElement.of_unit(other.unit_value(point), (-1) ** i * e)
    return total


def restrict_along_power_map(entries: Sequence[SymbolEntry], d: int) -> List[FactoredFunction]:
    """Restriction along Q(s) -> Q(t), s = t^d."""
    if d < 1:
        raise InvalidInput("the power must be positive")
    return [_as_function(e).substitute_power(d) for e in entries]


# ----------------------------------------------------------------------------
# Transfer and symbol factorization
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TransferResult:
    index: int
    coordinates: Vector
    ambient: Vector


def _sublattice_wedge(basis: Sequence[Sequence[int]], p: int) -> Tuple[Matrix, int]:
    n = len(basis)
    if any(len(b) != n for b in basis):
        raise InfiniteIndex("the sublattice does not have finite index")
    index = lattice_index(basis, n) if n else 1
    if index == 0:
        raise InfiniteIndex("the sublattice does not have finite index")
    return compound_matrix(Matrix([list(b) for b in basis]).T, p), index


def monomial_transfer(basis: Sequence[Sequence[int]], f: Sequence, p: int) -> TransferResult:
    """
    Transfer from K(M) to K(M') for M' (rows of `basis`) of finite index in M.

    The result is [M : M'] times f, written in the wedge basis of M'.

    Raises:
        InfiniteIndex: M' does not have full rank.
    """
    W, index = _sublattice_wedge(basis, p)
    f = vec(f)
    coords = W.LUsolve(Matrix(f)) * index
    return TransferResult(index, tuple(Rational(c) for c in coords), tuple(index * x for x in f))


def restrict_to_sublattice(basis: Sequence[Sequence[int]], z: Sequence, p: int) -> Vector:
    """Restriction K(M') -> K(M): an element in the wedge basis of M' written in that of M."""
    W, _ = _sublattice_wedge(basis, p)
    return tuple(Rational(c) for c in W * Matrix(vec(z)))


@dataclass(frozen=True)
class SymbolFactorization:
    chart: str
    roots: Tuple[Rational, ...]
    symbol: MonomialSymbol
    fp_class: Vector

    @property
    def vanishes(self) -> bool:
        return all(c == 0 for c in self.fp_class)


def symbol_factor(entries: Sequence[SymbolEntry]) -> SymbolFactorization:
    """
    Factor a Milnor symbol through the wedge power of an exponent lattice.

    Monomial entries (integer vectors of M) use the identity chart and the
    whole torus. Functions of t use the chart t -> (t - c_1, ..., t - c_k) on
    their distinct roots; constants have zero exponent vector in either chart.

    Raises:
        UnsupportedEntry: monomials and functions of t are mixed.
        UnsplitFactor: a function of t does not split over Q.
    """
    functions = [e for e in entries if isinstance(e, FactoredFunction)]
    monomials = [tuple(int(x) for x in e) for e in entries if not isinstance(e, FactoredFunction)]
    if monomials and any(not f.is_constant for f in functions):
        raise UnsupportedEntry("monomial and univariate entries cannot be mixed")
    p = len(entries)

    if monomials:
        n = len(monomials[0])
        if any(len(m) != n for m in monomials):
            raise DimensionMismatch("monomial entries of different length")
        vectors = [tuple(int(x) for x in e) if not isinstance(e, FactoredFunction) else (0,) * n for e in entries]
        symbol = MonomialSymbol.of(n, vectors)
        _, group = f_spaces(orthant_fan(n), p)
        return SymbolFactorization("monomial", (), symbol, group.class_of(symbol.coordinates))

    for f in functions:
        if not f.is_split:
            raise UnsplitFactor("a factor does not split over Q")
    roots = tuple(sorted({c for f in functions for c in f.roots}))
    k = len(roots)
    vectors = [tuple(dict(zip(f.roots, f.exps)).get(c, 0) for c in roots) for f in functions]
    symbol = MonomialSymbol.of(k, vectors)
    if k == 0:
        return SymbolFactorization("curve", roots, symbol, symbol.coordinates)
    _, group = f_spaces(curve_chart_support(k), p)
    return SymbolFactorization("curve", roots, symbol, group.class_of(symbol.coordinates))
