# core_algebra.py
#
# Exact linear algebra over Q and Z: echelon subspaces, Smith normal form,
# integer lattices, exterior powers, and FormalReal numbers (rational
# combinations of a declared Q-linearly independent basis of reals).

import logging
from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import combinations
from math import comb, gcd
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Matrix, Rational, ilcm

from utils.config import get_interval_depth
from utils.errors import DimensionMismatch, IndeterminateSign, InvalidInput, UnknownBasis

logger = logging.getLogger(__name__)

Vector = Tuple[Rational, ...]
IntVector = Tuple[int, ...]
WedgeIndex = Tuple[int, ...]


def as_rational(value) -> Rational:
    """Coerce ints, sympy numbers and "a/b" strings to a canonical Rational."""
    if isinstance(value, str):
        value = value.strip()
    return Rational(value)


def vec(values: Iterable) -> Vector:
    return tuple(as_rational(x) for x in values)


def dot(a: Sequence, b: Sequence) -> Rational:
    if len(a) != len(b):
        raise DimensionMismatch(f"cannot pair vectors of length {len(a)} and {len(b)}")
    return Rational(sum((x * y for x, y in zip(a, b)), 0))


def primitive(v: Sequence) -> IntVector:
    """Positive rational multiple of v with coprime integer entries."""
    v = vec(v)
    if all(x == 0 for x in v):
        return tuple(0 for _ in v)
    scale = reduce(ilcm, (x.q for x in v), 1)
    ints = [int(x * scale) for x in v]
    g = reduce(gcd, (abs(x) for x in ints))
    return tuple(x // g for x in ints)


def rank(rows: Sequence[Sequence]) -> int:
    rows = [r for r in rows]
    if not rows or not rows[0]:
        return 0
    return Matrix(rows).rank()


# ----------------------------------------------------------------------------
# Smith normal form and integer lattices
# ----------------------------------------------------------------------------

def _swap_rows(A, i, j):
    A[i], A[j] = A[j], A[i]


def _swap_cols(A, i, j):
    for row in A:
        row[i], row[j] = row[j], row[i]


def _add_row(A, target, source, q):
    A[target] = [a + q * b for a, b in zip(A[target], A[source])]


def _add_col(A, target, source, q):
    for row in A:
        row[target] += q * row[source]


def smith_normal_form(A) -> Tuple[Matrix, Matrix, Matrix]:
    """
    Smith normal form of an integer matrix.

    Args:
        A: integer matrix (sympy Matrix or nested sequence).

    Returns:
        (U, D, V): unimodular U and V with U*A*V = D, D diagonal with
        d_1 | d_2 | ... and nonnegative diagonal entries.
    """
    A = Matrix(A)
    m, n = A.shape
    D = [[int(A[i, j]) for j in range(n)] for i in range(m)]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    t = 0
    while t < min(m, n):
        candidates = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j] != 0]
        if not candidates:
            break
        _, i, j = min(candidates)
        _swap_rows(D, t, i)
        _swap_rows(U, t, i)
        _swap_cols(D, t, j)
        _swap_cols(V, t, j)

        while True:
            i = next((i for i in range(t + 1, m) if D[i][t] != 0), None)
            if i is not None:
                q = D[i][t] // D[t][t]
                _add_row(D, i, t, -q)
                _add_row(U, i, t, -q)
                if D[i][t] != 0:
                    _swap_rows(D, t, i)
                    _swap_rows(U, t, i)
                continue
            j = next((j for j in range(t + 1, n) if D[t][j] != 0), None)
            if j is not None:
                q = D[t][j] // D[t][t]
                _add_col(D, j, t, -q)
                _add_col(V, j, t, -q)
                if D[t][j] != 0:
                    _swap_cols(D, t, j)
                    _swap_cols(V, t, j)
                continue
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t] != 0),
                None,
            )
            if bad is None:
                break
            # pull the non-divisible entry into the pivot row
            _add_row(D, t, bad[0], 1)
            _add_row(U, t, bad[0], 1)

        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1

    return Matrix(m, m, lambda i, j: U[i][j]), Matrix(m, n, lambda i, j: D[i][j]), Matrix(n, n, lambda i, j: V[i][j])


def smith_rank(D: Matrix) -> int:
    return sum(1 for k in range(min(D.shape)) if D[k, k] != 0)


def integer_kernel(rows: Sequence[Sequence[int]], n: int) -> List[IntVector]:
    """Z-basis of {x in Z^n : r.x = 0 for every row r}."""
    rows = [tuple(int(x) for x in r) for r in rows if any(x != 0 for x in r)]
    if not rows:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    _, D, V = smith_normal_form(rows)
    r = smith_rank(D)
    return [tuple(int(V[i, j]) for i in range(n)) for j in range(r, n)]


def saturation(vectors: Sequence[Sequence], n: int) -> List[IntVector]:
    """Z-basis of span_Q(vectors) intersected with Z^n."""
    ints = [primitive(v) for v in vectors]
    return integer_kernel(integer_kernel(ints, n), n)


def lattice_index(basis: Sequence[Sequence[int]], n: int) -> int:
    """Index of the sublattice spanned by `basis` in Z^n; 0 when it is not of full rank."""
    if not basis:
        return 1 if n == 0 else 0
    _, D, _ = smith_normal_form(basis)
    if smith_rank(D) < n:
        return 0
    index = 1
    for k in range(n):
        index *= int(D[k, k])
    return index


def lattice_contains(basis: Sequence[Sequence[int]], v: Sequence) -> bool:
    """Whether v is an integer combination of the rows of `basis`."""
    v = vec(v)
    if not basis:
        return all(x == 0 for x in v)
    U, D, _ = smith_normal_form(Matrix([list(b) for b in basis]).T)
    y = U * Matrix(v)
    for i in range(len(v)):
        d = D[i, i] if i < min(D.shape) else 0
        if d == 0:
            if y[i] != 0:
                return False
        elif y[i] % d != 0:
            return False
    return True


def unimodular_complement(u: Sequence[int]) -> IntVector:
    """An integer vector m with m.u = 1, for primitive u."""
    U, D, V = smith_normal_form([list(u)])
    if D[0, 0] != 1:
        raise InvalidInput(f"{tuple(u)} is not primitive")
    sign = int(U[0, 0])
    return tuple(sign * int(V[i, 0]) for i in range(len(u)))


def solve_rows(basis: Sequence[Sequence], target: Sequence) -> Optional[Vector]:
    """Coefficients c with sum c_i basis_i = target, or None when target is not in the span."""
    target = vec(target)
    if not basis:
        return () if all(x == 0 for x in target) else None
    A = Matrix([list(b) for b in basis]).T
    try:
        sol, params = A.gauss_jordan_solve(Matrix(target))
    except ValueError:
        return None
    sol = sol.subs({p: 0 for p in params})
    return tuple(Rational(x) for x in sol)


# ----------------------------------------------------------------------------
# Subspaces of Q^n
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class QSubspace:
    """A subspace of Q^ambient stored by its reduced row echelon basis."""

    ambient: int
    basis: Tuple[Vector, ...] = ()

    @classmethod
    def span(cls, ambient: int, vectors: Iterable[Sequence]) -> "QSubspace":
        rows = [vec(v) for v in vectors]
        for r in rows:
            if len(r) != ambient:
                raise DimensionMismatch(f"vector of length {len(r)} in Q^{ambient}")
        rows = [r for r in rows if any(x != 0 for x in r)]
        if not rows or ambient == 0:
            return cls(ambient, ())
        R, pivots = Matrix(rows).rref()
        return cls(ambient, tuple(tuple(Rational(x) for x in R.row(i)) for i in range(len(pivots))))

    @classmethod
    def zero(cls, ambient: int) -> "QSubspace":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: int) -> "QSubspace":
        return cls.span(ambient, [[int(i == j) for j in range(ambient)] for i in range(ambient)])

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> Tuple[int, ...]:
        return tuple(next(k for k, x in enumerate(row) if x != 0) for row in self.basis)

    def coordinates(self, v: Sequence) -> Optional[Vector]:
        """Coordinates of v in the echelon basis, or None when v is not in the subspace."""
        v = vec(v)
        coords = tuple(v[p] for p in self.pivots)
        recombined = tuple(
            Rational(sum((c * row[k] for c, row in zip(coords, self.basis)), 0)) for k in range(self.ambient)
        )
        return coords if recombined == v else None

    def contains(self, v: Sequence) -> bool:
        return self.coordinates(v) is not None

    def contains_subspace(self, other: "QSubspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def reduce(self, v: Sequence) -> Vector:
        """Representative of v modulo the subspace with zeros at every pivot column."""
        out = list(vec(v))
        for p, row in zip(self.pivots, self.basis):
            c = out[p]
            if c != 0:
                out = [a - c * b for a, b in zip(out, row)]
        return tuple(out)

    def sum(self, other: "QSubspace") -> "QSubspace":
        _check_ambient([self, other])
        return QSubspace.span(self.ambient, self.basis + other.basis)

    def annihilator(self) -> "QSubspace":
        """The subspace of the dual Q^ambient pairing to zero with every vector here."""
        if not self.basis:
            return QSubspace.full(self.ambient)
        return QSubspace.span(self.ambient, [tuple(c) for c in Matrix(list(self.basis)).nullspace()])

    def intersection(self, other: "QSubspace") -> "QSubspace":
        _check_ambient([self, other])
        return self.annihilator().sum(other.annihilator()).annihilator()

    def image(self, A: Matrix) -> "QSubspace":
        """Image under x -> A x."""
        if A.shape[1] != self.ambient:
            raise DimensionMismatch(f"{A.shape} matrix applied to Q^{self.ambient}")
        return QSubspace.span(A.shape[0], [tuple(A * Matrix(b)) for b in self.basis])


def _check_ambient(args: Sequence[QSubspace]):
    dims = {s.ambient for s in args}
    if len(dims) > 1:
        raise DimensionMismatch(f"ambient dimensions {sorted(dims)} differ")


def subspace_algebra(op: str, args: Sequence[QSubspace]) -> QSubspace:
    """Sum, intersection or annihilator of subspaces sharing one ambient space."""
    if not args:
        raise InvalidInput("subspace_algebra needs at least one argument")
    _check_ambient(args)
    if op == "sum":
        return reduce(QSubspace.sum, args)
    if op == "intersection":
        return reduce(QSubspace.intersection, args)
    if op == "annihilator":
        if len(args) != 1:
            raise InvalidInput("annihilator takes exactly one subspace")
        return args[0].annihilator()
    raise InvalidInput(f"unknown subspace operation {op!r}")


# ----------------------------------------------------------------------------
# Exterior powers
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def wedge_basis(n: int, p: int) -> Tuple[WedgeIndex, ...]:
    return tuple(combinations(range(n), p))


def wedge_position(index: Sequence[int], n: int) -> int:
    index = tuple(index)
    if any(b <= a for a, b in zip(index, index[1:])) or any(i < 0 or i >= n for i in index):
        raise InvalidInput(f"{index} is not a strictly increasing index tuple below {n}")
    return wedge_basis(n, len(index)).index(index)


def _minor(rows: Sequence[Vector], cols: WedgeIndex) -> Rational:
    p = len(cols)
    if p == 0:
        return Rational(1)
    if p == 1:
        return rows[0][cols[0]]
    if p == 2:
        a, b = rows
        i, j = cols
        return a[i] * b[j] - a[j] * b[i]
    return Rational(Matrix([[r[c] for c in cols] for r in rows]).det(method="bareiss"))


def wedge_of(vectors: Sequence[Sequence], n: int) -> Vector:
    """Coordinates of v_1 ^ ... ^ v_p in the basis wedge_basis(n, p)."""
    rows = [vec(v) for v in vectors]
    return tuple(_minor(rows, cols) for cols in wedge_basis(n, len(rows)))


def wedge_power(S: QSubspace, p: int) -> QSubspace:
    """The p-th exterior power of S inside the p-th exterior power of its ambient space."""
    if p < 0:
        raise InvalidInput("p must be nonnegative")
    ambient = comb(S.ambient, p)
    return QSubspace.span(ambient, [wedge_of(c, S.ambient) for c in combinations(S.basis, p)])


def compound_matrix(A: Matrix, p: int) -> Matrix:
    """Matrix of the map induced by A on p-th exterior powers (columns act on wedge coordinates)."""
    rows_idx = wedge_basis(A.shape[0], p)
    cols_idx = wedge_basis(A.shape[1], p)
    if p == 0:
        return Matrix([[1]])
    return Matrix(
        len(rows_idx),
        len(cols_idx),
        lambda i, j: A.extract(list(rows_idx[i]), list(cols_idx[j])).det(method="bareiss"),
    )


def contract(u: Sequence, omega: Sequence, n: int, p: int) -> Vector:
    """Interior product of a p-form omega on Q^n with the vector u."""
    u = vec(u)
    out = {I: Rational(0) for I in wedge_basis(n, p - 1)}
    for I, w in zip(wedge_basis(n, p), vec(omega)):
        if w == 0:
            continue
        for k, i in enumerate(I):
            if u[i] != 0:
                out[I[:k] + I[k + 1:]] += (-1) ** k * u[i] * w
    return tuple(out[I] for I in wedge_basis(n, p - 1))


# ----------------------------------------------------------------------------
# Formal reals
# ----------------------------------------------------------------------------

def _horner(coefficients: Sequence[Rational], x: Rational) -> Rational:
    value = Rational(0)
    for c in coefficients:
        value = value * x + c
    return value


def _sgn(x) -> int:
    return int(bool(x > 0)) - int(bool(x < 0))


@dataclass(frozen=True)
class BasisElement:
    """
    A declared real number beta_k.

    `polynomial` (highest degree first) is optional; when present it must change
    sign on the enclosure and is used to bisect the enclosure on demand.
    """

    name: str
    lower: Rational
    upper: Rational
    polynomial: Tuple[Rational, ...] = ()

    def __post_init__(self):
        if self.lower > self.upper:
            raise InvalidInput(f"empty enclosure for {self.name}")
        if self.polynomial and self.lower != self.upper:
            lo = _horner(self.polynomial, self.lower)
            hi = _horner(self.polynomial, self.upper)
            if lo != 0 and hi != 0 and _sgn(lo) == _sgn(hi):
                raise InvalidInput(f"defining polynomial of {self.name} does not change sign on its enclosure")

    @property
    def refinable(self) -> bool:
        return bool(self.polynomial) and self.lower != self.upper


@lru_cache(maxsize=4096)
def _refined_enclosure(element: BasisElement, depth: int) -> Tuple[Rational, Rational]:
    if depth == 0 or not element.refinable:
        return element.lower, element.upper
    lo, hi = _refined_enclosure(element, depth - 1)
    if lo == hi:
        return lo, hi
    p = element.polynomial
    mid = (lo + hi) / 2
    at_lo, at_mid = _horner(p, lo), _horner(p, mid)
    if at_mid == 0:
        return mid, mid
    if at_lo == 0:
        return lo, lo
    return (lo, mid) if _sgn(at_lo) != _sgn(at_mid) else (mid, hi)


@dataclass(frozen=True)
class RealBasis:
    """The declared basis beta_0 = 1, beta_1, ..., beta_s; beta_0 is implicit."""

    elements: Tuple[BasisElement, ...] = ()

    @property
    def size(self) -> int:
        return len(self.elements) + 1

    @property
    def names(self) -> Tuple[str, ...]:
        return ("1",) + tuple(e.name for e in self.elements)

    def enclosure(self, k: int, depth: int = 0) -> Tuple[Rational, Rational]:
        if k == 0:
            return Rational(1), Rational(1)
        return _refined_enclosure(self.elements[k - 1], depth)


RATIONAL_BASIS = RealBasis()


def _align(a_basis: RealBasis, a_coeffs: Vector, b_basis: RealBasis, b_coeffs: Vector):
    if a_basis == b_basis:
        return a_basis, a_coeffs, b_coeffs
    if a_basis == RATIONAL_BASIS:
        return b_basis, a_coeffs + (Rational(0),) * (b_basis.size - 1), b_coeffs
    if b_basis == RATIONAL_BASIS:
        return a_basis, a_coeffs, b_coeffs + (Rational(0),) * (a_basis.size - 1)
    raise UnknownBasis("FormalReals over different declared bases cannot be combined")


@dataclass(frozen=True)
class FormalReal:
    """sum_k coefficients[k] * beta_k over a declared basis."""

    basis: RealBasis
    coefficients: Vector

    def __post_init__(self):
        if len(self.coefficients) != self.basis.size:
            raise DimensionMismatch(f"{len(self.coefficients)} coefficients for a basis of size {self.basis.size}")

    @classmethod
    def rational(cls, q, basis: RealBasis = RATIONAL_BASIS) -> "FormalReal":
        return cls(basis, (as_rational(q),) + (Rational(0),) * (basis.size - 1))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    @property
    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coefficients[1:])

    def __add__(self, other: "FormalReal") -> "FormalReal":
        basis, a, b = _align(self.basis, self.coefficients, other.basis, other.coefficients)
        return FormalReal(basis, tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> "FormalReal":
        return FormalReal(self.basis, tuple(-c for c in self.coefficients))

    def __sub__(self, other: "FormalReal") -> "FormalReal":
        return self + (-other)

    def scale(self, q) -> "FormalReal":
        q = as_rational(q)
        return FormalReal(self.basis, tuple(q * c for c in self.coefficients))

    def over(self, basis: RealBasis) -> "FormalReal":
        """The same number expressed over a larger declared basis."""
        if self.basis == basis:
            return self
        if self.basis == RATIONAL_BASIS:
            return FormalReal(basis, self.coefficients + (Rational(0),) * (basis.size - 1))
        raise UnknownBasis("FormalReals over different declared bases cannot be combined")

    def enclosure(self, depth: int = 0) -> Tuple[Rational, Rational]:
        lo = hi = Rational(0)
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            a, b = self.basis.enclosure(k, depth)
            if c > 0:
                lo, hi = lo + c * a, hi + c * b
            else:
                lo, hi = lo + c * b, hi + c * a
        return lo, hi

    def sign(self, max_depth: Optional[int] = None) -> int:
        return formal_real_sign(self, max_depth)

    def __str__(self):
        terms = [f"{c}*{name}" if k else f"{c}" for k, (c, name) in enumerate(zip(self.coefficients, self.basis.names)) if c != 0]
        return " + ".join(terms) or "0"


def formal_real_sign(x: FormalReal, max_depth: Optional[int] = None) -> int:
    """
    Exact sign of a FormalReal.

    Zero exactly when every coefficient vanishes (the declared basis is
    Q-linearly independent). Otherwise the enclosure of the combination is
    refined until it excludes zero.

    Raises:
        IndeterminateSign: the enclosure still contains zero at max_depth.
    """
    if x.is_zero:
        return 0
    if x.is_rational:
        return _sgn(x.coefficients[0])
    max_depth = get_interval_depth() if max_depth is None else max_depth
    refinable = any(
        c != 0 and x.basis.elements[k - 1].refinable for k, c in enumerate(x.coefficients) if k > 0
    )
    for depth in range(max_depth + 1):
        lo, hi = x.enclosure(depth)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if not refinable:
            break
    logger.debug("sign of %s undecided after %d refinements", x, max_depth)
    raise IndeterminateSign(f"cannot separate {x} from zero; supply tighter enclosures")


@dataclass(frozen=True)
class RealVector:
    """A vector of R^n whose entries are FormalReals over one basis.

    Stored as one rational vector per basis element: v = sum_k beta_k components[k].
    """

    basis: RealBasis
    components: Tuple[Vector, ...]

    def __post_init__(self):
        if len(self.components) != self.basis.size:
            raise DimensionMismatch("one component per basis element is required")
        if len({len(c) for c in self.components}) > 1:
            raise DimensionMismatch("components of different lengths")

    @classmethod
    def from_rational(cls, v: Sequence, basis: RealBasis = RATIONAL_BASIS) -> "RealVector":
        v = vec(v)
        zero = tuple(Rational(0) for _ in v)
        return cls(basis, (v,) + (zero,) * (basis.size - 1))

    @classmethod
    def from_entries(cls, entries: Sequence[FormalReal], basis: RealBasis = RATIONAL_BASIS) -> "RealVector":
        if entries:
            basis = entries[0].basis
        for e in entries:
            if e.basis != basis:
                raise UnknownBasis("entries of a vector must share one basis")
        return cls(basis, tuple(tuple(e.coefficients[k] for e in entries) for k in range(basis.size)))

    @property
    def dim(self) -> int:
        return len(self.components[0])

    def entry(self, i: int) -> FormalReal:
        return FormalReal(self.basis, tuple(c[i] for c in self.components))

    def pair(self, m: Sequence) -> FormalReal:
        """The FormalReal m(v) for a rational covector m."""
        return FormalReal(self.basis, tuple(dot(m, c) for c in self.components))

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for c in self.components for x in c)

    @property
    def is_rational(self) -> bool:
        return all(x == 0 for c in self.components[1:] for x in c)

    def rational_span(self) -> QSubspace:
        """The minimal rational subspace whose realification contains the vector."""
        return QSubspace.span(self.dim, self.components)

    def scale(self, q) -> "RealVector":
        q = as_rational(q)
        return RealVector(self.basis, tuple(tuple(q * x for x in c) for c in self.components))

    def __add__(self, other: "RealVector") -> "RealVector":
        if self.basis != other.basis:
            raise UnknownBasis("vectors over different bases")
        return RealVector(self.basis, tuple(tuple(x + y for x, y in zip(a, b)) for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "RealVector":
        return self.scale(-1)

    def __sub__(self, other: "RealVector") -> "RealVector":
        return self + (-other)

    def apply(self, A: Matrix) -> "RealVector":
        """Image under the rational linear map x -> A x."""
        return RealVector(self.basis, tuple(tuple(Rational(x) for x in A * Matrix(c)) for c in self.components))
