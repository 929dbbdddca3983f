# samples.py
#
# Seeded generators for the random corpora used by the property tests.

import random
from typing import List

from sympy import Matrix, Rational

from services.core_algebra import BasisElement, FormalReal, RealBasis, RealVector
from services.fans import Fan, projective_space, random_stellar_refinement
from services.higher_rank_trop import Flag
from services.tropicalize import ExponentPolynomial, tropical_hypersurface

SQRT2 = RealBasis((BasisElement("sqrt2", Rational(7, 5), Rational(3, 2), (Rational(1), Rational(0), Rational(-2))),))


def random_complete_fan(rng: random.Random, rank: int, refinements: int = 2) -> Fan:
    """Complete simplicial fan: P^rank followed by random stellar subdivisions."""
    fan = projective_space(rank)
    for _ in range(rng.randint(0, refinements)):
        fan = random_stellar_refinement(fan, rng)
    return fan


def random_polynomial(rng: random.Random, rank: int, terms: int = 3) -> ExponentPolynomial:
    exponents = set()
    while len(exponents) < terms:
        exponents.add(tuple(rng.randint(0, 2) for _ in range(rank)))
    return ExponentPolynomial.build(rank, sorted(exponents))


def random_support(rng: random.Random, rank: int) -> Fan:
    """A tropical hypersurface with two to four terms, or a complete fan."""
    if rng.random() < 0.25:
        return random_complete_fan(rng, rank, 1)
    return tropical_hypersurface(random_polynomial(rng, rank, rng.randint(2, 4))).fan


def random_real_vector(rng: random.Random, rank: int, mixed: bool) -> RealVector:
    entries = []
    for _ in range(rank):
        rational = Rational(rng.randint(-3, 3), rng.randint(1, 2))
        irrational = Rational(rng.randint(-2, 2)) if mixed else Rational(0)
        entries.append(FormalReal(SQRT2, (rational, irrational)))
    return RealVector.from_entries(entries, SQRT2)


def random_flag(rng: random.Random, rank: int, length: int, mixed: bool = True) -> Flag:
    return Flag(rank, tuple(random_real_vector(rng, rank, mixed and rng.random() < 0.5) for _ in range(length)))


def random_sublattice(rng: random.Random, n: int) -> List[List[int]]:
    """Rows of a random full-rank integer matrix with small entries."""
    while True:
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        if Matrix(rows).det() != 0:
            return rows
