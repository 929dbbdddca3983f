from itertools import combinations

import pytest
from sympy import Matrix, Rational

from services.compactified_fans import CompactifiedFan, stratum_projection
from services.core_algebra import (
    QSubspace,
    compound_matrix,
    integer_kernel,
    saturation,
    unimodular_complement,
    wedge_basis,
    wedge_of,
)
from services.fans import Fan, cone_from_generators, random_stellar_refinement, refine
from services.tropical_k import (
    FactoredFunction,
    MonomialSymbol,
    RationalKElement,
    f_spaces,
    flag_kernel_check,
    monomial_transfer,
    pullback,
    pullback_matrix,
    ray_over,
    residue_contract,
    restrict_along_power_map,
    restrict_to_sublattice,
    stabilize,
    symbol_factor,
    tame_residue,
)
from services.tropicalize import MonomialMap, image_support
from utils.errors import (
    InfiniteIndex,
    InvalidInput,
    InvalidUniformizer,
    NotAFacePair,
    SupportMismatch,
    UnsplitFactor,
    UnsupportedEntry,
)
from utils.samples import random_sublattice, random_support

ZERO2 = cone_from_generators([], 2)
ZERO3 = cone_from_generators([], 3)
E1 = cone_from_generators([(1, 0)])


def real_line():
    return Fan.from_maximal(1, [cone_from_generators([(1,)]), cone_from_generators([(-1,)])])


def test_f_spaces_of_the_line(line):
    assert f_spaces(line, 0)[1].dim == 1
    assert f_spaces(line, 1)[1].dim == 2
    assert f_spaces(line, 2)[1].dim == 0


def test_f_spaces_of_the_plane(plane):
    assert [f_spaces(plane, p)[1].dim for p in (1, 2, 3)] == [3, 3, 0]


def test_f_spaces_accept_compactified_fans(p2, line):
    cfan = CompactifiedFan.from_fan(p2, line)
    assert f_spaces(cfan, 1)[0].space == f_spaces(line, 1)[0].space


def test_f_spaces_reject_negative_degree(line):
    with pytest.raises(InvalidInput):
        f_spaces(line, -1)


def test_f_spaces_depend_only_on_the_support(rng):
    for _ in range(100):
        fan = random_support(rng, rng.choice([2, 3]))
        spaces = [f_spaces(fan, p)[0].space for p in range(fan.rank + 1)]
        refined = fan
        for _ in range(3):
            refined = random_stellar_refinement(refined, rng)
            assert [f_spaces(refined, p)[0].space for p in range(fan.rank + 1)] == spaces


def test_f_spaces_vanish_above_the_dimension(rng):
    for _ in range(10):
        fan = random_support(rng, 3)
        for p in range(fan.dim + 1, fan.rank + 1):
            assert f_spaces(fan, p)[1].dim == 0


def test_class_group_lift_round_trips(plane):
    _, group = f_spaces(plane, 2)
    for coords in [(1, 0, 0), (0, 2, -1), (3, 1, 4)]:
        assert group.class_of(group.lift(coords)) == coords


def test_pullback_along_projection(line):
    psi = MonomialMap.build([[1, 0]])
    assert pullback(psi, line, real_line(), 1, (1,)) == (1, 0)
    assert pullback_matrix(psi, line, real_line(), 1) == Matrix([[1], [0]])


def test_pullback_identity_and_degree_zero(line):
    identity = MonomialMap.identity(2)
    assert pullback_matrix(identity, line, line, 1) == Matrix.eye(2)
    assert pullback_matrix(identity, line, line, 0) == Matrix([[1]])


def test_pullback_is_injective(rng, line, p2):
    cases = []
    for _ in range(6):
        target = random_support(rng, rng.choice([2, 3]))
        cases.append((MonomialMap.identity(target.rank), random_stellar_refinement(target, rng), target))
    for rows in ([[1, 1], [0, 1]], [[2, 1], [1, 1]]):
        for _ in range(3):
            source = random_support(rng, 2)
            psi = MonomialMap.build(rows)
            cases.append((psi, source, image_support(psi, source)))
    cases.append((MonomialMap.build([[1, 0]]), line, real_line()))
    cases.append((MonomialMap.build([[1, 0]]), p2, real_line()))
    for psi, source, target in cases:
        for p in range(target.rank + 1):
            M = pullback_matrix(psi, source, target, p)
            assert M.shape[1] == 0 or M.rank() == M.shape[1]


def test_pullback_needs_matching_supports(line):
    half_line = Fan.from_maximal(1, [cone_from_generators([(1,)])])
    with pytest.raises(SupportMismatch):
        pullback_matrix(MonomialMap.build([[1, 0]]), line, half_line, 1)


def test_stabilize(line, p2):
    projection = stabilize([(None, real_line()), (MonomialMap.build([[1, 0]]), line)], 1)
    assert projection.dims == (1, 2)
    assert projection.isomorphisms == (False,)
    assert projection.index == 1
    refinement = stabilize([(None, p2), (MonomialMap.identity(2), refine(p2, ray=(1, 1)))], 2)
    assert refinement.isomorphisms == (True,)
    assert refinement.index == 0


def test_flag_kernel_check(line, plane):
    assert flag_kernel_check(line, 1).equal
    assert flag_kernel_check(line, 1).flag_kernel.dim == 0
    two = flag_kernel_check(line, 2)
    assert two.equal and two.flag_kernel == QSubspace.full(1)
    assert flag_kernel_check(plane, 2).equal
    assert flag_kernel_check(plane, 2).flag_kernel.dim == 0


def wedge_annihilator(fan, p):
    rows = []
    for cone in fan.maximal:
        span = saturation(cone.generators, fan.rank)
        rows.extend(wedge_of(list(subset), fan.rank) for subset in combinations(span, p))
    ambient = len(wedge_basis(fan.rank, p))
    if not rows:
        return QSubspace.full(ambient)
    return QSubspace.span(ambient, [tuple(v) for v in Matrix([list(r) for r in rows]).nullspace()])


def test_flag_kernel_check_on_random_supports(rng):
    for _ in range(8):
        fan = random_support(rng, 3)
        for p in (1, 2, 3):
            check = flag_kernel_check(fan, p)
            expected = wedge_annihilator(fan, p)
            assert check.flag_kernel == expected
            assert check.annihilator_kernel == expected
            assert check.equal


def test_residue_contract_on_p2(p2):
    omega = MonomialSymbol(2, 2, (Rational(1),))
    assert residue_contract(p2, ZERO2, E1, omega).coordinates == (1,)
    with pytest.raises(InvalidUniformizer):
        residue_contract(p2, ZERO2, E1, omega, m_pi=(0, 1))
    with pytest.raises(NotAFacePair):
        residue_contract(p2, ZERO2, cone_from_generators([(1, 0), (0, 1)]), omega)
    with pytest.raises(InvalidInput):
        residue_contract(p2, ZERO2, E1, MonomialSymbol(2, 0, (Rational(1),)))


def test_residue_of_uniformizer_wedge(p3):
    ray = cone_from_generators([(1, 0, 0)])
    here, there = stratum_projection(p3, ZERO3), stratum_projection(p3, ray)
    inclusion = compound_matrix(here.map_to(there).T, 1)
    # e1* ^ e2* has residue e2* along the divisor of e1
    omega = MonomialSymbol.of(3, [(1, 0, 0), (0, 1, 0)])
    for m_pi in [None, (1, 5, 0), (1, -2, 7)]:
        residue = residue_contract(p3, ZERO3, ray, omega, m_pi=m_pi)
        assert tuple(inclusion * Matrix(residue.coordinates)) == (0, 1, 0)
    assert residue_contract(p3, ZERO3, ray, MonomialSymbol.of(3, [(0, 1, 0), (0, 0, 1)])).is_zero


def test_residue_does_not_depend_on_the_uniformizer(rng, p3):
    tau = cone_from_generators([(1, 0, 0)])
    for sigma in [cone_from_generators([(-1, -1, -1)]), cone_from_generators([(1, 0, 0), (0, 1, 0)])]:
        base = ZERO3 if sigma.dim == 1 else tau
        u = ray_over(p3, base, sigma)
        complement = unimodular_complement(u)
        kernel = integer_kernel([u], len(u))
        k = len(u)
        for _ in range(50):
            omega = MonomialSymbol.of(k, [[rng.randint(-3, 3) for _ in range(k)] for _ in range(2)])
            shift = [sum(rng.randint(-2, 2) * b[i] for b in kernel) for i in range(k)]
            m_pi = tuple(c + s for c, s in zip(complement, shift))
            assert residue_contract(p3, base, sigma, omega) == residue_contract(p3, base, sigma, omega, m_pi=m_pi)


def test_tame_residue_at_a_simple_zero():
    entries = [FactoredFunction.build([2], [1]), FactoredFunction.build([5], [2], 3)]
    assert tame_residue(entries, 2) == RationalKElement(1, Rational(0), ((3, 3),))
    assert tame_residue(entries, [1, -2]) == tame_residue(entries, 2)


def test_residue_of_t_minus_c_evaluates_the_other_entry(rng):
    for _ in range(50):
        c = Rational(rng.randint(-6, 6), rng.randint(1, 3))
        roots = [r for r in (Rational(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(3)) if r != c]
        exps = [rng.choice([-2, -1, 1, 2, 3]) for _ in roots]
        constant = rng.choice([1, -1, 2, Rational(3, 5), -12])
        g = FactoredFunction.build(roots, exps, constant)
        value = Rational(constant)
        for r, e in zip(roots, exps):
            value *= (c - r) ** e
        assert tame_residue([FactoredFunction.build([c], [1]), g], c) == RationalKElement.of_unit(value)


def test_tame_residue_of_a_single_function():
    f = FactoredFunction.build([0], [3])
    assert tame_residue([f], 0) == RationalKElement(0, Rational(3))
    assert tame_residue([f], "inf") == RationalKElement(0, Rational(-3))
    assert tame_residue([f], 1) == RationalKElement(0, Rational(0))


def test_steinberg_and_torsion_symbols_vanish():
    t = FactoredFunction.build([0], [1])
    one_minus_t = FactoredFunction.from_polynomial([-1, 1])
    for point in [0, 1, "inf", 7]:
        assert tame_residue([t, one_minus_t], point).is_zero
    assert tame_residue([t, t], 0).is_zero


def test_steinberg_relation_with_scaling():
    lam, c = Rational(6, 5), Rational(2)
    a = FactoredFunction.build([c], [1], lam)
    one_minus_a = FactoredFunction.build([c + 1 / lam], [1], -lam)
    for point in [c, c + 1 / lam, "inf", -1]:
        assert tame_residue([a, one_minus_a], point).is_zero


def test_tame_residue_is_multiplicative(rng):
    def random_function():
        roots = rng.sample(range(-2, 3), 2)
        return FactoredFunction.build(roots, [rng.choice([-2, -1, 1, 2]) for _ in roots], rng.choice([2, 3, -5, Rational(1, 7)]))

    for _ in range(10):
        f, g, h = random_function(), random_function(), random_function()
        point = rng.choice([-2, -1, 0, 1, 2, "inf"])
        assert tame_residue([f * g, h], point) == tame_residue([f, h], point) + tame_residue([g, h], point)


def test_tame_residue_of_higher_symbols_vanishes():
    t = FactoredFunction.build([0], [1])
    two = FactoredFunction.constant_function(2)
    assert tame_residue([t, two, two], 0) == RationalKElement(2)
    with pytest.raises(InvalidInput):
        tame_residue([], 0)


def test_tame_residue_needs_a_rational_point():
    with pytest.raises(UnsplitFactor):
        tame_residue([FactoredFunction.build([0], [1])], [1, 0, -2])
    with pytest.raises(UnsupportedEntry):
        tame_residue([(1, 0)], 0)


@pytest.mark.parametrize("d", [2, 3])
def test_restriction_along_power_map_scales_the_residue(d):
    s = FactoredFunction.build([0], [1])
    s_minus_4 = FactoredFunction.build([4], [1])
    assert tame_residue([s, s_minus_4], 0) == RationalKElement.of_unit(-4)
    restricted = restrict_along_power_map([s, s_minus_4], d)
    assert restricted[0] == FactoredFunction.build([0], [d])
    assert tame_residue(restricted, 0) == RationalKElement.of_unit(-4, d)


def test_from_polynomial_factors_over_q():
    f = FactoredFunction.from_polynomial([2, 0, -8])
    assert f.roots == (-2, 2)
    assert f.constant == 2
    g = FactoredFunction.from_polynomial([1, 0, -2])
    assert not g.is_split
    assert g.degree == 2


def test_monomial_transfer_examples():
    assert monomial_transfer([[1, 0], [0, 1]], (3, 4), 1).coordinates == (3, 4)
    doubled = monomial_transfer([[2]], (1,), 1)
    assert (doubled.index, doubled.coordinates, doubled.ambient) == (2, (1,), (2,))
    tripled = monomial_transfer([[1, 1], [1, -2]], (1,), 2)
    assert tripled.index == 3
    assert tripled.coordinates == (-1,)
    assert tripled.ambient == (3,)


def test_transfer_after_restriction_multiplies_by_the_index(rng):
    for _ in range(20):
        n = rng.randint(1, 3)
        basis = random_sublattice(rng, n)
        p = rng.randint(1, n)
        index = abs(Matrix(basis).det())
        z = [rng.randint(-3, 3) for _ in wedge_basis(n, p)]
        ambient = [0] * len(z)
        for z_I, I in zip(z, wedge_basis(n, p)):
            ambient = [a + z_I * w for a, w in zip(ambient, wedge_of([basis[i] for i in I], n))]
        assert restrict_to_sublattice(basis, z, p) == tuple(ambient)
        result = monomial_transfer(basis, tuple(ambient), p)
        assert result.index == index
        assert result.coordinates == tuple(index * x for x in z)


def test_transfer_needs_finite_index():
    with pytest.raises(InfiniteIndex):
        monomial_transfer([[1, 2], [2, 4]], (1,), 2)
    with pytest.raises(InfiniteIndex):
        monomial_transfer([[1, 2]], (1, 0), 1)


def test_symbol_factor_monomials():
    xy = symbol_factor([[1, 0], [0, 1]])
    assert xy.chart == "monomial"
    assert xy.symbol.coordinates == (1,)
    assert not xy.vanishes
    constant = symbol_factor([FactoredFunction.constant_function(5), [1, 0]])
    assert constant.vanishes


def test_symbol_factor_curve_chart():
    steinberg = symbol_factor([FactoredFunction.build([0], [1]), FactoredFunction.from_polynomial([-1, 1])])
    assert steinberg.chart == "curve"
    assert steinberg.roots == (0, 1)
    assert not steinberg.symbol.is_zero
    assert steinberg.vanishes
    single = symbol_factor([FactoredFunction.build([0, 1], [1, -1])])
    assert not single.vanishes


def test_symbol_factor_rejections():
    with pytest.raises(UnsupportedEntry):
        symbol_factor([FactoredFunction.build([0], [1]), [1, 0]])
    with pytest.raises(UnsplitFactor):
        symbol_factor([FactoredFunction.from_polynomial([1, 0, -2])])


if __name__ == "__main__":
    pytest.main(["-v", "tests/test_tropical_k.py"])
