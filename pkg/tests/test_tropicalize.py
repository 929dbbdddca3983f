import pytest

from services.fans import Fan, cone_from_generators, is_complete, is_fan, random_stellar_refinement, support_predicates
from services.tropicalize import (
    ExponentPolynomial,
    MonomialMap,
    curve_chart_support,
    image_support,
    properness_check,
    tropical_hypersurface,
    trop_ad,
)
from services.valuations import MonomialValuation, divisorial
from utils.errors import DimensionMismatch, InvalidInput, NoCenter
from utils.samples import random_complete_fan, random_flag, random_polynomial


def test_tropical_line(line):
    f = ExponentPolynomial.build(2, [(0, 0), (1, 0), (0, 1)])
    assert tropical_hypersurface(f).fan == line


def test_tropical_plane(plane):
    f = ExponentPolynomial.build(3, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    fan = tropical_hypersurface(f).fan
    assert len(fan.rays) == 4
    assert len(fan.cones_of_dim(2)) == 6
    assert fan == plane


def test_binomial_hypersurface_is_a_hyperplane():
    fan = tropical_hypersurface(ExponentPolynomial.build(2, [(0, 0), (1, 1)])).fan
    assert set(fan.rays) == {(1, -1), (-1, 1)}
    assert fan.dim == 1


def test_monomial_has_empty_tropicalization():
    fan = tropical_hypersurface(ExponentPolynomial.build(2, [(3, 1)])).fan
    assert fan == Fan.empty(2)


def test_polynomial_validation():
    with pytest.raises(InvalidInput):
        ExponentPolynomial.build(2, [])
    with pytest.raises(DimensionMismatch):
        ExponentPolynomial.build(2, [(1, 0), (1, 0, 0)])


def test_random_hypersurfaces_are_pure_fans(rng):
    for _ in range(10):
        f = random_polynomial(rng, 3, rng.randint(2, 4))
        fan = tropical_hypersurface(f).fan
        assert is_fan(fan.cones)[0]
        assert all(c.dim == 2 for c in fan.maximal)


def test_image_support_identity(line):
    assert image_support(MonomialMap.identity(2), line) == line


def test_image_support_projection(line, plane, p2):
    projected = image_support(MonomialMap.build([[1, 0]]), line)
    assert set(projected.rays) == {(1,), (-1,)}
    assert image_support(MonomialMap.build([[1, 0, 0], [0, 1, 0]]), plane) == p2


def test_image_support_zero_map(line):
    image = image_support(MonomialMap.build([[0, 0]]), line)
    assert image.maximal == (cone_from_generators([], 1),)
    assert image.dim == 0


def test_image_support_with_folding(p2):
    image = image_support(MonomialMap.build([[1, 1]]), p2)
    assert is_complete(image)
    assert set(image.rays) == {(1,), (-1,)}


def test_image_support_rank_mismatch(line):
    with pytest.raises(DimensionMismatch):
        image_support(MonomialMap.identity(3), line)


def test_monomial_map_is_dual_on_characters():
    psi = MonomialMap.build([[1, 2], [0, 1], [3, -1]])
    v, m = (2, -1), (1, 1, 1)
    assert sum(a * b for a, b in zip(psi.apply(v), m)) == sum(a * b for a, b in zip(v, psi.pullback_character(m)))


def test_properness_check(line, p2):
    assert properness_check(line, p2)
    assert not properness_check(line, Fan.from_maximal(2, [cone_from_generators([(1, 0), (0, 1)])]))
    assert properness_check(Fan.empty(2), line)


def test_trop_ad(p2, line):
    assert trop_ad(divisorial((1, 0)), p2) == cone_from_generators([(1, 0)])
    assert trop_ad(MonomialValuation(2), p2) == cone_from_generators([], 2)
    assert trop_ad(MonomialValuation.rational(2, (2, 0), (0, 1)), p2) == cone_from_generators([(1, 0), (0, 1)])
    with pytest.raises(NoCenter):
        trop_ad(MonomialValuation.rational(2, (1, 1)), line)


def test_trop_ad_is_compatible_with_refinement(rng, p2, p3):
    fans = [p2, p3] + [random_complete_fan(rng, rng.choice([2, 3])) for _ in range(3)]
    for _ in range(100):
        fan = rng.choice(fans)
        refined = random_stellar_refinement(fan, rng)
        x = random_flag(rng, fan.rank, rng.randint(1, fan.rank))
        v = MonomialValuation(fan.rank, x.levels)
        assert trop_ad(v, fan).contains_cone(trop_ad(v, refined))


def test_curve_chart_support(line):
    assert curve_chart_support(2) == line
    chart = curve_chart_support(3)
    assert len(chart.rays) == 4
    assert support_predicates(chart, chart)["equal"]


if __name__ == "__main__":
    pytest.main(["-v", "tests/test_tropicalize.py"])
