import pytest
from sympy import Rational

from services.compactified_fans import CompactifiedFan
from services.core_algebra import FormalReal, QSubspace, RealVector
from services.fans import cone_from_generators, locate_lex, random_stellar_refinement, refine
from services.higher_rank_trop import (
    Flag,
    LimitPoint,
    canonicalize,
    flag_height,
    ht1_compare,
    limit_point,
    residual_decomposition,
    separates,
    separating_tower,
    span_stabilization,
    vertical_trace_check,
)
from utils.errors import IndeterminateSign, OutsideSupport
from utils.samples import SQRT2, random_complete_fan, random_flag

BETA = FormalReal(SQRT2, (Rational(0), Rational(1)))
ONE = FormalReal.rational(1, SQRT2)
QUADRANT = cone_from_generators([(1, 0), (0, 1)])


def irrational_flag(*levels):
    return Flag(2, tuple(RealVector.from_entries(list(level), SQRT2) for level in levels))


def test_residual_decomposition_of_rational_level():
    level = residual_decomposition(Flag.rational(2, (1, 2))).levels[0]
    assert len(level.components) == 1
    assert QSubspace.span(2, level.components) == QSubspace.span(2, [(1, 2)])


def test_residual_decomposition_of_irrational_levels():
    mixed = residual_decomposition(irrational_flag((BETA, ONE))).levels[0]
    assert mixed.components == ((1, 0), (0, 1))
    assert mixed.coefficients == (BETA, ONE)
    diagonal = residual_decomposition(irrational_flag((BETA, BETA))).levels[0]
    assert diagonal.components == ((1, 1),)
    assert diagonal.coefficients == (BETA,)


def test_canonicalize_collapses_and_normalizes():
    assert canonicalize(Flag.rational(2, (1, 0), (2, 0))).levels == Flag.rational(2, (1, 0)).levels
    assert canonicalize(Flag.rational(2, (2, 0), (0, 3))).levels == Flag.rational(2, (1, 0), (0, 1)).levels
    assert canonicalize(Flag.rational(2, (1, 1), (1, 0))).levels == Flag.rational(2, (1, 1), (1, 0)).levels
    assert canonicalize(Flag.rational(2, (-3, 0))).levels == Flag.rational(2, (-1, 0)).levels


def test_canonicalize_is_idempotent(rng):
    for _ in range(20):
        x = canonicalize(random_flag(rng, 3, rng.randint(1, 3)))
        assert canonicalize(x.flag) == x


def test_canonical_flags_locate_like_their_source(rng, p3):
    for _ in range(20):
        x = random_flag(rng, 3, 3)
        assert locate_lex(p3, x.lex_point) == limit_point(canonicalize(x), p3)


def test_limit_point(p2, line):
    assert limit_point(canonicalize(Flag.rational(2, (1, 0), (0, 1))), p2) == QUADRANT
    assert limit_point(canonicalize(Flag.rational(2, (-1, -1))), line) == cone_from_generators([(-1, -1)])
    assert limit_point(canonicalize(Flag(2)), p2) == cone_from_generators([], 2)
    with pytest.raises(OutsideSupport):
        limit_point(canonicalize(Flag.rational(2, (1, 1))), line)


def test_limit_point_with_irrational_slope(p2):
    refined = refine(p2, ray=(2, 3))
    # sqrt2 < 3/2 puts (1, sqrt2) below the ray (2, 3)
    x = canonicalize(irrational_flag((ONE, BETA)))
    assert limit_point(x, refined) == cone_from_generators([(1, 0), (2, 3)])


def test_indeterminate_sign_propagates(p2, monkeypatch):
    monkeypatch.setenv("TROPK_INTERVAL_DEPTH", "0")
    refined = refine(p2, ray=(5, 7))
    x = Flag(2, (RealVector.from_entries([ONE, BETA], SQRT2),))
    with pytest.raises(IndeterminateSign):
        limit_point(canonicalize(x), refined)


def test_limit_point_cache(p2):
    lp = LimitPoint(canonicalize(Flag.rational(2, (1, 2))))
    assert lp.at(p2) == QUADRANT
    assert lp.at(CompactifiedFan.from_fan(p2, p2)) == QUADRANT
    assert list(lp.cached().values()) == [QUADRANT]


def test_flag_height():
    assert flag_height(Flag.rational(2, (1, 0), (0, 1))).height == 2
    assert flag_height(Flag.rational(2, (1, 0), (2, 0))).height == 1
    result = flag_height(irrational_flag((BETA, ONE)))
    assert (result.height, result.rational_rank) == (1, 2)


def test_flag_height_matches_value_group_on_random_flags(rng):
    for _ in range(200):
        x = random_flag(rng, rng.randint(1, 4), rng.randint(0, 3))
        result = flag_height(x)
        assert result.height == result.group_height


def test_canonicalize_ignores_positive_rescaling(rng):
    for _ in range(50):
        rank = rng.randint(1, 4)
        x = random_flag(rng, rank, rng.randint(1, 3))
        levels = []
        for level in x.levels:
            moved = level.scale(Rational(rng.randint(1, 9), rng.randint(1, 4)))
            for earlier in x.levels[: len(levels)]:
                moved = moved + earlier.scale(Rational(rng.randint(-3, 3), rng.randint(1, 3)))
            levels.append(moved)
        assert canonicalize(Flag(rank, tuple(levels))).levels == canonicalize(x).levels


def test_limit_points_are_compatible_with_refinement(rng, p2, p3):
    fans = [p2, p3] + [random_complete_fan(rng, rng.choice([2, 3])) for _ in range(3)]
    for _ in range(100):
        fan = rng.choice(fans)
        refined = random_stellar_refinement(fan, rng)
        x = canonicalize(random_flag(rng, fan.rank, rng.randint(1, fan.rank)))
        assert limit_point(x, fan).contains_cone(limit_point(x, refined))
        assert locate_lex(fan, x.lex_point).contains_cone(locate_lex(refined, x.lex_point))


def test_span_stabilization_after_subdivision(p2):
    tower = [p2, refine(p2, ray=(1, 1))]
    x = canonicalize(Flag.rational(2, (1, 1)))
    result = span_stabilization(x, tower)
    assert result.reached
    assert result.index == 1
    assert result.span == QSubspace.span(2, [(1, 1)])


def test_span_stabilization_immediate(p2):
    tower = [p2, refine(p2, ray=(1, 1))]
    full = span_stabilization(canonicalize(Flag.rational(2, (1, 0), (0, 1))), tower)
    assert full.reached and full.index == 0
    irrational = span_stabilization(canonicalize(irrational_flag((BETA, ONE))), tower)
    assert irrational.reached
    assert irrational.span == QSubspace.full(2)


def test_span_stabilization_needs_a_tower():
    with pytest.raises(ValueError):
        span_stabilization(canonicalize(Flag.rational(2, (1, 1))), [])


def test_ht1_compare():
    assert ht1_compare((2, 4)).levels == Flag.rational(2, (1, 2)).levels
    assert ht1_compare((0, 0)).length == 0
    assert ht1_compare(RealVector.from_entries([BETA, ONE], SQRT2)).length == 1


def test_vertical_trace_check(p2):
    check = vertical_trace_check(p2, Flag.rational(2, (1, 0)), [RealVector.from_rational((0, 1))])
    assert check.carrier == cone_from_generators([(1, 0)])
    assert check.located == QUADRANT
    assert check.agrees


def test_separating_tower(p2):
    x = canonicalize(Flag.rational(2, (1, 1)))
    y = canonicalize(Flag.rational(2, (1, 2)))
    assert not separates(x, y, [p2])
    tower = separating_tower(x, y, p2)
    assert len(tower) > 1
    assert separates(x, y, tower)


if __name__ == "__main__":
    pytest.main(["-v", "tests/test_higher_rank_trop.py"])
