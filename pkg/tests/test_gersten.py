import pytest

from services.fans import random_stellar_refinement, refine
from services.gersten import (
    ChowOracleResult,
    build_complex,
    check_square_zero,
    chow_oracle,
    cohomology_dims,
    compare,
)
from utils.errors import GerstenMismatch, InvalidInput, NotComplete
from utils.samples import random_complete_fan


def test_term_dims_of_p2(p2):
    assert build_complex(p2, 0).term_dims == [1]
    assert build_complex(p2, 1).term_dims == [2, 3]
    assert build_complex(p2, 2).term_dims == [1, 3, 3]


def test_build_complex_rejects_out_of_range_degree(p2):
    with pytest.raises(InvalidInput):
        build_complex(p2, 3)
    with pytest.raises(InvalidInput):
        build_complex(p2, -1)


def test_cohomology_of_p2(p2):
    assert cohomology_dims(build_complex(p2, 1)) == [0, 1]
    assert cohomology_dims(build_complex(p2, 2)) == [0, 0, 1]
    assert cohomology_dims(build_complex(p2, 0)) == [1]


@pytest.mark.parametrize(
    "name, p, expected",
    [
        ("p2", 1, 1),
        ("p2", 2, 1),
        ("p1xp1", 1, 2),
        ("p1xp1", 2, 1),
        ("f2", 1, 2),
        ("f2", 2, 1),
        ("p3", 0, 1),
        ("p3", 1, 1),
        ("p3", 2, 1),
        ("p3", 3, 1),
    ],
)
def test_top_cokernel_matches_chow(request, name, p, expected):
    fan = request.getfixturevalue(name)
    report = compare(build_complex(fan, p), chow_oracle(fan, p))
    assert report.top_cokernel == expected
    assert report.chow_oracle == expected
    assert report.match


def test_chow_oracle_methods(p3, line):
    assert chow_oracle(p3, 0) == ChowOracleResult(0, 1, "fundamental-class")
    assert chow_oracle(p3, 1) == ChowOracleResult(1, 1, "ray-class-rank")
    assert chow_oracle(p3, 2) == ChowOracleResult(2, 1, "orbit-relation")
    assert chow_oracle(p3, 3) == ChowOracleResult(3, 1, "degree")
    with pytest.raises(NotComplete):
        chow_oracle(line, 1)


def test_compare_reports_mismatch(p2, caplog):
    cx = build_complex(p2, 1)
    wrong = ChowOracleResult(1, 5, "ray-class-rank")
    with pytest.raises(GerstenMismatch):
        compare(cx, wrong)
    report = compare(cx, wrong, strict=False)
    assert not report.match
    assert report.top_cokernel == 1
    assert "differs" in caplog.text


def test_compare_needs_matching_degree(p2):
    with pytest.raises(InvalidInput):
        compare(build_complex(p2, 1), chow_oracle(p2, 2))


def test_differentials_square_to_zero_on_named_fans(p2, p1xp1, f2, p3):
    for fan in (p2, p1xp1, f2, p3):
        for p in range(fan.rank + 1):
            check_square_zero(build_complex(fan, p))


def test_differentials_square_to_zero(rng):
    for _ in range(50):
        fan = random_complete_fan(rng, rng.choice([2, 3]))
        check_square_zero(build_complex(fan, rng.randint(2, fan.rank)))


def test_top_cokernel_matches_chow_on_random_fans(rng):
    for _ in range(6):
        fan = random_complete_fan(rng, rng.choice([2, 3]))
        for p in range(1, fan.rank + 1):
            report = compare(build_complex(fan, p), chow_oracle(fan, p))
            assert report.match, (fan.rays, p)


def test_top_cokernel_grows_with_subdivision(p2, p3, rng):
    before = cohomology_dims(build_complex(p2, 1))[-1]
    after = cohomology_dims(build_complex(refine(p2, ray=(1, 1)), 1))[-1]
    assert after == before + 1
    refined = random_stellar_refinement(p3, rng)
    report = compare(build_complex(refined, 1), chow_oracle(refined, 1))
    assert report.match
    assert report.top_cokernel == len(refined.rays) - 3


if __name__ == "__main__":
    pytest.main(["-v", "tests/test_gersten.py"])
