from fractions import Fraction

import numpy
import pytest
from bernstein_lite import _params as blt_params


def _failed_names(params):
    return [
        c.name for c in blt_params.failed_checks(blt_params.validate_params(params))
    ]


def test_exact():
    assert blt_params.exact(0.3) == Fraction(3, 10)
    assert blt_params.exact(2) == Fraction(2)
    assert blt_params.exact(Fraction(5, 6)) == Fraction(5, 6)


def test_worked_tuple_validates(worked_params):
    assert _failed_names(worked_params) == []
    assert worked_params.r == Fraction(5, 6)
    assert worked_params.ratio == Fraction(3, 5)
    assert worked_params.t1 == 0.5


def test_validate_reports_every_check(worked_params):
    report = blt_params.validate_params(worked_params)
    names = [c.name for c in report]
    assert names[0] == "a < b"
    assert "q/p+eps0+1 < b-a" in names
    assert "gcd(c*p, p) = 1" in names
    assert len(names) == 14


def test_c_too_large_fails(worked_params):
    params = blt_params.ConstructionParams.from_dict(
        dict(worked_params.to_dict(), c="0.3")
    )
    assert "c < a+eps0/2" in _failed_names(params)
    assert "a < c" not in _failed_names(params)


def test_wide_lattice_fails_strict(worked_params):
    params = blt_params.ConstructionParams.from_dict(
        dict(worked_params.to_dict(), q="8")
    )
    assert _failed_names(params) == ["q/p+eps0+1 < b-a"]


def test_non_integer_cp_fails(worked_params):
    params = blt_params.ConstructionParams.from_dict(
        dict(worked_params.to_dict(), c="0.15")
    )
    assert "c*p in Z\\{0}" in _failed_names(params)


def test_derive_reference_instance():
    params = blt_params.derive_params(0, 3, 1)
    assert (params.p, params.q) == (4, 3)
    assert params.eps0 == 0.625
    assert params.c == 0.25
    assert params.r == Fraction(2, 3)
    assert _failed_names(params) == []
    assert blt_params.deviation_notes(params) == []


def test_derive_infeasible():
    with pytest.raises(blt_params.Infeasible):
        blt_params.derive_params(0, 1.5, 2)


@pytest.mark.parametrize("a,b,s", [(1, 1, 0), (2, 1, 0), (0, 3, 6), (0, 3, -1)])
def test_derive_bad_inputs(a, b, s):
    with pytest.raises(blt_params.Infeasible):
        blt_params.derive_params(a, b, s)


def test_derive_relaxed_admits_large_target():
    # infeasible when strict
    params = blt_params.derive_params(0, 1.5, 2, mode=blt_params.RELAXED)
    assert (params.p, params.q) == (22, 23)
    assert params.sharpness == blt_params.RELAXED_SHARPNESS
    assert _failed_names(params) == []
    notes = blt_params.deviation_notes(params)
    assert any("relaxed" in n for n in notes)


def test_derive_zero_target_is_degenerate():
    params = blt_params.derive_params(0, 3, 0)
    assert (params.p, params.q) == (3, 1)
    assert params.r == 0
    assert params.degenerate
    assert _failed_names(params) == []
    notes = blt_params.deviation_notes(params)
    assert any("degenerate" in n for n in notes)


def test_derive_negative_band():
    params = blt_params.derive_params(-2, 1, 1)
    assert (params.p, params.q) == (4, 3)
    assert params.c == -1.75
    assert _failed_names(params) == []
    notes = blt_params.deviation_notes(params)
    assert any("negative" in n for n in notes)


def test_derive_output_validates():
    rng = numpy.random.default_rng(13)
    for _ in range(20):
        a = float(numpy.round(rng.uniform(-2, 2), 3))
        width = float(numpy.round(rng.uniform(2, 4), 3))
        s = float(numpy.round(rng.uniform(0, 1.6), 3))
        params = blt_params.derive_params(a, a + width, s)
        assert _failed_names(params) == [], (a, width, s)
        assert 0 <= params.r < 1


def test_search_bound_monotone():
    small = blt_params.derive_params(0, 3, 1, search_bound=8)
    large = blt_params.derive_params(0, 3, 1, search_bound=64)
    assert small == large
    with pytest.raises(blt_params.Infeasible):
        blt_params.derive_params(0, 1.5, 2, mode=blt_params.RELAXED, search_bound=20)


def test_derive_real_params():
    params = blt_params.derive_real_params(c=1.5, t=1, mode=blt_params.RELAXED)
    assert params.a == 0.5
    assert params.b == 1.5
    assert _failed_names(params) == []
    # a unit wide band leaves no room for the strict kernel
    with pytest.raises(blt_params.Infeasible):
        blt_params.derive_real_params(c=1.5, t=1)
    with pytest.raises(blt_params.Infeasible):
        blt_params.derive_real_params(c=1.0, t=2.0)


def test_derive_sampling_params():
    params = blt_params.derive_sampling_params(0.8, 0.2)
    assert params.b == 0.4
    assert params.mode == blt_params.RELAXED
    assert _failed_names(params) == []


@pytest.mark.parametrize("a_total,t", [(1.0, 0.2), (0.8, 0.8), (0.8, -0.1)])
def test_derive_sampling_params_infeasible(a_total, t):
    with pytest.raises(blt_params.Infeasible):
        blt_params.derive_sampling_params(a_total, t)


def test_params_dict_round_trip(worked_params):
    assert blt_params.ConstructionParams.from_dict(worked_params.to_dict()) == worked_params


@pytest.mark.parametrize("kwargs", [{"mode": "loose"}, {"p": 0}, {"q": 0}])
def test_params_rejects_bad_fields(worked_params, kwargs):
    data = dict(worked_params.to_dict(), **kwargs)
    with pytest.raises(ValueError):
        blt_params.ConstructionParams.from_dict(data)


def test_error_code():
    with pytest.raises(blt_params.Infeasible) as err:
        blt_params.derive_params(0, 1.5, 2)
    assert err.value.code == "params.Infeasible"
