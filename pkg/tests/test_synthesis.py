import numpy
import pytest
from bernstein_lite import _kernel as blt_kernel
from bernstein_lite import _symbolic as blt_symbolic
from bernstein_lite import _synthesis as blt_synthesis

RADIUS = 40


@pytest.fixture(scope="module")
def half_setup(half_params):
    kernel = blt_kernel.make_kernel(half_params)
    return kernel, blt_kernel.normalization_C(kernel)


@pytest.fixture(scope="module")
def worked_setup(worked_params):
    kernel = blt_kernel.make_kernel(worked_params)
    return kernel, blt_kernel.normalization_C(kernel)


def _point(entries, i, p, offset=None):
    offset = -(len(entries) // 2) if offset is None else offset
    segment = blt_symbolic.SubshiftSegment(entries=entries, offset=offset)
    return blt_symbolic.SkewPoint(segment=segment, i=i, p=p)


def _random_point(q, i, p, seed=0, radius=RADIUS):
    rng = numpy.random.default_rng(seed)
    # one extra symbol either side so the point survives a shift
    entries = rng.random((2 * radius + 3, q, 2))
    return _point(entries, i, p, offset=-(radius + 1))


def test_single_coefficient(half_setup):
    kernel, norm_C = half_setup
    entries = numpy.zeros((2 * RADIUS + 1, 1, 2))
    entries[RADIUS, 0, 0] = 1.0
    g = blt_synthesis.synth_F(_point(entries, 0, 2), kernel, norm_C, radius=RADIUS)
    assert complex(g(0.0)) == pytest.approx(1 / norm_C, abs=1e-12)
    assert abs(g(2.0)) < 1e-12


def test_zero_point(half_setup):
    kernel, norm_C = half_setup
    entries = numpy.zeros((2 * RADIUS + 1, 1, 2))
    g = blt_synthesis.synth_F(_point(entries, 1, 2), kernel, norm_C, radius=RADIUS)
    xs = numpy.linspace(-30, 30, 601)
    assert (g(xs) == 0).all()


@pytest.mark.parametrize("setup,q,p", [("half_setup", 1, 2), ("worked_setup", 3, 5)])
def test_unit_ball(request, setup, q, p):
    kernel, norm_C = request.getfixturevalue(setup)
    # the largest modulus coefficient everywhere
    entries = numpy.ones((2 * RADIUS + 1, q, 2))
    g = blt_synthesis.synth_F(_point(entries, 0, p), kernel, norm_C, radius=RADIUS)
    xs = numpy.linspace(-30, 30, 6001)
    assert numpy.abs(g(xs)).max() <= 1
    g = blt_synthesis.synth_F(_random_point(q, p - 1, p), kernel, norm_C, radius=RADIUS)
    assert numpy.abs(g(xs)).max() <= 1


@pytest.mark.parametrize("setup,q,p", [("half_setup", 1, 2), ("worked_setup", 3, 5)])
def test_recover_coeffs(request, setup, q, p):
    kernel, norm_C = request.getfixturevalue(setup)
    point = _random_point(q, 1, p, seed=2)
    g = blt_synthesis.synth_F(point, kernel, norm_C, radius=RADIUS)
    symbols = point.segment.at(-RADIUS, RADIUS)
    expected = symbols[..., 0] + 1j * symbols[..., 1]
    got = blt_synthesis.recover_coeffs(g)
    assert got.shape == (2 * RADIUS + 1, q)
    lo, hi = g.flat_range
    nodes = g.spacing * numpy.arange(lo, hi + 1) - g.shift
    bounds = (norm_C * g.truncation_bound(nodes)).reshape(got.shape)
    errors = numpy.abs(got - expected)
    assert errors.max() < 1e-3
    assert (errors <= bounds + 1e-12).all()
    window = blt_synthesis.recover_coeffs(g, window=(-5, 5))
    assert numpy.allclose(window, expected[RADIUS - 5 : RADIUS + 6], atol=1e-9)


def test_window_mismatch(half_setup, worked_setup):
    kernel, norm_C = half_setup
    point = _random_point(1, 0, 2, radius=10)
    with pytest.raises(blt_synthesis.WindowMismatch):
        blt_synthesis.synth_F(point, kernel, norm_C, radius=20)
    kernel, norm_C = worked_setup
    with pytest.raises(blt_synthesis.WindowMismatch):
        blt_synthesis.synth_F(_random_point(1, 0, 5), kernel, norm_C, radius=RADIUS)


def test_equivariance_without_wrap(half_setup):
    kernel, norm_C = half_setup
    point = _random_point(1, 0, 2, seed=3)
    g = blt_synthesis.synth_F(point, kernel, norm_C, radius=RADIUS)
    moved = blt_symbolic.skew_S(point)
    f_moved = blt_synthesis.synth_F(moved, kernel, norm_C, radius=RADIUS)
    t_image = blt_synthesis.skew_T(g)
    xs = numpy.linspace(-20, 20, 401)
    assert f_moved.phase_i == t_image.phase_i == 1
    assert numpy.allclose(f_moved(xs), t_image(xs), atol=1e-12)


@pytest.mark.parametrize("sign", [1, -1])
def test_equivariance_with_wrap(half_setup, half_params, sign):
    kernel, norm_C = half_setup
    point = _random_point(1, 1, 2, seed=4)
    g = blt_synthesis.synth_F(point, kernel, norm_C, radius=RADIUS)
    moved = blt_symbolic.skew_S(point, require=(-RADIUS, RADIUS))
    f_moved = blt_synthesis.synth_F(moved, kernel, norm_C, radius=RADIUS)
    t_image = blt_synthesis.skew_T(g)
    assert f_moved.phase_i == t_image.phase_i == 0
    xs = numpy.linspace(-20, 20, 401)
    slack = f_moved.truncation_bound(xs) + t_image.truncation_bound(xs) + 1e-12
    assert (numpy.abs(f_moved(xs) - t_image(xs)) <= slack).all()
    # G T = sigma G
    c = half_params.c
    g_image = blt_synthesis.apply_G(g, 1, c, sign=sign)
    g_t = blt_synthesis.apply_G(t_image, 0, c, sign=sign)
    assert (numpy.abs(g_t(xs) - g_image.shifted(1)(xs)) <= slack).all()


def test_phase_H(half_params):
    xs = numpy.linspace(-5, 5, 101)
    h0 = blt_synthesis.phase_H(0, half_params.c, p=2)
    h1 = blt_synthesis.phase_H(1, half_params.c, p=2)
    assert complex(h0(0.0)) == pytest.approx(1)
    assert numpy.allclose(numpy.abs(h1(xs)), 1)
    # |H(i1) - H(i2)| does not depend on x
    assert numpy.allclose(numpy.abs(h0(xs) - h1(xs)), 2)
    assert h0.band() == (0.5, 0.5)
    assert blt_synthesis.phase_H(0, 0.5, sign=-1).band() == (-0.5, -0.5)
    with pytest.raises(ValueError):
        blt_synthesis.phase_H(0, 0.5, sign=2)
    with pytest.raises(ValueError):
        blt_synthesis.phase_H(2, 0.5, p=2)


def test_apply_G(half_setup, half_params):
    kernel, norm_C = half_setup
    entries = numpy.zeros((2 * RADIUS + 1, 1, 2))
    g = blt_synthesis.synth_F(_point(entries, 0, 2), kernel, norm_C, radius=RADIUS)
    image = blt_synthesis.apply_G(g, 0, half_params.c)
    xs = numpy.linspace(-10, 10, 201)
    assert numpy.allclose(numpy.abs(image(xs)), 0.5)
    assert image.band() == pytest.approx((0.5, 2.3))
    with pytest.raises(ValueError):
        blt_synthesis.apply_G(g, 1, half_params.c)
    with pytest.raises(ValueError):
        blt_synthesis.apply_G(image, 0, half_params.c)
    with pytest.raises(ValueError):
        blt_synthesis.recover_coeffs(image)


def test_apply_G_at_nodes(worked_setup, worked_params):
    kernel, norm_C = worked_setup
    point = _random_point(3, 2, 5, seed=5)
    g = blt_synthesis.synth_F(point, kernel, norm_C, radius=RADIUS)
    image = blt_synthesis.apply_G(g, 2, worked_params.c)
    nodes = g.spacing * numpy.arange(-6, 6) - 2
    h = blt_synthesis.phase_H(2, worked_params.c)
    expect = (g(nodes) + h(nodes)) / 2
    assert numpy.allclose(image(nodes), expect, atol=1e-12)


@pytest.mark.parametrize("sign", [1, -1])
def test_demodulate_phase(worked_setup, worked_params, sign):
    kernel, norm_C = worked_setup
    c, p = worked_params.c, worked_params.p
    base = _random_point(3, 0, p, seed=6, radius=30)
    for i in range(p):
        point = blt_symbolic.SkewPoint(base.segment, i, p)
        g = blt_synthesis.synth_F(point, kernel, norm_C, radius=30)
        image = blt_synthesis.apply_G(g, i, c, sign=sign)
        assert blt_synthesis.demodulate_phase(image, c, p, sign=sign) == i


def test_realify():
    xs = numpy.linspace(-3, 3, 61)
    real = blt_synthesis.realify(blt_synthesis.PhaseTerm(c=1.0, i=0))
    values = real(xs)
    assert not numpy.iscomplexobj(values)
    assert numpy.allclose(values, numpy.cos(2 * numpy.pi * xs))
    assert real.band() == (-1.0, 1.0)
    assert numpy.allclose(real.shifted(0.25)(xs), numpy.cos(2 * numpy.pi * (xs + 0.25)))


def test_integer_sampling():
    real = blt_synthesis.realify(blt_synthesis.PhaseTerm(c=0.25, i=0))
    rescaled, raw = blt_synthesis.integer_sampling(real, (0, 4))
    assert numpy.allclose(raw, [1, 0, -1, 0], atol=1e-12)
    assert numpy.allclose(rescaled, [1, 0.5, 0, 0.5], atol=1e-12)
    zero = blt_synthesis.realify(blt_synthesis.PhaseTerm(c=0.25, i=0, scale=0.0))
    rescaled, _ = blt_synthesis.integer_sampling(zero, (-3, 4))
    assert (rescaled == 0.5).all()


def test_integer_sampling_unit_interval(half_setup):
    kernel, norm_C = half_setup
    g = blt_synthesis.synth_F(_random_point(1, 0, 2, seed=7), kernel, norm_C, radius=RADIUS)
    rescaled, raw = blt_synthesis.integer_sampling(blt_synthesis.realify(g), (-40, 41))
    assert 0 <= rescaled.min() and rescaled.max() <= 1
    assert numpy.allclose(2 * rescaled - 1, raw, atol=1e-15)


def test_metric_D():
    zero = blt_synthesis.PhaseTerm(c=0.0, i=0, scale=0.0)
    const = blt_synthesis.PhaseTerm(c=0.0, i=0, scale=0.3)
    value, err = blt_synthesis.metric_D(zero, zero, nmax=10)
    assert value == 0
    value, err = blt_synthesis.metric_D(const, zero, nmax=10)
    assert err == pytest.approx(2 * 2.0**-10)
    assert abs(value - 0.3) <= err


def test_metric_D_equivariance(half_setup):
    kernel, norm_C = half_setup
    point = _random_point(1, 0, 2, seed=8)
    g = blt_synthesis.synth_F(point, kernel, norm_C, radius=RADIUS)
    other = blt_synthesis.synth_F(blt_symbolic.skew_S(point), kernel, norm_C, radius=RADIUS)
    value, _ = blt_synthesis.metric_D(other, blt_synthesis.skew_T(g), nmax=15)
    assert value < 1e-12
    value, _ = blt_synthesis.metric_D(other, g, nmax=15)
    assert value > 0


def test_continuity_radius(half_setup):
    kernel, norm_C = half_setup
    coarse = blt_synthesis.continuity_radius(kernel, norm_C, 1e-2, extent=20)
    fine = blt_synthesis.continuity_radius(kernel, norm_C, 1e-4, extent=20)
    assert coarse >= 10
    assert fine >= coarse
    with pytest.raises(ValueError):
        blt_synthesis.continuity_radius(kernel, norm_C, 0, extent=20)


def test_coefficient_records(worked_setup):
    kernel, norm_C = worked_setup
    g = blt_synthesis.synth_F(_random_point(3, 0, 5, radius=5), kernel, norm_C, radius=5)
    rows = g.coefficient_records()
    assert len(rows) == 11 * 3
    assert rows[0][:2] == (-5, 0)
    assert rows[-1][:2] == (5, 2)
