import numpy
import pytest
from bernstein_lite import _kernel as blt_kernel


@pytest.fixture(scope="module")
def worked_kernel(worked_params):
    return blt_kernel.make_kernel(worked_params)


@pytest.fixture(scope="module")
def half_kernel(half_params):
    return blt_kernel.make_kernel(half_params)


def test_make_kernel(worked_kernel, worked_params):
    assert (worked_kernel.u, worked_kernel.v) == (5, 3)
    assert worked_kernel.spacing == pytest.approx(5 / 3)
    lo, hi = worked_kernel.band
    assert lo == pytest.approx(0.5)
    assert hi == pytest.approx(2.1)
    assert worked_params.a <= lo and hi <= worked_params.b


def test_kernel_values(worked_kernel):
    assert worked_kernel(0.0) == pytest.approx(1.0)
    nodes = worked_kernel.spacing * numpy.array([-4, -3, -2, -1, 1, 2, 3, 4])
    assert numpy.abs(worked_kernel(nodes)).max() < 1e-12


def test_decay_constant(worked_kernel, half_kernel):
    rng = numpy.random.default_rng(0)
    xs = rng.uniform(-1000, 1000, size=1_000_000)
    for kernel in (worked_kernel, half_kernel):
        assert kernel.C1 >= 1
        envelope = (1 + xs**2) * numpy.abs(kernel(xs))
        assert envelope.max() <= kernel.C1


def test_band_overflow():
    with pytest.raises(blt_kernel.BandOverflow):
        blt_kernel.build_kernel(2, 1, 0.8, 1.5)


def test_bad_sharpness():
    with pytest.raises(ValueError):
        blt_kernel.build_kernel(2, 1, 0.8, 3.3, eps_sharp=0.0)


def test_normalization_C(half_kernel, worked_kernel):
    for kernel in (half_kernel, worked_kernel):
        norm_C = blt_kernel.normalization_C(kernel)
        expect = kernel.C1 * blt_kernel.periodic_envelope_max(kernel.spacing)
        assert norm_C >= expect * (1 - 1e-9)
        assert norm_C == pytest.approx(expect, rel=1e-3)


def test_lattice_sum_normalised(worked_kernel):
    norm_C = blt_kernel.normalization_C(worked_kernel)
    rng = numpy.random.default_rng(1)
    xs = rng.uniform(-50, 50, size=5_000)
    assert (blt_kernel.lattice_abs_sum(worked_kernel, xs) / norm_C <= 1).all()


def test_periodic_envelope_max():
    # denser lattices sum to more, a sparse one only sees its nearest node
    assert blt_kernel.periodic_envelope_max(0.5) > blt_kernel.periodic_envelope_max(2)
    assert blt_kernel.periodic_envelope_max(100) == pytest.approx(1, abs=1e-3)


def test_kernel_to_dict(half_kernel):
    got = half_kernel.to_dict()
    assert got["u"] == 2
    assert got["C1"] == half_kernel.C1
