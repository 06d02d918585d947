import numpy
import pytest
from bernstein_lite import _kernel as blt_kernel
from bernstein_lite import _spectral as blt_spectral
from bernstein_lite import _synthesis as blt_synthesis


@pytest.fixture(scope="module")
def tone():
    return blt_spectral.spectrum_estimate(
        blt_synthesis.PhaseTerm(c=0.2, i=0),
        window_radius=320.0,
        sample_step=0.1,
    )


def test_tone_peak(tone):
    assert tone.bin_width == pytest.approx(1 / 640)
    assert tone.freqs[numpy.argmax(tone.power)] == pytest.approx(0.2, abs=tone.bin_width)


def test_band_energy_ratio(tone):
    assert blt_spectral.band_energy_ratio(tone, (0.15, 0.25)) >= 0.99
    assert blt_spectral.band_energy_ratio(tone, (1.0, 2.0)) <= 0.01


def test_parseval(tone):
    assert tone.parseval_error() < 1e-9
    assert tone.total == pytest.approx(tone.energy)


def test_line_power_ratio(tone):
    assert blt_spectral.line_power_ratio(tone, 0.2) == pytest.approx(1, abs=0.01)
    half = blt_spectral.spectrum_estimate(
        blt_synthesis.PhaseTerm(c=0.2, i=0, scale=0.5),
        window_radius=320.0,
    )
    assert blt_spectral.line_power_ratio(half, 0.2) == pytest.approx(0.25, abs=0.01)


def test_zero_signal():
    est = blt_spectral.spectrum_estimate(blt_synthesis.PhaseTerm(c=0.2, i=0, scale=0.0))
    assert est.total == 0
    assert blt_spectral.band_energy_ratio(est, (0.15, 0.25)) == 1.0
    assert blt_spectral.symmetry_error(est) == 0.0
    assert est.parseval_error() == 0


def test_real_signal_symmetric():
    real = blt_synthesis.realify(blt_synthesis.PhaseTerm(c=0.2, i=0))
    est = blt_spectral.spectrum_estimate(real, window_radius=320.0)
    assert blt_spectral.symmetry_error(est) < 1e-9
    # a complex tone is one sided
    one_sided = blt_spectral.spectrum_estimate(
        blt_synthesis.PhaseTerm(c=0.2, i=0),
        window_radius=320.0,
    )
    assert blt_spectral.symmetry_error(one_sided) > 0.5


def test_nyquist_violation():
    with pytest.raises(blt_spectral.NyquistViolation):
        blt_spectral.spectrum_estimate(blt_synthesis.PhaseTerm(c=6.0, i=0), sample_step=0.1)


def test_to_table(tone):
    table = tone.to_table()
    assert table.shape == (len(tone.freqs), 2)


def test_sampling_kernel():
    kernel = blt_spectral.sampling_kernel(0.4)
    lo, hi = kernel.band
    assert kernel.v == 1
    assert lo == pytest.approx(0.05)
    assert hi <= 0.4
    with pytest.raises(ValueError):
        blt_spectral.sampling_kernel(0)


def test_sampling_signal_distinguishes():
    kernel = blt_spectral.sampling_kernel(0.4)
    norm_C = blt_kernel.normalization_C(kernel)
    g1 = blt_spectral.sampling_signal(kernel, norm_C, [0, 1, 0])
    g2 = blt_spectral.sampling_signal(kernel, norm_C, [0, 0, 1])
    diff = blt_spectral.sample_difference(g1, g2, 1.0, (-10, 11))
    assert diff.max() >= 1 / norm_C - 1e-12
    same = blt_spectral.sample_difference(g1, g1, 1.0, (-10, 11))
    assert (same == 0).all()
    lo, hi = g1.band()
    assert -0.4 <= lo and hi <= 0.4


def test_sampling_signal_unit_interval():
    kernel = blt_spectral.sampling_kernel(0.4)
    norm_C = blt_kernel.normalization_C(kernel)
    rng = numpy.random.default_rng(0)
    coeffs = rng.random(41) + 1j * rng.random(41)
    real = blt_spectral.sampling_signal(kernel, norm_C, coeffs)
    rescaled, _ = blt_synthesis.integer_sampling(real, (-50, 51))
    assert 0 <= rescaled.min() and rescaled.max() <= 1


def test_sampling_injectivity_check():
    got = blt_spectral.sampling_injectivity_check(0.4, 1.0, trials=20, seed=0, radius=20)
    assert got.passed
    assert 0 < got.floor < got.min_separation
    assert got.to_dict()["trials"] == 20


def test_sampling_hypothesis_violation():
    with pytest.raises(blt_spectral.HypothesisViolation):
        blt_spectral.sampling_injectivity_check(0.6, 1.0, trials=5, seed=0)


def test_separation_floor():
    kernel = blt_spectral.sampling_kernel(0.4)
    norm_C = blt_kernel.normalization_C(kernel)
    rng = numpy.random.default_rng(1)
    coeffs = rng.random(81) + 1j * rng.random(81)
    moved = coeffs.copy()
    moved[40] += 0.5
    g1 = blt_spectral.sampling_signal(kernel, norm_C, coeffs)
    g2 = blt_spectral.sampling_signal(kernel, norm_C, moved)
    floor = blt_spectral.separation_floor(g1, g2)
    assert 0 < floor < 0.5 / norm_C
    diff = blt_spectral.sample_difference(g1, g2, 1.0, (-200, 201))
    assert diff.max() >= floor
    # an imaginary change is invisible at the nodes
    turned = coeffs.copy()
    turned[40] += 0.5j
    g3 = blt_spectral.sampling_signal(kernel, norm_C, turned)
    assert blt_spectral.separation_floor(g1, g3) < 0


def test_sampling_step_off_lattice():
    with pytest.raises(ValueError):
        blt_spectral.sampling_injectivity_check(0.4, 0.3, trials=2, seed=0, radius=5)
