from __future__ import annotations

import dataclasses
import math

import numpy
from scipy import signal as sp_signal

from bernstein_lite import _kernel as blt_kernel
from bernstein_lite import _synthesis as blt_synthesis
from bernstein_lite import _util as blt_util

SAMPLING_SHARPNESS = 0.2


class SpectralError(blt_util.BernsteinLiteError):
    module = "spectral"


class NyquistViolation(SpectralError):
    """the sample step aliases the signal band"""


class HypothesisViolation(SpectralError):
    """2 a' d >= 1, integer samples need not determine the signal"""


@dataclasses.dataclass(slots=True)
class SpectrumEstimate:
    """power of the windowed, sampled signal on the DFT frequency grid

    Notes
    -----
    power = |X|^2 dt / n, so power.sum() equals energy, the sum of
    |w y|^2 dt. Frequencies are in cycles per unit, with the e^{-2 pi i t xi}
    forward convention, so e^{2 pi i c t} peaks at +c.
    """

    freqs: numpy.ndarray
    power: numpy.ndarray
    window_kind: str
    window_radius: float
    sample_step: float
    energy: float
    window_energy: float

    @property
    def bin_width(self) -> float:
        return 1 / (2 * self.window_radius)

    @property
    def total(self) -> float:
        return float(self.power.sum())

    def parseval_error(self) -> float:
        """relative difference between total power and windowed energy"""
        if self.energy == 0:
            return abs(self.total)
        return abs(self.total - self.energy) / self.energy

    def to_table(self, title: str = "spectrum"):
        from cogent3 import make_table

        return make_table(data={"freq": self.freqs, "power": self.power}, title=title)


def spectrum_estimate(
    signal,
    window_radius: float = 100.0,
    sample_step: float = 0.1,
    window_kind: str = "hann",
) -> SpectrumEstimate:
    """DFT of the signal sampled on [-window_radius, window_radius)

    Raises
    ------
    NyquistViolation
        if sample_step >= 1 / (2 max|frequency|)
    """
    lo, hi = signal.band()
    fmax = max(abs(lo), abs(hi))
    if fmax > 0 and sample_step >= 1 / (2 * fmax):
        raise NyquistViolation(
            f"sample_step {sample_step} >= 1/(2 * {fmax}) = {1 / (2 * fmax)}"
        )

    n = int(round(2 * window_radius / sample_step))
    times = -window_radius + sample_step * numpy.arange(n)
    window = sp_signal.get_window(window_kind, n, fftbins=False)
    values = numpy.asarray(signal(times)) * window
    transform = numpy.fft.fftshift(numpy.fft.fft(values))
    freqs = numpy.fft.fftshift(numpy.fft.fftfreq(n, d=sample_step))
    power = numpy.abs(transform) ** 2 * sample_step / n
    return SpectrumEstimate(
        freqs=freqs,
        power=power,
        window_kind=window_kind,
        window_radius=float(window_radius),
        sample_step=float(sample_step),
        energy=float((numpy.abs(values) ** 2).sum() * sample_step),
        window_energy=float((window**2).sum() * sample_step),
    )


def band_energy_ratio(
    est: SpectrumEstimate,
    band: tuple[float, float],
    guard: float | None = None,
) -> float:
    """fraction of power in [lo - guard, hi + guard], 1 for a zero spectrum

    Notes
    -----
    guard defaults to one DFT bin.
    """
    guard = est.bin_width if guard is None else guard
    total = est.total
    if total <= 0:
        return 1.0
    lo, hi = band
    inside = (est.freqs >= lo - guard) & (est.freqs <= hi + guard)
    return float(est.power[inside].sum() / total)


def line_power_ratio(est: SpectrumEstimate, line: float, bins: int = 3) -> float:
    """power within bins of line, relative to the window energy

    Notes
    -----
    A component A exp(2 pi i line t) gives |A|^2.
    """
    near = numpy.abs(est.freqs - line) <= bins * est.bin_width
    if est.window_energy == 0:
        return 0.0
    return float(est.power[near].sum() / est.window_energy)


def symmetry_error(est: SpectrumEstimate) -> float:
    """max |P(xi) - P(-xi)| relative to the peak power"""
    paired = est.power[1:] if len(est.power) % 2 == 0 else est.power
    peak = paired.max() if len(paired) else 0.0
    if peak == 0:
        return 0.0
    return float(numpy.abs(paired - paired[::-1]).max() / peak)


def sampling_kernel(half_band: float) -> blt_kernel.InterpolationKernel:
    """a kernel on the lattice pZ whose realified signals lie in [-a', a']

    Notes
    -----
    With q = 1, sharpness 0.2 and p = ceil(1.2 / (0.75 a')) the band is
    [a'/8, a'/8 + 1.2/p], inside [a'/8, 7a'/8].
    """
    if half_band <= 0:
        raise ValueError(f"half_band must be > 0, not {half_band}")
    p = math.ceil((1 + SAMPLING_SHARPNESS) / (0.75 * half_band))
    return blt_kernel.build_kernel(
        p,
        1,
        half_band / 8,
        half_band,
        eps_sharp=SAMPLING_SHARPNESS,
    )


def sampling_signal(
    kernel: blt_kernel.InterpolationKernel,
    norm_C: float,
    coeffs: numpy.ndarray,
) -> blt_synthesis.RealSignal:
    """realified expansion with coefficients centred on n = 0"""
    coeffs = numpy.asarray(coeffs, dtype=complex).reshape(-1, 1)
    radius = (len(coeffs) - 1) // 2
    expansion = blt_synthesis.BandSignal(
        coeffs=coeffs,
        n_min=-radius,
        kernel=kernel,
        norm_C=norm_C,
        p=kernel.u,
        q=1,
    )
    return blt_synthesis.realify(expansion)


def sample_difference(g1, g2, step: float, n_range: tuple[int, int]) -> numpy.ndarray:
    """|g1(dn) - g2(dn)| for n_range[0] <= n < n_range[1]"""
    xs = step * numpy.arange(*n_range)
    return numpy.abs(numpy.asarray(g1(xs)) - numpy.asarray(g2(xs)))


def separation_floor(
    g1: blt_synthesis.RealSignal,
    g2: blt_synthesis.RealSignal,
) -> float:
    """least sampled separation the coefficients of g1 and g2 guarantee

    Notes
    -----
    At the node p n both expansions reduce to Re(coeffs[n]) / norm_C up to
    their truncation bounds, the floor is the best node's gap less both.
    """
    one, two = g1.source, g2.source
    nodes = one.nodes()
    gap = numpy.abs(numpy.real(one.coeffs.ravel() - two.coeffs.ravel())) / one.norm_C
    slack = one.truncation_bound(nodes) + two.truncation_bound(nodes)
    return float((gap - slack).max())


@dataclasses.dataclass(slots=True)
class SamplingEvidence:
    half_band: float
    step: float
    trials: int
    violations: int
    min_separation: float
    floor: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "half_band": self.half_band,
            "step": self.step,
            "trials": self.trials,
            "violations": self.violations,
            "min_separation": self.min_separation,
            "floor": self.floor,
            "passed": self.passed,
        }


def sampling_injectivity_check(
    half_band: float,
    step: float,
    trials: int,
    seed: int,
    radius: int = 60,
) -> SamplingEvidence:
    """distinct real signals in B([-a', a']) differ at some sample dn

    Notes
    -----
    Each pair must separate on the samples by at least its
    separation_floor, floor reports the least of those over the trials.

    Raises
    ------
    HypothesisViolation
        if 2 a' d >= 1
    ValueError
        if the kernel node spacing is not a multiple of d
    """
    if 2 * half_band * step >= 1:
        raise HypothesisViolation(
            f"2 a' d = {2 * half_band * step} >= 1 for a'={half_band}, d={step}"
        )

    kernel = sampling_kernel(half_band)
    stride = kernel.spacing / step
    if abs(stride - round(stride)) > 1e-9:
        raise ValueError(f"node spacing {kernel.spacing} is not a multiple of {step}")

    norm_C = blt_kernel.normalization_C(kernel)
    rng = blt_util.stage_rng(seed, "sampling")
    extent = round(radius * stride)
    n_range = (-extent, extent + 1)
    violations = 0
    min_sep = math.inf
    min_floor = math.inf
    for _ in range(trials):
        draws = rng.random((2, 2 * radius + 1, 2))
        first, second = draws[..., 0] + 1j * draws[..., 1]
        g1 = sampling_signal(kernel, norm_C, first)
        g2 = sampling_signal(kernel, norm_C, second)
        separation = float(sample_difference(g1, g2, step, n_range).max())
        floor = separation_floor(g1, g2)
        min_sep = min(min_sep, separation)
        min_floor = min(min_floor, floor)
        if separation <= 0 or separation < floor:
            violations += 1

    return SamplingEvidence(
        half_band=half_band,
        step=step,
        trials=trials,
        violations=violations,
        min_separation=float(min_sep) if trials else 0.0,
        floor=float(min_floor) if trials else 0.0,
    )
