from __future__ import annotations

import dataclasses
import math
import typing

import numpy
from scipy import signal as sp_signal

from bernstein_lite import _kernel as blt_kernel
from bernstein_lite import _symbolic as blt_symbolic
from bernstein_lite import _util as blt_util

DEFAULT_RADIUS = 200
_CHUNK = 256

WindowExhausted = blt_symbolic.WindowExhausted


class SynthesisError(blt_util.BernsteinLiteError):
    module = "synthesis"


class WindowMismatch(SynthesisError):
    """the segment does not cover the coefficient window"""


class Signal(typing.Protocol):
    def __call__(self, x): ...

    def band(self) -> tuple[float, float]: ...


@dataclasses.dataclass(slots=True, frozen=True)
class PhaseTerm:
    """scale * exp(sign 2 pi i c (x + shift + i))"""

    c: float
    i: int
    sign: int = 1
    scale: float = 1.0
    shift: float = 0.0

    def __call__(self, x):
        x = numpy.asarray(x, dtype=float)
        phase = self.sign * 2j * numpy.pi * self.c * (x + self.shift + self.i)
        return self.scale * numpy.exp(phase)

    def band(self) -> tuple[float, float]:
        line = self.sign * self.c
        return line, line

    def shifted(self, by: float = 1) -> PhaseTerm:
        return dataclasses.replace(self, shift=self.shift + by)


def phase_H(i: int, c: float, sign: int = 1, p: int | None = None) -> PhaseTerm:
    """H(i)(x) = exp(sign 2 pi i c (x + i)), a line at sign * c"""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, not {sign}")
    if p is not None and not 0 <= i < p:
        raise ValueError(f"i={i} not in [0, {p})")
    return PhaseTerm(c=c, i=i, sign=sign)


def _tail_sum(d, spacing: float):
    """bound on sum over k >= 0 of 1 / (1 + (d + k spacing)^2)"""
    d = numpy.asarray(d, dtype=float)
    near = blt_kernel.periodic_envelope_max(spacing)
    far = 1 / (1 + d**2) + (numpy.pi / 2 - numpy.arctan(d)) / spacing
    return numpy.where(d >= 0, far, near)


@dataclasses.dataclass(slots=True, frozen=True)
class BandSignal:
    """a truncated lattice expansion

    Notes
    -----
    g(x) = (1/norm_C) sum coeffs[n, j] f(x + shift - (p/q)(nq + j)) + extra(x)
    for n in [n_min, n_min + len(coeffs)). F images have shift == phase_i.
    coef_bound bounds the modulus of every coefficient.
    """

    coeffs: numpy.ndarray
    n_min: int
    kernel: blt_kernel.InterpolationKernel
    norm_C: float
    p: int
    q: int
    phase_i: int = 0
    shift: float = 0.0
    coef_bound: float = math.sqrt(2)
    extra: PhaseTerm | None = None

    @property
    def spacing(self) -> float:
        return self.p / self.q

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.coeffs) - 1

    @property
    def flat_range(self) -> tuple[int, int]:
        """first and last flat lattice index m = nq + j"""
        return self.n_min * self.q, (self.n_max + 1) * self.q - 1

    def nodes(self) -> numpy.ndarray:
        """positions of the interpolation nodes, row-major in (n, j)"""
        lo, hi = self.flat_range
        return self.spacing * numpy.arange(lo, hi + 1) - self.shift

    def __call__(self, x):
        x = numpy.asarray(x, dtype=float)
        flat = x.ravel()
        nodes = self.nodes()
        weights = self.coeffs.ravel() / self.norm_C
        out = numpy.empty(len(flat), dtype=complex)
        for start in range(0, len(flat), _CHUNK):
            chunk = flat[start : start + _CHUNK, None] - nodes
            out[start : start + _CHUNK] = self.kernel(chunk) @ weights
        if self.extra is not None:
            out += self.extra(flat)
        return out.reshape(x.shape)

    def band(self) -> tuple[float, float]:
        lo, hi = self.kernel.band
        if self.extra is not None:
            line, _ = self.extra.band()
            lo, hi = min(lo, line), max(hi, line)
        return lo, hi

    def truncation_bound(self, x):
        """bound on |g_infinite(x) - g(x)| from the omitted lattice terms"""
        x = numpy.asarray(x, dtype=float)
        lo, hi = self.flat_range
        spacing = self.spacing
        right = spacing * (hi + 1) - self.shift - x
        left = x - (spacing * (lo - 1) - self.shift)
        scale = self.coef_bound * self.kernel.C1 / self.norm_C
        return scale * (_tail_sum(right, spacing) + _tail_sum(left, spacing))

    def shifted(self, by: float = 1) -> BandSignal:
        """x -> g(x + by)"""
        extra = None if self.extra is None else self.extra.shifted(by)
        return dataclasses.replace(self, shift=self.shift + by, extra=extra)

    def coefficient_records(self) -> list[tuple[int, int, float, float]]:
        """(n, j, re, im) rows"""
        rows = []
        for row, values in enumerate(self.coeffs):
            for j, value in enumerate(values):
                rows.append((self.n_min + row, j, float(value.real), float(value.imag)))
        return rows


def synth_F(
    point: blt_symbolic.SkewPoint,
    kernel: blt_kernel.InterpolationKernel,
    norm_C: float,
    radius: int = DEFAULT_RADIUS,
) -> BandSignal:
    """F((a_n), i) = (1/C) sum_n sum_j (a_n^{j,1} + i a_n^{j,2}) f(x - (p/q)(nq+j) + i)

    Raises
    ------
    WindowMismatch
        if the segment does not cover [-radius, radius]
    """
    segment = point.segment
    if not segment.covers(-radius, radius):
        raise WindowMismatch(
            f"segment [{segment.start}, {segment.stop}) does not cover "
            f"[{-radius}, {radius}]"
        )
    symbols = segment.at(-radius, radius)
    if symbols.shape[1] != kernel.v:
        raise WindowMismatch(f"symbols have q={symbols.shape[1]}, kernel v={kernel.v}")

    coeffs = symbols[..., 0] + 1j * symbols[..., 1]
    return BandSignal(
        coeffs=coeffs,
        n_min=-radius,
        kernel=kernel,
        norm_C=norm_C,
        p=kernel.u,
        q=kernel.v,
        phase_i=point.i,
        shift=float(point.i),
    )


def skew_T(signal: BandSignal) -> BandSignal:
    """(g, i) -> (g(. + 1), i + 1 mod p)"""
    shifted = signal.shifted(1)
    return dataclasses.replace(shifted, phase_i=(signal.phase_i + 1) % signal.p)


def apply_G(signal: BandSignal, i: int, c: float, sign: int = 1) -> BandSignal:
    """G(g, i) = (g + H(i)) / 2"""
    if signal.phase_i != i:
        raise ValueError(f"signal has phase {signal.phase_i}, not {i}")
    if signal.extra is not None:
        raise ValueError("signal already carries a phase term")

    half = dataclasses.replace(phase_H(i, c, sign=sign, p=signal.p), scale=0.5)
    return dataclasses.replace(
        signal,
        coeffs=signal.coeffs / 2,
        coef_bound=signal.coef_bound / 2,
        extra=half,
    )


def recover_coeffs(
    signal: BandSignal,
    i: float | None = None,
    window: tuple[int, int] | None = None,
) -> numpy.ndarray:
    """coefficients read back at the nodes, norm_C g((p/q)(mq + j) - i)

    Parameters
    ----------
    signal
        an F image
    i
        node offset, defaults to the signal shift
    window
        inclusive range of n, defaults to the signal's window

    Returns
    -------
    complex array of shape (n_hi - n_lo + 1, q)
    """
    if signal.extra is not None:
        raise ValueError("coefficients are only recoverable from F images")

    i = signal.shift if i is None else i
    n_lo, n_hi = (signal.n_min, signal.n_max) if window is None else window
    flat = numpy.arange(n_lo * signal.q, (n_hi + 1) * signal.q)
    xs = signal.spacing * flat - i
    return (signal.norm_C * signal(xs)).reshape(-1, signal.q)


@dataclasses.dataclass(slots=True, frozen=True)
class RealSignal:
    """(g + conj(g)) / 2"""

    source: typing.Any

    def __call__(self, x):
        return numpy.real(self.source(x))

    def band(self) -> tuple[float, float]:
        lo, hi = self.source.band()
        edge = max(abs(lo), abs(hi))
        return -edge, edge

    def shifted(self, by: float = 1) -> RealSignal:
        return RealSignal(self.source.shifted(by))

    def truncation_bound(self, x):
        return self.source.truncation_bound(x)


def realify(signal) -> RealSignal:
    return RealSignal(signal)


def integer_sampling(
    signal,
    n_range: tuple[int, int],
) -> tuple[numpy.ndarray, numpy.ndarray]:
    """samples at the integers n_range[0] <= n < n_range[1]

    Returns
    -------
    (f(n) + 1) / 2 and the raw samples f(n)
    """
    ns = numpy.arange(*n_range, dtype=float)
    raw = numpy.real(signal(ns))
    return (raw + 1) / 2, raw


def metric_D(
    g1: Signal,
    g2: Signal,
    nmax: int,
    grid_step: float = 0.01,
    lipschitz: float | None = None,
) -> tuple[float, float]:
    """sum over n = 1..nmax of sup_{[-n, n]} |g1 - g2| / 2^n

    Notes
    -----
    The sups come from a grid. The error bound adds 2 * 2^-nmax for the
    omitted intervals and lipschitz * grid_step / 2 for the grid, lipschitz
    defaulting to the Bernstein bound 4 pi max|frequency|.
    """
    if lipschitz is None:
        edge = max(max(abs(v) for v in g.band()) for g in (g1, g2))
        lipschitz = 4 * numpy.pi * edge

    half = numpy.arange(0.0, nmax + grid_step / 2, grid_step)
    diff_pos = numpy.abs(numpy.asarray(g1(half)) - numpy.asarray(g2(half)))
    diff_neg = numpy.abs(numpy.asarray(g1(-half)) - numpy.asarray(g2(-half)))
    outward = numpy.maximum.accumulate(numpy.maximum(diff_pos, diff_neg))
    ns = numpy.arange(1, nmax + 1)
    index = numpy.searchsorted(half, ns, side="right") - 1
    value = float((outward[index] / 2.0**ns).sum())
    return value, float(2 * 2.0**-nmax + lipschitz * grid_step / 2)


def demodulate_phase(
    signal,
    c: float,
    p: int,
    sign: int = 1,
    radius: float = 200.0,
    grid_step: float = 0.05,
) -> int:
    """the i whose H(i) best matches the line of a G image

    Notes
    -----
    The Hann weighted correlation of g with H(i) is about cos(2 pi c (i0 - i))/2
    for the G image of phase i0, since the F part has no mass at c.
    """
    xs = numpy.arange(-radius, radius, grid_step)
    weights = sp_signal.get_window("hann", len(xs), fftbins=False)
    values = signal(xs) * weights
    scores = [
        float(numpy.real(values @ numpy.conj(phase_H(i, c, sign=sign)(xs))))
        for i in range(p)
    ]
    return int(numpy.argmax(scores))


def continuity_radius(
    kernel: blt_kernel.InterpolationKernel,
    norm_C: float,
    delta: float,
    extent: float,
) -> int:
    """least L with (q C1 / C) sum over |n| > L, j of 1/(1 + (x - (p/q)(nq+j) + i)^2)
    below delta / (2q) for every |x| <= extent and i in Z_p

    Notes
    -----
    Nodes omitted on either side lie at least L p + 1 - extent from x, the
    integral comparison bounds each side.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, not {delta}")

    p, q = kernel.u, kernel.v
    spacing = kernel.spacing
    target = delta / (2 * q)
    scale = q * kernel.C1 / norm_C
    L = max(math.ceil(extent / p), 0)
    while True:
        gap = L * p + 1 - extent
        if gap >= 0 and scale * 2 * float(_tail_sum(gap, spacing)) < target:
            return L
        L += 1
