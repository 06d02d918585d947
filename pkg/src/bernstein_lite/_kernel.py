from __future__ import annotations

import dataclasses
import math

import numba
import numpy

from bernstein_lite import _params as blt_params
from bernstein_lite import _util as blt_util


class KernelError(blt_util.BernsteinLiteError):
    module = "kernel"


class BandOverflow(KernelError):
    """the kernel band leaves [t1, t2]"""


@dataclasses.dataclass(slots=True, frozen=True)
class InterpolationKernel:
    """f(x) = sinc((v/u) x) sinc(eps (v/u) x) exp(2 pi i x0 x)

    Notes
    -----
    f(0) = 1 and f vanishes on (u/v) Z \\ {0}. The spectrum of f is
    [t1, t1 + (1 + eps)(v/u)].
    """

    u: int
    v: int
    t1: float
    t2: float
    eps_sharp: float
    x0: float
    C1: float = math.nan

    @property
    def alpha(self) -> float:
        return self.v / self.u

    @property
    def spacing(self) -> float:
        """the interpolation lattice spacing u/v"""
        return self.u / self.v

    @property
    def band(self) -> tuple[float, float]:
        return self.t1, self.t1 + (1 + self.eps_sharp) * self.alpha

    def __call__(self, x):
        return eval_kernel(self, x)

    def to_dict(self) -> dict:
        return {
            "u": self.u,
            "v": self.v,
            "t1": self.t1,
            "t2": self.t2,
            "eps_sharp": self.eps_sharp,
            "x0": self.x0,
            "C1": self.C1,
        }


def eval_kernel(kernel: InterpolationKernel, x):
    """kernel value at x (scalar or array)"""
    x = numpy.asarray(x, dtype=float)
    ax = kernel.alpha * x
    # numpy.sinc is sin(pi t)/(pi t) with sinc(0) == 1
    envelope = numpy.sinc(ax) * numpy.sinc(kernel.eps_sharp * ax)
    return envelope * numpy.exp(2j * numpy.pi * kernel.x0 * x)


def build_kernel(
    u: int,
    v: int,
    t1: float,
    t2: float,
    eps_sharp: float | None = None,
    scan_radius: float = 64.0,
    grid_step: float = 1e-3,
) -> InterpolationKernel:
    """kernel with lattice spacing u/v and band starting at t1

    Raises
    ------
    BandOverflow
        if t1 + (1 + eps_sharp) v/u > t2
    """
    eps = u / v if eps_sharp is None else float(eps_sharp)
    if eps <= 0:
        raise ValueError(f"eps_sharp must be > 0, not {eps}")

    width = (1 + eps) * v / u
    if t1 + width > t2 + 1e-12:
        raise BandOverflow(
            f"band [{t1}, {t1 + width}] exceeds [{t1}, {t2}] for eps_sharp={eps}"
        )

    kernel = InterpolationKernel(
        u=u,
        v=v,
        t1=float(t1),
        t2=float(t2),
        eps_sharp=eps,
        x0=float(t1 + width / 2),
    )
    c1 = decay_constant(kernel, scan_radius=scan_radius, grid_step=grid_step)
    return dataclasses.replace(kernel, C1=c1)


def make_kernel(
    params: blt_params.ConstructionParams,
    eps_sharp: float | None = None,
    scan_radius: float = 64.0,
    grid_step: float = 1e-3,
) -> InterpolationKernel:
    """the kernel for F images, u = p, v = q, t1 = a + eps0, t2 = b"""
    eps = params.sharpness if eps_sharp is None else eps_sharp
    return build_kernel(
        params.p,
        params.q,
        params.t1,
        params.b,
        eps_sharp=eps,
        scan_radius=scan_radius,
        grid_step=grid_step,
    )


def decay_constant(
    kernel: InterpolationKernel,
    scan_radius: float = 64.0,
    grid_step: float = 1e-3,
) -> float:
    """C1 with |f(x)| <= C1 / (1 + x^2)

    Notes
    -----
    |f| is even. On [0, scan_radius] the envelope is scanned, beyond it
    |f(x)| <= 1 / (pi^2 eps alpha^2 x^2) bounds (1+x^2)|f| by its value at
    scan_radius. The larger of the two is inflated by (1 + grid_step) for
    the points between grid nodes.
    """
    xs = numpy.arange(0.0, scan_radius + grid_step, grid_step)
    scanned = ((1 + xs**2) * numpy.abs(eval_kernel(kernel, xs))).max()
    r2 = scan_radius**2
    tail = (1 + r2) / (r2 * numpy.pi**2 * kernel.eps_sharp * kernel.alpha**2)
    return float(max(scanned, tail) * (1 + grid_step))


@numba.jit(nopython=True)
def _lattice_envelope(xs, spacing, radius):  # pragma: no cover
    """sum over |n| <= radius of 1 / (1 + (x - n spacing)^2)"""
    out = numpy.zeros(xs.shape[0])
    for k in range(xs.shape[0]):
        total = 0.0
        for n in range(-radius, radius + 1):
            d = xs[k] - n * spacing
            total += 1.0 / (1.0 + d * d)
        out[k] = total
    return out


def envelope_tail(spacing: float, radius: int) -> float:
    """bound on the lattice envelope sum over |n| > radius, x in [0, spacing)"""
    return 2 / spacing * (numpy.pi / 2 - math.atan((radius - 1) * spacing))


def normalization_C(
    kernel: InterpolationKernel,
    grid_step: float = 1e-3,
    radius: int = 256,
) -> float:
    """sup over x of sum over the lattice (u/v)Z of C1 / (1 + (x - l)^2)

    Notes
    -----
    The sum is periodic with period u/v so one period is scanned. The
    supremum is attained at the lattice nodes, where it equals
    C1 (pi/h) coth(pi/h) for spacing h.
    """
    spacing = kernel.spacing
    xs = numpy.arange(0.0, spacing, grid_step)
    sums = _lattice_envelope(xs, spacing, radius)
    return float(kernel.C1 * (sums.max() + envelope_tail(spacing, radius)))


def periodic_envelope_max(spacing: float) -> float:
    """max over x of sum over n in Z of 1 / (1 + (x - n spacing)^2)"""
    z = numpy.pi / spacing
    return float(z / numpy.tanh(z))


def lattice_abs_sum(kernel: InterpolationKernel, xs, radius: int = 400):
    """sum over |n| <= radius of |f(x - n u/v)| at each x"""
    xs = numpy.atleast_1d(numpy.asarray(xs, dtype=float))
    nodes = kernel.spacing * numpy.arange(-radius, radius + 1)
    total = numpy.zeros(len(xs))
    for start in range(0, len(xs), 512):
        chunk = xs[start : start + 512, None] - nodes
        total[start : start + 512] = numpy.abs(eval_kernel(kernel, chunk)).sum(axis=1)
    return total
