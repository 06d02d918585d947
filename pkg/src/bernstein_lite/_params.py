from __future__ import annotations

import dataclasses
import math
import typing
from fractions import Fraction

from bernstein_lite import _util as blt_util

STRICT = "strict"
RELAXED = "relaxed"
MODES = (STRICT, RELAXED)

# kernel sharpness used by relaxed mode when none is given
RELAXED_SHARPNESS = 0.25
_INT_TOL = 1e-9


class ParamsError(blt_util.BernsteinLiteError):
    module = "params"


class Infeasible(ParamsError):
    """no parameter tuple satisfies the constraints"""


def exact(value: float | int | Fraction) -> Fraction:
    """the exact rational value of the decimal rendering of value"""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(repr(float(value)))


@dataclasses.dataclass(slots=True, frozen=True)
class ConstructionParams:
    """scalar parameters driving the construction

    Notes
    -----
    The band of the complex signals is [a, b], the target mean dimension is
    s. Symbols live in ([0,1]^2)^q, the cyclic coordinate has order p. The
    derived star density r = s p / (2 q) is held exactly.
    """

    a: float
    b: float
    s: float
    p: int
    q: int
    eps0: float
    c: float
    mode: str = STRICT
    eps_sharp: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, not {self.mode!r}")
        if self.p < 1 or self.q < 1:
            raise ValueError(f"p and q must be positive, got p={self.p}, q={self.q}")

    @property
    def ratio(self) -> Fraction:
        """q / p, the half density of the lattice"""
        return Fraction(self.q, self.p)

    @property
    def spacing(self) -> Fraction:
        """p / q, the lattice spacing of the signal expansion"""
        return Fraction(self.p, self.q)

    @property
    def r(self) -> Fraction:
        return exact(self.s) * self.p / (2 * self.q)

    @property
    def sharpness(self) -> float:
        """kernel sharpness, p / q unless set explicitly"""
        if self.eps_sharp is None:
            return self.p / self.q
        return float(self.eps_sharp)

    @property
    def t1(self) -> float:
        """left end of the band of F images"""
        return float(exact(self.a) + exact(self.eps0))

    @property
    def degenerate(self) -> bool:
        return self.r == 0

    def to_dict(self) -> dict[str, str]:
        """flat key value rendering, exact decimals"""
        data = {
            "a": repr(float(self.a)),
            "b": repr(float(self.b)),
            "s": repr(float(self.s)),
            "p": str(self.p),
            "q": str(self.q),
            "eps0": repr(float(self.eps0)),
            "c": repr(float(self.c)),
            "mode": self.mode,
        }
        if self.eps_sharp is not None:
            data["eps_sharp"] = repr(float(self.eps_sharp))
        return data

    @classmethod
    def from_dict(cls, data: dict[str, typing.Any]) -> ConstructionParams:
        eps_sharp = data.get("eps_sharp")
        return cls(
            a=float(data["a"]),
            b=float(data["b"]),
            s=float(data["s"]),
            p=int(data["p"]),
            q=int(data["q"]),
            eps0=float(data["eps0"]),
            c=float(data["c"]),
            mode=str(data.get("mode", STRICT)),
            eps_sharp=None if eps_sharp in (None, "") else float(eps_sharp),
        )


@dataclasses.dataclass(slots=True, frozen=True)
class ParamCheck:
    name: str
    passed: bool
    residual: float


def _check(name: str, residual: Fraction | float, strict: bool = True) -> ParamCheck:
    passed = residual > 0 if strict else residual >= 0
    return ParamCheck(name=name, passed=bool(passed), residual=float(residual))


def _cp_integer(params: ConstructionParams) -> tuple[int, float]:
    cp = float(params.c) * params.p
    nearest = round(cp)
    return nearest, abs(cp - nearest)


def validate_params(params: ConstructionParams) -> list[ParamCheck]:
    """evaluates every parameter constraint

    Returns
    -------
    one ParamCheck per constraint, residual > 0 (or == 0 for the non-strict
    ones) means the constraint holds
    """
    a, b, s = exact(params.a), exact(params.b), exact(params.s)
    eps0, c = exact(params.eps0), exact(params.c)
    width = b - a
    ratio = params.ratio
    checks = [
        _check("a < b", width),
        _check("s >= 0", s, strict=False),
        _check("s < 2(b-a)", 2 * width - s),
        _check("s/2 < q/p", ratio - s / 2),
        _check("q/p < b-a", width - ratio),
        _check("0 < eps0", eps0),
        _check("eps0 < b-a", width - eps0),
        _check("a < c", c - a),
        _check("c < a+eps0/2", a + eps0 / 2 - c),
    ]
    if params.mode == STRICT:
        checks.append(_check("q/p+eps0+1 < b-a", width - (ratio + eps0 + 1)))
    else:
        sharp = exact(params.sharpness)
        checks.append(
            _check("(1+eps_sharp)q/p+eps0 < b-a", width - ((1 + sharp) * ratio + eps0))
        )

    nearest, dist = _cp_integer(params)
    checks.append(
        ParamCheck(
            name="c*p in Z\\{0}",
            passed=dist <= _INT_TOL and nearest != 0,
            residual=dist,
        )
    )
    # H(i1) - H(i2) vanishes for i1 != i2 unless c*p is a unit mod p
    divisor = math.gcd(nearest, params.p)
    checks.append(
        ParamCheck(name="gcd(c*p, p) = 1", passed=divisor == 1, residual=divisor)
    )
    r = params.r
    checks.append(
        ParamCheck(
            name="0 <= r < 1",
            passed=0 <= r < 1,
            residual=float(1 - r) if r >= 0 else float(r),
        )
    )
    checks.append(
        ParamCheck(
            name="2r(q/p) = s",
            passed=2 * r * ratio == s,
            residual=float(abs(2 * r * ratio - s)),
        )
    )
    return checks


def failed_checks(report: list[ParamCheck]) -> list[ParamCheck]:
    return [check for check in report if not check.passed]


def checks_table(report: list[ParamCheck], title: str = "Parameter checks"):
    """cogent3 table of a validation report"""
    from cogent3 import make_table

    data = {
        "check": [c.name for c in report],
        "passed": [c.passed for c in report],
        "residual": [c.residual for c in report],
    }
    return make_table(data=data, title=title)


def deviation_notes(params: ConstructionParams) -> list[str]:
    """where the parameters depart from a literal reading of the construction"""
    notes = []
    nearest, _ = _cp_integer(params)
    if nearest < 0:
        notes.append(
            f"c*p = {nearest} is a negative integer, natural multiples of 1/p "
            "do not exist in (a, a+eps0/2)"
        )
    if params.degenerate:
        notes.append("r = 0 is degenerate, each level-1 word still carries one star")
    if params.mode == RELAXED:
        notes.append(
            f"relaxed mode, kernel sharpness {params.sharpness} decoupled from p/q"
        )
    return notes


def _least_multiple(a: Fraction, upper: Fraction, p: int) -> Fraction | None:
    """least k/p in (a, upper) with k != 0 and gcd(k, p) == 1"""
    k = math.floor(a * p) + 1
    while Fraction(k, p) < upper:
        if k != 0 and math.gcd(k, p) == 1:
            return Fraction(k, p)
        k += 1
    return None


def derive_params(
    a: float,
    b: float,
    s: float,
    mode: str = STRICT,
    search_bound: int = 64,
    eps_sharp: float | None = None,
) -> ConstructionParams:
    """selects p, q, eps0, c for the band [a, b] and target s

    Parameters
    ----------
    a, b
        band end points
    s
        target mean dimension, 0 <= s < 2(b - a)
    mode
        'strict' couples the kernel sharpness to p/q, 'relaxed' uses eps_sharp
    search_bound
        largest p and q considered
    eps_sharp
        kernel sharpness for relaxed mode, defaults to RELAXED_SHARPNESS

    Notes
    -----
    p is minimised first, then q. eps0 is half the remaining slack, c the
    least multiple of 1/p in (a, a+eps0/2) that is a unit modulo p.

    Raises
    ------
    Infeasible
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, not {mode!r}")

    ea, eb, es = exact(a), exact(b), exact(s)
    width = eb - ea
    if width <= 0:
        raise Infeasible(f"band [{a}, {b}] is empty")
    if not 0 <= es < 2 * width:
        raise Infeasible(f"s={s} outside [0, 2(b-a)) = [0, {float(2 * width)})")

    if mode == RELAXED and eps_sharp is None:
        eps_sharp = RELAXED_SHARPNESS
    if mode == STRICT:
        eps_sharp = None

    for p in range(1, search_bound + 1):
        for q in range(1, search_bound + 1):
            ratio = Fraction(q, p)
            if not es / 2 < ratio < width:
                continue

            if mode == STRICT:
                slack = width - ratio - 1
            else:
                slack = width - (1 + exact(eps_sharp)) * ratio

            if slack <= 0:
                continue

            eps0 = slack / 2
            c = _least_multiple(ea, ea + eps0 / 2, p)
            if c is None:
                continue

            return ConstructionParams(
                a=float(a),
                b=float(b),
                s=float(s),
                p=p,
                q=q,
                eps0=float(eps0),
                c=float(c),
                mode=mode,
                eps_sharp=eps_sharp,
            )

    raise Infeasible(
        f"no (p, q, eps0, c) with p, q <= {search_bound} for "
        f"a={a}, b={b}, s={s}, mode={mode!r}"
    )


def derive_real_params(
    c: float,
    t: float,
    mode: str = STRICT,
    search_bound: int = 64,
    eps_sharp: float | None = None,
) -> ConstructionParams:
    """parameters whose realified images lie in B([-c, c]) with target t

    Notes
    -----
    The complex construction runs on [eps0', c] with eps0' = (c - t/2)/2, so
    that t < 2(c - eps0').
    """
    if not 0 <= t < 2 * c:
        raise Infeasible(f"t={t} outside [0, 2c) = [0, {2 * c})")
    eps0 = float((exact(c) - exact(t) / 2) / 2)
    return derive_params(
        a=eps0,
        b=c,
        s=t,
        mode=mode,
        search_bound=search_bound,
        eps_sharp=eps_sharp,
    )


def derive_sampling_params(
    a_total: float,
    t: float,
    mode: str = RELAXED,
    search_bound: int = 64,
    eps_sharp: float | None = None,
) -> ConstructionParams:
    """parameters for a system embedded in [0,1]^Z by integer sampling

    Notes
    -----
    The real signals lie in B([-a_total/2, a_total/2]) and 2 (a_total/2) < 1,
    so their integer samples determine them.
    """
    if not 0 <= a_total < 1:
        raise Infeasible(f"integer sampling needs 0 <= a_total < 1, got {a_total}")
    if not 0 <= t < a_total:
        raise Infeasible(f"t={t} outside [0, a_total) = [0, {a_total})")
    return derive_real_params(
        c=a_total / 2,
        t=t,
        mode=mode,
        search_bound=search_bound,
        eps_sharp=eps_sharp,
    )
