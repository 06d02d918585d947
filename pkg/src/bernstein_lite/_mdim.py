from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

import numpy

from bernstein_lite import _params as blt_params
from bernstein_lite import _symbolic as blt_symbolic
from bernstein_lite import _util as blt_util

FLOAT_SLACK = 1e-12
EXTRA_TRUNC = 30


def level_bounds(tower: blt_symbolic.PatternTower, k: int) -> tuple[Fraction, Fraction]:
    """exact (lower_k, upper_k)

    Notes
    -----
    The free coordinates of B_k form a cube of dimension 2q |stars_k|, whose
    Widim is its dimension. Dividing by N_k p gives lower_k, the counting
    bound on the epsilon-embedding gives upper_k = (2q/p)(r + 1/N_k).
    """
    params = tower.params
    word = tower.level(k)
    lower = Fraction(2 * params.q * word.num_stars, word.length * params.p)
    upper = Fraction(2 * params.q, params.p) * (params.r + Fraction(1, word.length))
    return lower, upper


def embed_block(
    tower: blt_symbolic.PatternTower,
    k: int,
    block: numpy.ndarray,
) -> blt_symbolic.SkewPoint:
    """F_k(a): the reference point z with a written over [0, N_k - 1], i = 0"""
    n = tower.level(k).length
    z = blt_symbolic.generate_segment(tower, k, 3 * n, fill_mode="zero", start=-n)
    return blt_symbolic.SkewPoint(segment=z.with_entries(0, block), i=0, p=tower.params.p)


def distance_increasing_pair(
    tower: blt_symbolic.PatternTower,
    k: int,
    a: numpy.ndarray,
    b: numpy.ndarray,
) -> tuple[float, float]:
    """(||a - b||, rho_{N_k p}(F_k(a), F_k(b)))

    Notes
    -----
    F_k(a) and F_k(b) agree off [0, N_k - 1], so truncating D1 at N_k drops
    nothing and the right side is exact.
    """
    n = tower.level(k).length
    lhs = float(blt_symbolic.symbol_distance(a, b).max())
    rhs = blt_symbolic.metric_rho_n(
        embed_block(tower, k, a),
        embed_block(tower, k, b),
        n * tower.params.p,
        trunc=n,
    )
    return lhs, rhs


@dataclasses.dataclass(slots=True)
class LowerEvidence:
    k: int
    trials: int
    violations: int
    min_slack: float
    lower_k: Fraction
    cube_dim: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "trials": self.trials,
            "violations": self.violations,
            "min_slack": self.min_slack,
            "lower_k": str(self.lower_k),
            "cube_dim": self.cube_dim,
            "passed": self.passed,
        }


def lower_certificate(
    tower: blt_symbolic.PatternTower,
    k: int,
    trials: int,
    seed: int,
) -> LowerEvidence:
    """samples pairs a, b in B_k and checks ||a - b|| <= rho_{N_k p}(F_k(a), F_k(b))"""
    rng = blt_util.stage_rng(seed, f"lower-k{k}")
    word = tower.level(k)
    violations = 0
    min_slack = math.inf
    for _ in range(trials):
        a = blt_symbolic.random_block(tower, k, rng)
        b = blt_symbolic.random_block(tower, k, rng)
        lhs, rhs = distance_increasing_pair(tower, k, a, b)
        slack = rhs - lhs
        min_slack = min(min_slack, slack)
        if slack < -FLOAT_SLACK:
            violations += 1

    lower, _ = level_bounds(tower, k)
    return LowerEvidence(
        k=k,
        trials=trials,
        violations=violations,
        min_slack=float(min_slack) if trials else 0.0,
        lower_k=lower,
        cube_dim=2 * tower.params.q * word.num_stars,
    )


def window_half_length(epsilon: float) -> int:
    """L with 2^(1-L) <= epsilon / 2, agreement on [-L, L] forces D1 < epsilon"""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, not {epsilon}")
    return math.ceil(math.log2(2 / epsilon)) + 1


def upper_bound_value(
    tower: blt_symbolic.PatternTower,
    k: int,
    m: int,
    L: int,
) -> Fraction:
    """(ceil((2L+m+2)/N_k) + 1) 2 N_k q (r + 1/N_k) / (m p)"""
    params = tower.params
    n = tower.level(k).length
    blocks = math.ceil(Fraction(2 * L + m + 2, n)) + 1
    dims = blocks * 2 * n * params.q * (params.r + Fraction(1, n))
    return dims / (m * params.p)


@dataclasses.dataclass(slots=True)
class UpperEvidence:
    k: int
    m: int
    epsilon: float
    L: int
    trials: int
    violations: int
    max_rho: float
    bound: Fraction
    limit: Fraction

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "epsilon": self.epsilon,
            "L": self.L,
            "trials": self.trials,
            "violations": self.violations,
            "max_rho": self.max_rho,
            "bound": str(self.bound),
            "bound_value": float(self.bound),
            "limit": str(self.limit),
            "passed": self.passed,
        }


def upper_certificate(
    tower: blt_symbolic.PatternTower,
    k: int,
    m: int,
    epsilon: float,
    trials: int = 1000,
    seed: int = 0,
) -> UpperEvidence:
    """checks that agreement on [-L, L+m+1] with equal i gives rho_{mp} < epsilon

    Notes
    -----
    Pairs are level-k segments differing only at star positions outside the
    agreement window. The measured rho includes the truncation tail.
    """
    rng = blt_util.stage_rng(seed, f"upper-k{k}-m{m}-eps{epsilon}")
    params = tower.params
    L = window_half_length(epsilon)
    trunc = L + EXTRA_TRUNC
    length = m + 2 * trunc + 1
    tail = 2.0 ** (-trunc + 1)
    violations = 0
    max_rho = 0.0
    for _ in range(trials):
        x = blt_symbolic.generate_segment(tower, k, length, seed=rng, start=-trunc)
        y = blt_symbolic.generate_segment(tower, k, length, seed=rng, start=-trunc)
        y = y.with_entries(-L, x.at(-L, L + m + 1))
        i = int(rng.integers(params.p))
        rho = blt_symbolic.metric_rho_n(
            blt_symbolic.SkewPoint(x, i, params.p),
            blt_symbolic.SkewPoint(y, i, params.p),
            m * params.p,
            trunc=trunc,
        )
        measured = rho + tail
        max_rho = max(max_rho, measured)
        if measured >= epsilon:
            violations += 1

    _, limit = level_bounds(tower, k)
    return UpperEvidence(
        k=k,
        m=m,
        epsilon=epsilon,
        L=L,
        trials=trials,
        violations=violations,
        max_rho=max_rho,
        bound=upper_bound_value(tower, k, m, L),
        limit=limit,
    )


@dataclasses.dataclass(slots=True)
class CertificateReport:
    """finite-level bounds on the mean dimension, with sampled evidence"""

    k: int
    N_k: int
    stars: int
    lower_k: Fraction
    upper_k: Fraction
    target_s: Fraction
    gap: Fraction
    widim_epsilon: float
    L: int
    violations: list[str]
    evidence: dict = dataclasses.field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "N_k": self.N_k,
            "stars": self.stars,
            "lower_k": str(self.lower_k),
            "upper_k": str(self.upper_k),
            "lower_value": float(self.lower_k),
            "upper_value": float(self.upper_k),
            "target_s": str(self.target_s),
            "gap": str(self.gap),
            "widim_epsilon": self.widim_epsilon,
            "L": self.L,
            "violations": self.violations,
            "evidence": self.evidence,
            "passed": self.passed,
        }


def mdim_report(
    tower: blt_symbolic.PatternTower,
    k: int,
    lower: LowerEvidence | None = None,
    uppers: list[UpperEvidence] | None = None,
    minimality: blt_symbolic.MinimalityReport | None = None,
) -> CertificateReport:
    """assembles the level-k bounds and checks the exact identities"""
    params = tower.params
    word = tower.level(k)
    lower_k, upper_k = level_bounds(tower, k)
    s = blt_params.exact(params.s)
    envelope = Fraction(2 * params.q, params.p * word.length)
    violations = []
    if not s < lower_k <= upper_k:
        violations.append(f"sandwich s < lower <= upper fails: {s}, {lower_k}, {upper_k}")
    if upper_k != s + envelope:
        violations.append(f"upper_k {upper_k} != s + 2q/(p N_k) = {s + envelope}")

    evidence = {}
    if lower is not None:
        evidence["lower"] = lower.to_dict()
        if not lower.passed:
            violations.append(f"{lower.violations} distance-increasing violations")
    uppers = uppers or []
    if uppers:
        evidence["upper"] = [u.to_dict() for u in uppers]
        for u in uppers:
            if not u.passed:
                violations.append(
                    f"{u.violations} epsilon-embedding violations at m={u.m}, "
                    f"epsilon={u.epsilon}"
                )
    if minimality is not None:
        evidence["minimality"] = minimality.to_dict()
        violations.extend(minimality.violations)

    epsilon = min((u.epsilon for u in uppers), default=math.nan)
    return CertificateReport(
        k=k,
        N_k=word.length,
        stars=word.num_stars,
        lower_k=lower_k,
        upper_k=upper_k,
        target_s=s,
        gap=upper_k - lower_k,
        widim_epsilon=epsilon,
        L=window_half_length(epsilon) if uppers else 0,
        violations=violations,
        evidence=evidence,
    )


def gap_trend(reports: list[CertificateReport], params) -> list[str]:
    """gaps must not grow with k, the envelope 2q/(p N_k) must shrink"""
    violations = []
    ordered = sorted(reports, key=lambda r: r.k)
    for prev, curr in zip(ordered, ordered[1:]):
        if curr.gap > prev.gap:
            violations.append(f"gap grows from level {prev.k} to {curr.k}")
        prev_env = Fraction(2 * params.q, params.p * prev.N_k)
        curr_env = Fraction(2 * params.q, params.p * curr.N_k)
        if not curr_env < prev_env:
            violations.append(f"envelope does not shrink at level {curr.k}")
    return violations


def certificate_table(reports: list[CertificateReport], title: str = "Certificates"):
    from cogent3 import make_table

    ordered = sorted(reports, key=lambda r: r.k)
    data = {
        "k": [r.k for r in ordered],
        "N_k": [r.N_k for r in ordered],
        "stars": [r.stars for r in ordered],
        "lower": [str(r.lower_k) for r in ordered],
        "upper": [str(r.upper_k) for r in ordered],
        "gap": [str(r.gap) for r in ordered],
        "passed": [r.passed for r in ordered],
    }
    return make_table(data=data, title=title)
