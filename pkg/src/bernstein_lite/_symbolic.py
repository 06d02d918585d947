from __future__ import annotations

import dataclasses
import itertools
import math
import typing
from fractions import Fraction

import numpy

from bernstein_lite import _params as blt_params
from bernstein_lite import _util as blt_util

DEFAULT_CAP = 2_000_000
STAR = "*"


class SymbolicError(blt_util.BernsteinLiteError):
    module = "symbolic"


class SizeOverflow(SymbolicError):
    """a construction product exceeds the configured cap"""


class LengthMismatch(SymbolicError):
    """word length differs from the pattern length"""


class SegmentTooShort(SymbolicError):
    """segment cannot hold the blocks required"""


class CoverageError(SymbolicError):
    """segment does not cover the positions a metric needs"""


class WindowExhausted(SymbolicError):
    """a shifted segment no longer covers the required window"""


def symbol_distance(x: numpy.ndarray, y: numpy.ndarray) -> numpy.ndarray:
    """max norm over the 2q coordinates, broadcast over leading axes"""
    return numpy.abs(numpy.asarray(x) - numpy.asarray(y)).max(axis=(-2, -1))


@dataclasses.dataclass(slots=True, frozen=True)
class AlphabetSpec:
    """symbols are points of ([0,1]^2)^q, stored as (q, 2) arrays"""

    q: int

    @property
    def dim(self) -> int:
        return 2 * self.q

    def random(self, rng: numpy.random.Generator, size: int) -> numpy.ndarray:
        return rng.random((size, self.q, 2))


@dataclasses.dataclass(slots=True)
class DenseSet:
    """a 1/m dense product grid in the symbol space"""

    m: int
    axis: numpy.ndarray
    points: numpy.ndarray

    def __len__(self) -> int:
        return len(self.points)

    @property
    def covering_radius(self) -> float:
        return 1 / (2 * len(self.axis))

    def distance_to(self, symbols: numpy.ndarray) -> numpy.ndarray:
        """distance from each symbol to the nearest grid point"""
        symbols = numpy.asarray(symbols, dtype=float)
        per_coord = numpy.abs(symbols[..., None] - self.axis).min(axis=-1)
        return per_coord.max(axis=(-2, -1))

    def index_of(self, symbols: numpy.ndarray) -> numpy.ndarray:
        """lexicographic index of the grid point nearest each symbol"""
        symbols = numpy.asarray(symbols, dtype=float)
        lead = symbols.shape[:-2]
        flat = symbols.reshape(*lead, -1)
        digits = numpy.abs(flat[..., None] - self.axis).argmin(axis=-1)
        base = len(self.axis)
        weights = base ** numpy.arange(flat.shape[-1] - 1, -1, -1)
        return (digits * weights).sum(axis=-1)


def dense_set(m: int, alphabet: AlphabetSpec, cap: int = DEFAULT_CAP) -> DenseSet:
    """product grid with per-axis points (2i-1)/(2g), g = ceil(m/2)

    Raises
    ------
    SizeOverflow
        if g^(2q) exceeds cap
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, not {m}")

    g = math.ceil(m / 2)
    if alphabet.dim * math.log(g) > math.log(cap):
        raise SizeOverflow(f"dense set of {g}^{alphabet.dim} points exceeds cap {cap}")

    axis = (2 * numpy.arange(1, g + 1) - 1) / (2 * g)
    points = numpy.array(list(itertools.product(axis, repeat=alphabet.dim)))
    return DenseSet(m=m, axis=axis, points=points.reshape(-1, alphabet.q, 2))


@dataclasses.dataclass(slots=True)
class PatternWord:
    """the level-k word, star positions are free coordinates

    Notes
    -----
    skeleton holds the zero symbol at star positions. For k > 1 the word is
    n_k - M copies of the previous word followed by M tail blocks,
    tail_start is the index of the first tail block.
    """

    level: int
    skeleton: numpy.ndarray
    stars: numpy.ndarray
    multiplier: int
    block_len: int = 0
    tail_start: int = 0
    n_tail: int = 0
    trimmed: int = 0

    @property
    def length(self) -> int:
        return len(self.skeleton)

    @property
    def num_stars(self) -> int:
        return len(self.stars)

    @property
    def q(self) -> int:
        return self.skeleton.shape[1]

    @property
    def star_mask(self) -> numpy.ndarray:
        mask = numpy.zeros(self.length, dtype=bool)
        mask[self.stars] = True
        return mask

    @property
    def proportion(self) -> Fraction:
        return Fraction(self.num_stars, self.length)

    def tail_blocks(self) -> numpy.ndarray:
        """(M, N_{k-1}, q, 2) array of the tail blocks"""
        if not self.n_tail:
            return numpy.empty((0, self.block_len, self.q, 2))
        end = self.tail_start + self.n_tail * self.block_len
        tails = self.skeleton[self.tail_start : end]
        return tails.reshape(self.n_tail, self.block_len, self.q, 2)

    def fill(self, values: numpy.ndarray) -> numpy.ndarray:
        """the word with star positions set to values"""
        word = self.skeleton.copy()
        word[self.stars] = values
        return word

    def to_dict(self) -> dict:
        mask = self.star_mask
        entries = [
            STAR if mask[n] else self.skeleton[n].ravel().tolist()
            for n in range(self.length)
        ]
        return {
            "level": self.level,
            "N": self.length,
            "n": self.multiplier,
            "star_positions": self.stars.tolist(),
            "num_stars": self.num_stars,
            "trimmed": self.trimmed,
            "entries": entries,
        }


def proportion_holds(word: PatternWord, r: Fraction) -> bool:
    """r < stars/N <= r + 1/N, exactly"""
    n = word.length
    return r < word.proportion <= r + Fraction(1, n)


def initial_word(
    params: blt_params.ConstructionParams,
    n1_hint: int | None = None,
) -> PatternWord:
    """the level-1 word

    Notes
    -----
    Any N admits floor(rN)+1 stars since r < 1, so N1 is the hint (or 1).
    Stars occupy the leading indices, the rest hold the m=1 dense-set centre.
    """
    n1 = max(n1_hint or 1, 1)
    r = params.r
    num_stars = math.floor(r * n1) + 1
    skeleton = numpy.full((n1, params.q, 2), 0.5)
    stars = numpy.arange(num_stars)
    skeleton[stars] = 0.0
    return PatternWord(level=1, skeleton=skeleton, stars=stars, multiplier=n1)


def next_level(
    prev: PatternWord,
    fill: DenseSet,
    params: blt_params.ConstructionParams,
    cap: int = DEFAULT_CAP,
) -> PatternWord:
    """builds the level k+1 word from the level k word

    Parameters
    ----------
    prev
        the level k word
    fill
        the dense set whose points fill the tail blocks, fill.m == prev.level
    params
        construction parameters
    cap
        largest word length (and tail count times block length) allowed

    Raises
    ------
    SizeOverflow
    """
    if fill.m != prev.level:
        raise ValueError(f"level {prev.level} word needs P_{prev.level}, not P_{fill.m}")

    r = params.r
    prev_len = prev.length
    prev_stars = prev.num_stars
    base = len(fill)
    if base > 1 and prev_stars * math.log(base) > math.log(cap):
        raise SizeOverflow(
            f"{base}^{prev_stars} tail blocks at level {prev.level + 1} exceed cap {cap}"
        )

    num_tail = base**prev_stars
    if num_tail * prev_len > cap:
        raise SizeOverflow(f"tail region {num_tail * prev_len} exceeds cap {cap}")

    # least n with (n S - M N) / (n N) > r
    n = math.floor(Fraction(num_tail * prev_len) / (prev_stars - r * prev_len)) + 1
    length = n * prev_len
    if length > cap:
        raise SizeOverflow(f"N_{prev.level + 1} = {length} exceeds cap {cap}")

    skeleton = numpy.tile(prev.skeleton, (n, 1, 1))
    mask = numpy.tile(prev.star_mask, n)
    tail_start = (n - num_tail) * prev_len
    # lexicographic digits of each tail index, most significant first
    powers = base ** numpy.arange(prev_stars - 1, -1, -1, dtype=numpy.int64)
    digits = (numpy.arange(num_tail)[:, None] // powers) % base
    for t, idx in enumerate(digits):
        positions = tail_start + t * prev_len + prev.stars
        skeleton[positions] = fill.points[idx]
        mask[positions] = False

    stars = numpy.flatnonzero(mask)
    target = math.floor(r * length) + 1
    trimmed = max(len(stars) - target, 0)
    if trimmed:
        # trailing stars become the zero symbol
        skeleton[stars[-trimmed:]] = 0.0
        stars = stars[:-trimmed]

    word = PatternWord(
        level=prev.level + 1,
        skeleton=skeleton,
        stars=stars,
        multiplier=n,
        block_len=prev_len,
        tail_start=tail_start,
        n_tail=num_tail,
        trimmed=trimmed,
    )
    if not proportion_holds(word, r):
        raise RuntimeError(f"proportion fails at level {word.level}")
    return word


@dataclasses.dataclass(slots=True)
class PatternTower:
    """the words x^(1), ..., x^(depth) and the dense sets that filled them"""

    params: blt_params.ConstructionParams
    words: list[PatternWord]
    fills: list[DenseSet]

    @property
    def depth(self) -> int:
        return len(self.words)

    @property
    def alphabet(self) -> AlphabetSpec:
        return AlphabetSpec(self.params.q)

    def level(self, k: int) -> PatternWord:
        if not 1 <= k <= self.depth:
            raise ValueError(f"level {k} not in [1, {self.depth}]")
        return self.words[k - 1]

    def proportion_table(self):
        from cogent3 import make_table

        r = self.params.r
        data = {
            "k": [w.level for w in self.words],
            "N_k": [w.length for w in self.words],
            "n_k": [w.multiplier for w in self.words],
            "stars": [w.num_stars for w in self.words],
            "proportion": [str(w.proportion) for w in self.words],
            "r": [str(r)] * self.depth,
            "holds": [proportion_holds(w, r) for w in self.words],
        }
        return make_table(data=data, title="Star proportions")


def build_tower(
    params: blt_params.ConstructionParams,
    depth: int,
    n1_hint: int | None = None,
    cap: int = DEFAULT_CAP,
) -> PatternTower:
    """constructs levels 1..depth, level k is filled from P_{k-1}"""
    alphabet = AlphabetSpec(params.q)
    words = [initial_word(params, n1_hint=n1_hint)]
    fills = []
    for k in range(2, depth + 1):
        fill = dense_set(k - 1, alphabet, cap=cap)
        words.append(next_level(words[-1], fill, params, cap=cap))
        fills.append(fill)
    return PatternTower(params=params, words=words, fills=fills)


def membership(word: numpy.ndarray, pattern: PatternWord, tol: float) -> bool:
    """whether word belongs to B_k, i.e. matches pattern off the stars

    Raises
    ------
    LengthMismatch
    """
    word = numpy.asarray(word, dtype=float)
    if len(word) != pattern.length:
        raise LengthMismatch(f"word length {len(word)} != N_k {pattern.length}")
    keep = ~pattern.star_mask
    return bool((symbol_distance(word[keep], pattern.skeleton[keep]) <= tol).all())


def random_block(
    tower: PatternTower,
    k: int,
    rng: numpy.random.Generator,
) -> numpy.ndarray:
    """a member of B_k with uniform fills at the star positions"""
    pattern = tower.level(k)
    return pattern.fill(tower.alphabet.random(rng, pattern.num_stars))


@dataclasses.dataclass(slots=True)
class SubshiftSegment:
    """a finite window of a point of Y

    Notes
    -----
    entries[0] sits at absolute position offset.
    """

    entries: numpy.ndarray
    offset: int = 0
    depth: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def start(self) -> int:
        return self.offset

    @property
    def stop(self) -> int:
        """one past the last absolute position"""
        return self.offset + len(self.entries)

    def covers(self, lo: int, hi: int) -> bool:
        """whether absolute positions lo..hi (inclusive) are present"""
        return self.start <= lo and hi < self.stop

    def at(self, lo: int, hi: int) -> numpy.ndarray:
        """entries at absolute positions lo..hi inclusive"""
        if not self.covers(lo, hi):
            raise CoverageError(
                f"segment [{self.start}, {self.stop}) does not cover [{lo}, {hi}]"
            )
        return self.entries[lo - self.offset : hi - self.offset + 1]

    def shifted(self, by: int = 1) -> SubshiftSegment:
        """sigma^by, x_n becomes position n - by"""
        return SubshiftSegment(
            entries=self.entries,
            offset=self.offset - by,
            depth=self.depth,
        )

    def with_entries(self, lo: int, values: numpy.ndarray) -> SubshiftSegment:
        """a copy with values written from absolute position lo"""
        entries = self.entries.copy()
        start = lo - self.offset
        entries[start : start + len(values)] = values
        return SubshiftSegment(entries=entries, offset=self.offset, depth=self.depth)

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "depth": self.depth,
            "entries": self.entries.reshape(len(self), -1).tolist(),
        }


def window_admissible(
    segment: SubshiftSegment,
    pattern: PatternWord,
    tol: float,
) -> int | None:
    """least alignment m such that every full block starting at an absolute
    position congruent to m mod N_k is in B_k

    Raises
    ------
    SegmentTooShort
    """
    n = pattern.length
    if len(segment) < 2 * n:
        raise SegmentTooShort(f"segment length {len(segment)} < 2 N_k = {2 * n}")

    keep = ~pattern.star_mask
    reference = pattern.skeleton[keep]
    for m in range(n):
        first = segment.start + (m - segment.start) % n
        count = (segment.stop - first) // n
        begin = first - segment.offset
        blocks = segment.entries[begin : begin + count * n]
        blocks = blocks.reshape(count, n, *segment.entries.shape[1:])
        if (symbol_distance(blocks[:, keep], reference) <= tol).all():
            return m
    return None


def generate_segment(
    tower: PatternTower,
    depth: int,
    length: int,
    seed: int | numpy.random.Generator = 0,
    fill_mode: typing.Literal["random", "zero"] = "random",
    start: int = 0,
    cap: int = DEFAULT_CAP,
) -> SubshiftSegment:
    """periodic concatenation of level-depth blocks aligned at 0

    Parameters
    ----------
    tower
        the constructed words
    depth
        level of the repeated block
    length
        number of symbols
    seed
        seed or generator for the star fills
    fill_mode
        'random' draws each period's star values uniformly, 'zero' gives the
        reference point z
    start
        absolute position of the first symbol

    Raises
    ------
    SegmentTooShort, SizeOverflow
    """
    if fill_mode not in ("random", "zero"):
        raise ValueError(f"unknown fill_mode {fill_mode!r}")

    pattern = tower.level(depth)
    n = pattern.length
    if length < n:
        raise SegmentTooShort(f"length {length} < N_{depth} = {n}")
    if length > cap:
        raise SizeOverflow(f"segment length {length} exceeds cap")

    positions = numpy.arange(start, start + length)
    within = positions % n
    entries = pattern.skeleton[within].copy()
    if fill_mode == "random" and pattern.num_stars:
        rng = numpy.random.default_rng(seed)
        periods = positions // n
        first = periods[0]
        num_periods = periods[-1] - first + 1
        values = tower.alphabet.random(rng, num_periods * pattern.num_stars)
        values = values.reshape(num_periods, pattern.num_stars, pattern.q, 2)
        rank = numpy.full(n, -1)
        rank[pattern.stars] = numpy.arange(pattern.num_stars)
        free = rank[within] >= 0
        entries[free] = values[periods[free] - first, rank[within][free]]

    return SubshiftSegment(entries=entries, offset=start, depth=depth)


@dataclasses.dataclass(slots=True)
class MinimalityReport:
    k: int
    bound: int
    max_gap: int
    occurrences: int
    census: dict
    violations: list[str]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "gap_bound": self.bound,
            "max_gap": self.max_gap,
            "occurrences": self.occurrences,
            "census": self.census,
            "violations": self.violations,
            "passed": self.passed,
        }


def _match_order(word: numpy.ndarray, keep: numpy.ndarray) -> numpy.ndarray:
    """kept positions of word, rarest symbol first"""
    positions = numpy.flatnonzero(keep)
    if not len(positions):
        return positions
    flat = word[positions].reshape(len(positions), -1)
    _, inverse, counts = numpy.unique(
        flat,
        axis=0,
        return_inverse=True,
        return_counts=True,
    )
    rarity = counts[inverse.ravel()]
    return positions[numpy.argsort(rarity, kind="stable")]


def _occurrences(
    segment: SubshiftSegment,
    word: numpy.ndarray,
    keep: numpy.ndarray,
    tol: float,
) -> numpy.ndarray:
    """absolute start positions where word matches the segment at keep

    Notes
    -----
    Candidate starts are filtered one word position at a time, so memory
    stays linear in the segment length.
    """
    width = len(word)
    if len(segment) < width:
        return numpy.empty(0, dtype=int)
    entries = segment.entries
    candidates = numpy.arange(len(segment) - width + 1)
    for j in _match_order(word, keep):
        if not len(candidates):
            break
        close = symbol_distance(entries[candidates + j], word[j]) <= tol
        candidates = candidates[close]
    return candidates + segment.offset


def _gaps(segment: SubshiftSegment, starts: numpy.ndarray) -> numpy.ndarray:
    edges = numpy.concatenate(([segment.start], starts, [segment.stop]))
    return numpy.diff(edges)


def _census(tower: PatternTower, k: int) -> dict:
    if k == 1:
        return {"expected": 0, "seen": 0, "distinct": 0, "bijective": True}

    pattern = tower.level(k)
    prev = tower.level(k - 1)
    fill = tower.fills[k - 2]
    tails = pattern.tail_blocks()
    expected = len(fill) ** prev.num_stars
    values = tails[:, prev.stars]
    digits = fill.index_of(values)
    weights = len(fill) ** numpy.arange(prev.num_stars - 1, -1, -1)
    indices = (digits * weights).sum(axis=-1) if len(digits) else digits
    exact_fit = (
        bool((fill.distance_to(values) <= 1e-12).all()) if len(values) else True
    )
    distinct = len(set(indices.tolist()))
    return {
        "expected": expected,
        "seen": len(tails),
        "distinct": distinct,
        "bijective": exact_fit
        and len(tails) == expected
        and distinct == expected
        and sorted(indices.tolist()) == list(range(expected)),
    }


def minimality_evidence(
    tower: PatternTower,
    k: int,
    segment: SubshiftSegment,
    tol: float = 1e-12,
) -> MinimalityReport:
    """finite-scale syndeticity of a level-k segment

    Notes
    -----
    For k > 1 each tail block of x^(k) must recur in the segment with gaps,
    including the leading and trailing gaps, no larger than 2 N_k. The tail
    blocks must enumerate every filling of the level k-1 stars once. At
    k = 1 the occurrences are those of any B_1 member.
    """
    pattern = tower.level(k)
    bound = 2 * pattern.length
    violations = []
    max_gap = 0
    total = 0
    if k == 1:
        targets = [pattern.skeleton]
        keep = ~pattern.star_mask
    else:
        targets = list(pattern.tail_blocks())
        keep = numpy.ones(pattern.block_len, dtype=bool)

    for index, word in enumerate(targets):
        starts = _occurrences(segment, word, keep, tol)
        total += len(starts)
        if not len(starts):
            violations.append(f"tail block {index} never occurs")
            max_gap = max(max_gap, len(segment))
            continue
        gaps = _gaps(segment, starts)
        max_gap = max(max_gap, int(gaps.max()))
        if (gaps > bound).any():
            worst = int(gaps.max())
            violations.append(f"tail block {index} gap {worst} > {bound}")

    census = _census(tower, k)
    if not census["bijective"]:
        violations.append(f"tail census not a bijection: {census}")

    return MinimalityReport(
        k=k,
        bound=bound,
        max_gap=max_gap,
        occurrences=total,
        census=census,
        violations=violations,
    )


def _weights(trunc: int) -> numpy.ndarray:
    return 2.0 ** -numpy.abs(numpy.arange(-trunc, trunc + 1))


def distance_profile(
    x: SubshiftSegment,
    y: SubshiftSegment,
    lo: int,
    hi: int,
) -> numpy.ndarray:
    """symbol distances at absolute positions lo..hi"""
    return symbol_distance(x.at(lo, hi), y.at(lo, hi))


def metric_D1(
    x: SubshiftSegment,
    y: SubshiftSegment,
    trunc: int,
) -> tuple[float, float]:
    """the truncated sum of d(x_n, y_n) / 2^|n| over |n| <= trunc

    Returns
    -------
    value and the bound 2^(-trunc+1) on the omitted terms

    Raises
    ------
    CoverageError
    """
    diffs = distance_profile(x, y, -trunc, trunc)
    return float(diffs @ _weights(trunc)), 2.0 ** (-trunc + 1)


@dataclasses.dataclass(slots=True, frozen=True)
class SkewPoint:
    """a point (y, i) of Y x Z_p"""

    segment: SubshiftSegment
    i: int
    p: int

    def __post_init__(self):
        if not 0 <= self.i < self.p:
            raise ValueError(f"i={self.i} not in [0, {self.p})")


def skew_S(
    point: SkewPoint,
    require: tuple[int, int] | None = None,
) -> SkewPoint:
    """(y, i) -> (y, i+1), and (y, p-1) -> (sigma y, 0)

    Raises
    ------
    WindowExhausted
        if require = (lo, hi) is no longer covered after the shift
    """
    if point.i + 1 < point.p:
        result = SkewPoint(segment=point.segment, i=point.i + 1, p=point.p)
    else:
        result = SkewPoint(segment=point.segment.shifted(1), i=0, p=point.p)

    if require is not None and not result.segment.covers(*require):
        raise WindowExhausted(
            f"shifted segment [{result.segment.start}, {result.segment.stop}) "
            f"does not cover {require}"
        )
    return result


def skew_S_inverse(point: SkewPoint) -> SkewPoint:
    if point.i > 0:
        return SkewPoint(segment=point.segment, i=point.i - 1, p=point.p)
    return SkewPoint(segment=point.segment.shifted(-1), i=point.p - 1, p=point.p)


def align_phase(point: SkewPoint, target_i: int) -> tuple[int, SkewPoint]:
    """applies S until the cyclic coordinate equals target_i"""
    steps = (target_i - point.i) % point.p
    result = point
    for _ in range(steps):
        result = skew_S(result)
    return steps, result


def metric_rho(x: SkewPoint, y: SkewPoint, trunc: int) -> float:
    """D1 when the cyclic coordinates agree, otherwise 2"""
    if x.i != y.i:
        return 2.0
    value, _ = metric_D1(x.segment, y.segment, trunc)
    return value


def metric_rho_n(x: SkewPoint, y: SkewPoint, n: int, trunc: int) -> float:
    """max over 0 <= t < n of rho(S^t x, S^t y)

    Notes
    -----
    S^t (y, i) is (sigma^l y, (i+t) mod p) with l = floor((i+t)/p), so only
    the shifts 0..floor((i+n-1)/p) are evaluated.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, not {n}")
    if x.i != y.i:
        return 2.0

    last = (x.i + n - 1) // x.p
    diffs = distance_profile(x.segment, y.segment, -trunc, last + trunc)
    values = numpy.correlate(diffs, _weights(trunc), mode="valid")
    return float(values.max())
