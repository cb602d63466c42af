"""One-dimensional point sets, exponential level samples and discrepancies.

Four point generators are provided:

``sobol_plain``
    The one-dimensional Sobol sequence, i.e. the base-2 radical inverse of
    the Gray-code index (same generation order as ``scipy.stats.qmc.Sobol``).
``sobol_owen``
    The same sequence under a nested uniform (Owen) digit scramble.  Each
    digit flip is a hash of the seed, the digit position and the unscrambled
    digits above it, so the dyadic net property survives and distinct seeds
    give independent replicates.
``pseudo``
    Counter-based pseudo-random uniforms; point ``k`` depends only on
    ``(seed, k)``.
``grid``
    The midpoint grid ``(2k - 1) / (2M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from . import _streams
from .errors import InvalidArgument

SequenceKind = Literal["sobol_owen", "sobol_plain", "pseudo", "grid"]
KINDS: tuple[str, ...] = ("sobol_owen", "sobol_plain", "pseudo", "grid")

_DIGITS = 32  # scrambled digits that carry the index
_TAIL_DIGITS = 20  # random fill below the index digits, 52 in total
_ONE_MINUS = 1.0 - 2.0**-53


@dataclass(frozen=True)
class UnitSequence:
    points: np.ndarray
    kind: str
    seed: int
    count: int

    def __post_init__(self) -> None:
        if len(self.points) != self.count:
            raise InvalidArgument("length of points does not match count")
        if self.count and (self.points.min() < 0.0 or self.points.max() >= 1.0):
            raise InvalidArgument("points must lie in [0, 1)")


@dataclass(frozen=True)
class LevelSampleSet:
    levels: np.ndarray
    rate: float
    source: UnitSequence | None = None


@dataclass(frozen=True)
class DiscrepancyReport:
    value: float
    m: int
    kind: Literal["star", "f_exponential"]


def _reverse_bits32(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64) & np.uint64(0xFFFFFFFF)
    for shift, mask in (
        (1, 0x55555555),
        (2, 0x33333333),
        (4, 0x0F0F0F0F),
        (8, 0x00FF00FF),
    ):
        s, mk = np.uint64(shift), np.uint64(mask)
        x = ((x >> s) & mk) | ((x & mk) << s)
    return ((x >> np.uint64(16)) | (x << np.uint64(16))) & np.uint64(0xFFFFFFFF)


def _sobol_digits(m: int) -> np.ndarray:
    if m > 2**_DIGITS:
        raise InvalidArgument(f"at most 2**{_DIGITS} Sobol points are supported")
    k = np.arange(m, dtype=np.uint64)
    return _reverse_bits32(k ^ (k >> np.uint64(1)))


def _owen_scramble(digits: np.ndarray, seed: int) -> np.ndarray:
    flips = np.zeros_like(digits)
    for d in range(_DIGITS):
        # the d leading digits of each point, unscrambled
        prefix = digits >> np.uint64(_DIGITS - d)
        bit = _streams.hash_words(seed, _streams.TAG_OWEN, d, prefix) & np.uint64(1)
        flips |= bit << np.uint64(_DIGITS - 1 - d)
    return digits ^ flips


def generate_sequence(kind: SequenceKind, m: int, seed: int = 0) -> UnitSequence:
    """Generate ``m`` points of the requested kind.

    Parameters
    ----------
    kind
        One of ``sobol_owen``, ``sobol_plain``, ``pseudo``, ``grid``.
    m
        Number of points, at least one.
    seed
        64-bit seed; ignored by ``sobol_plain`` and ``grid``.
    """
    if m < 1:
        raise InvalidArgument("m must be positive")
    seed = int(seed) & ((1 << 64) - 1)
    if kind == "grid":
        k = np.arange(1, m + 1, dtype=np.float64)
        pts = (2.0 * k - 1.0) / (2.0 * m)
    elif kind == "sobol_plain":
        pts = _sobol_digits(m).astype(np.float64) * 2.0**-_DIGITS
    elif kind == "sobol_owen":
        scrambled = _owen_scramble(_sobol_digits(m), seed)
        idx = np.arange(m, dtype=np.uint64)
        tail = _streams.hash_words(seed, _streams.TAG_OWEN_TAIL, idx) >> np.uint64(
            64 - _TAIL_DIGITS
        )
        word = (scrambled << np.uint64(_TAIL_DIGITS)) | tail
        pts = word.astype(np.float64) * 2.0 ** -(_DIGITS + _TAIL_DIGITS)
    elif kind == "pseudo":
        idx = np.arange(m, dtype=np.uint64)
        h = _streams.hash_words(seed, _streams.TAG_PSEUDO, idx)
        pts = (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
    else:
        raise InvalidArgument(f"unknown sequence kind {kind!r}")
    return UnitSequence(points=pts, kind=kind, seed=seed, count=m)


def exp_inverse_transform(seq: UnitSequence, r: float) -> LevelSampleSet:
    """Map uniforms to Exp(r) levels via ``-ln(1 - x) / r``, keeping order."""
    if not r > 0:
        raise InvalidArgument("rate r must be positive")
    x = np.minimum(np.asarray(seq.points, dtype=np.float64), _ONE_MINUS)
    return LevelSampleSet(levels=-np.log1p(-x) / r, rate=float(r), source=seq)


def levels_from_points(points: Iterable[float], r: float) -> LevelSampleSet:
    pts = np.asarray(list(points), dtype=np.float64)
    seq = UnitSequence(points=pts, kind="explicit", seed=0, count=len(pts))
    return exp_inverse_transform(seq, r)


def star_discrepancy(seq: UnitSequence | np.ndarray) -> DiscrepancyReport:
    """Exact star discrepancy in one dimension, O(M log M).

    Uses ``D* = 1/(2M) + max_i |x_(i) - (2i - 1)/(2M)|`` on the sorted
    points, which equals ``max_i max(x_(i) - (i-1)/M, i/M - x_(i))``.
    """
    x = np.sort(np.asarray(getattr(seq, "points", seq), dtype=np.float64))
    m = len(x)
    if m == 0:
        raise InvalidArgument("empty point set")
    mid = (2.0 * np.arange(1, m + 1) - 1.0) / (2.0 * m)
    value = 1.0 / (2.0 * m) + float(np.max(np.abs(x - mid)))
    return DiscrepancyReport(value=min(value, 1.0), m=m, kind="star")


def f_discrepancy_exponential(levels: LevelSampleSet) -> DiscrepancyReport:
    """Sup-distance between the empirical tail of the levels and ``exp(-r y)``.

    The empirical tail ``T(y) = #{L_k >= y} / M`` is constant on each
    ``(L_(i-1), L_(i)]``; the target is monotone there, so the supremum over
    an interval is reached at one of its ends.
    """
    if not levels.rate > 0:
        raise InvalidArgument("rate must be positive")
    lv = np.sort(np.asarray(levels.levels, dtype=np.float64))
    m = len(lv)
    if m == 0:
        raise InvalidArgument("empty level set")
    tail = np.exp(-levels.rate * lv)
    prev = np.concatenate(([1.0], tail[:-1]))
    emp = (m - np.arange(m)) / m  # empirical tail on (L_(i-1), L_(i)]
    dev = np.maximum(np.abs(emp - tail), np.abs(emp - prev))
    value = max(float(dev.max()), float(tail[-1]))
    return DiscrepancyReport(value=min(value, 1.0), m=m, kind="f_exponential")


def max_level(levels: LevelSampleSet) -> float:
    lv = np.asarray(levels.levels)
    if lv.size == 0:
        raise InvalidArgument("empty level set")
    return float(lv.max())


@dataclass
class DiscrepancyStudy:
    """Per-run F-discrepancies and their per-M means."""

    kind: str
    r: float
    rows: list[tuple[int, int, float]] = field(default_factory=list)  # (M, run, value)

    def means(self) -> list[tuple[int, float]]:
        out: dict[int, list[float]] = {}
        for m, _, v in self.rows:
            out.setdefault(m, []).append(v)
        return [(m, float(np.mean(v))) for m, v in out.items()]

    def slope(self) -> float:
        ms, ds = zip(*self.means())
        return loglog_slope(ms, ds)


def discrepancy_convergence_study(
    kind: SequenceKind,
    m_list: Sequence[int],
    r: float,
    runs: int = 1,
    seed: int = 0,
) -> DiscrepancyStudy:
    """Average F-discrepancy over ``runs`` independently seeded sequences."""
    if not m_list:
        raise InvalidArgument("m_list must not be empty")
    if runs < 1:
        raise InvalidArgument("runs must be at least 1")
    study = DiscrepancyStudy(kind=kind, r=float(r))
    for run in range(runs):
        run_seed = _streams.derive_seed(seed, run)
        for m in m_list:
            lv = exp_inverse_transform(generate_sequence(kind, int(m), run_seed), r)
            study.rows.append((int(m), run, f_discrepancy_exponential(lv).value))
    return study


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    if len(lx) < 2:
        return math.nan
    return float(np.polyfit(lx, ly, 1)[0])
