"""Distribution estimates and the Gaussian / heavy-tail regime classifier."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateInputError, DomainError

APPROX_GAUSSIAN = "approx_gaussian"
HEAVY_TAILED = "heavy_tailed"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    n: int

    @property
    def widths(self):
        return np.diff(self.bin_edges)

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def total_mass(self) -> float:
        return float(np.sum(self.densities * self.widths))


@dataclass(frozen=True)
class RegimeThresholds:
    gaussian_max_abs_skew: float = 0.5
    gaussian_max_abs_kurtosis: float = 1.0
    heavy_min_skew: float = 2.0
    heavy_max_hill_index: float = 3.0


@dataclass(frozen=True)
class DistributionSummary:
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    jarque_bera: float
    hill_tail_index: float | None
    regime: str

    def to_dict(self) -> dict:
        return asdict(self)


def _as_sample(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError("samples contain non-finite values")
    return x


def freedman_diaconis_bins(x: np.ndarray) -> int:
    """Bin count from the Freedman-Diaconis width, or ceil(sqrt(n)) when IQR is 0."""
    n = x.size
    q75, q25 = np.percentile(x, [75, 25])
    iqr = q75 - q25
    if iqr <= 0:
        return max(1, math.ceil(math.sqrt(n)))
    width = 2.0 * iqr * n ** (-1.0 / 3.0)
    return max(1, math.ceil(np.ptp(x) / width))


def estimate_pdf(samples, bins: int | str = "fd") -> Histogram:
    """Density-normalized histogram.

    ``bins`` is a positive integer, ``"fd"`` (Freedman-Diaconis, falling back
    to sqrt(n) bins on zero IQR) or ``"sqrt"``.
    """
    x = _as_sample(samples)
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateInputError("need at least 2 samples with non-zero range")
    if bins == "fd":
        nbins = freedman_diaconis_bins(x)
    elif bins == "sqrt":
        nbins = max(1, math.ceil(math.sqrt(x.size)))
    elif isinstance(bins, (int, np.integer)) and bins > 0:
        nbins = int(bins)
    else:
        raise ValueError(f"bins must be a positive integer, 'fd' or 'sqrt', got {bins!r}")
    counts, edges = np.histogram(x, bins=nbins)
    densities = counts / (x.size * np.diff(edges))
    return Histogram(bin_edges=edges, densities=densities, n=int(x.size))


def ccdf(samples):
    """Empirical complementary CDF: distinct values and P(X >= value)."""
    x = np.sort(_as_sample(samples))
    if x.size == 0:
        raise DegenerateInputError("empty sample")
    values, first = np.unique(x, return_index=True)
    return values, 1.0 - first / x.size


def moments(samples):
    """Mean, variance, skewness and excess kurtosis, all with n in the denominator.

    Raises DegenerateInputError on an empty or zero-variance sample, since the
    standardized moments are undefined there.
    """
    x = _as_sample(samples)
    if x.size == 0:
        raise DegenerateInputError("empty sample")
    mean = float(np.mean(x))
    d = x - mean
    m2 = float(np.mean(d**2))
    if m2 == 0 or m2 <= (np.finfo(float).eps * max(abs(mean), 1.0)) ** 2:
        raise DegenerateInputError("zero variance: skewness/kurtosis undefined")
    m3 = float(np.mean(d**3))
    m4 = float(np.mean(d**4))
    return mean, m2, m3 / m2**1.5, m4 / m2**2 - 3.0


def jarque_bera_from_moments(n: int, skewness: float, excess_kurtosis: float) -> float:
    return n / 6.0 * (skewness**2 + excess_kurtosis**2 / 4.0)


def jarque_bera(samples) -> float:
    x = _as_sample(samples)
    if x.size < 8:
        raise DegenerateInputError("Jarque-Bera needs at least 8 samples")
    _, _, s, k = moments(x)
    return jarque_bera_from_moments(x.size, s, k)


def default_hill_k(n: int) -> int:
    return max(10, n // 100)


def hill_tail_index(samples, k: int) -> float:
    """Hill estimate of the Pareto tail exponent from the top ``k`` order statistics.

    H = mean(log(x_(i) / x_(k+1))), i = 1..k over descending order; returns 1/H.
    """
    x = _as_sample(samples)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if x.size < k + 1:
        raise DegenerateInputError(f"need at least k+1={k + 1} samples, got {x.size}")
    top = -np.sort(-x)[: k + 1]
    if top[-1] <= 0:
        raise DomainError("non-positive values among the top k+1 order statistics")
    h = float(np.mean(np.log(top[:k] / top[k])))
    if h <= 0:
        raise DomainError("Hill statistic is zero (flat upper tail): tail index is infinite")
    return 1.0 / h


def classify_regime(
    skewness: float,
    excess_kurtosis: float,
    hill_index: float | None = None,
    thresholds: RegimeThresholds = RegimeThresholds(),
) -> str:
    t = thresholds
    if abs(skewness) < t.gaussian_max_abs_skew and abs(excess_kurtosis) < t.gaussian_max_abs_kurtosis:
        return APPROX_GAUSSIAN
    if skewness > t.heavy_min_skew or (hill_index is not None and hill_index < t.heavy_max_hill_index):
        return HEAVY_TAILED
    return INDETERMINATE


def summarize_distribution(
    samples,
    hill_k: int | None = None,
    thresholds: RegimeThresholds = RegimeThresholds(),
) -> DistributionSummary:
    """Moments, Jarque-Bera, Hill index and regime label for one sample.

    The Hill index is left out (None) when it is not computable, e.g. too few
    positive values in the upper tail or a flat tail.
    """
    x = _as_sample(samples)
    mean, var, s, k = moments(x)
    jb = jarque_bera_from_moments(x.size, s, k)
    kk = default_hill_k(x.size) if hill_k is None else hill_k
    try:
        hill = hill_tail_index(x, kk)
    except (DegenerateInputError, DomainError):
        hill = None
    return DistributionSummary(
        n=int(x.size),
        mean=mean,
        variance=var,
        skewness=s,
        excess_kurtosis=k,
        jarque_bera=jb,
        hill_tail_index=hill,
        regime=classify_regime(s, k, hill, thresholds),
    )


def lifetime_distribution(events) -> np.ndarray:
    """Per (user, page) span between first and last like, sorted ascending.

    ``events`` yields objects with ``user_id``, ``page_id`` and ``timestamp``
    attributes, or ``(user_id, page_id, timestamp)`` tuples. Users with a
    single like on a page get lifetime 0.
    """
    first: dict = {}
    last: dict = {}
    for ev in events:
        if isinstance(ev, tuple):
            user, page, ts = ev
        else:
            user, page, ts = ev.user_id, ev.page_id, ev.timestamp
        key = (user, page)
        if key in first:
            if ts < first[key]:
                first[key] = ts
            if ts > last[key]:
                last[key] = ts
        else:
            first[key] = last[key] = ts
    spans = [last[key] - first[key] for key in first]
    return np.sort(np.asarray(spans, dtype=np.int64))
