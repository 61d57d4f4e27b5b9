"""Hypothesis-testing suite: moments, normality, t tests, Mann-Whitney U,
Pearson correlation, and element-wise difference distributions.

All p-values come from the in-package special functions; no external
statistics library is involved.  Conventions follow the classical
definitions: central moments divide by the sample size M, while the t
statistics use the M-1 sample standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .samples import SampleSet
from .special import chi2_cdf, normal_cdf, t_cdf

DEFAULT_ZETA = 0.05
ALTERNATIVES = ("two_sided", "less", "greater")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    alternative: str
    zeta: float = DEFAULT_ZETA
    dof: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value outside [0, 1]: {self.p_value!r}")

    @property
    def reject(self) -> bool:
        return self.p_value <= self.zeta

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alternative": self.alternative,
            "dof": self.dof,
            "zeta": self.zeta,
            "reject": self.reject,
        }


def _as_array(sample, min_size: int = 1, name: str = "sample") -> np.ndarray:
    values = sample.values if isinstance(sample, SampleSet) else np.asarray(sample, dtype=float)
    if values.size < min_size:
        raise ValueError(f"{name} needs at least {min_size} values, got {values.size}")
    if not np.isfinite(values).all():
        raise ValueError(f"{name} contains non-finite values")
    return values


def central_moment(sample, order: int) -> float:
    """i-th central moment with divisor M (population normalization)."""
    x = _as_array(sample)
    return float(np.mean((x - x.mean()) ** order))


def skewness(sample) -> float:
    x = _as_array(sample, min_size=2)
    m2 = central_moment(x, 2)
    if m2 == 0.0:
        raise ValueError("skewness undefined for a degenerate (zero-variance) sample")
    return central_moment(x, 3) / m2**1.5


def kurtosis(sample) -> float:
    """Plain kurtosis m4 / m2^2 (3 for a normal distribution, not 0)."""
    x = _as_array(sample, min_size=2)
    m2 = central_moment(x, 2)
    if m2 == 0.0:
        raise ValueError("kurtosis undefined for a degenerate (zero-variance) sample")
    return central_moment(x, 4) / m2**2


def _skewness_transform(g1: float, n: int) -> float:
    """Normalizing transform of sample skewness (D'Agostino)."""
    var_g1 = 6.0 * (n - 2.0) / ((n + 1.0) * (n + 3.0))
    excess_kurt_g1 = (
        36.0 * (n - 7.0) * (n * n + 2.0 * n - 5.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0))
    )
    w_squared = math.sqrt(2.0 * excess_kurt_g1 + 4.0) - 1.0
    delta = 1.0 / math.sqrt(0.5 * math.log(w_squared))
    arg = g1 * math.sqrt((w_squared - 1.0) / (2.0 * var_g1))
    return delta * math.asinh(arg)


def _kurtosis_transform(g2_excess: float, n: int) -> float:
    """Normalizing transform of sample excess kurtosis (Anscombe-Glynn)."""
    mean_g2 = -6.0 / (n + 1.0)
    var_g2 = (
        24.0 * n * (n - 2.0) * (n - 3.0)
        / ((n + 1.0) ** 2 * (n + 3.0) * (n + 5.0))
    )
    skew_g2 = (
        6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * math.sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)))
    )
    a = 6.0 + 8.0 / skew_g2 * (2.0 / skew_g2 + math.sqrt(1.0 + 4.0 / skew_g2**2))
    x = (g2_excess - mean_g2) / math.sqrt(var_g2)
    denom = 1.0 + x * math.sqrt(2.0 / (a - 4.0))
    ratio = (1.0 - 2.0 / a) / denom
    root = math.copysign(abs(ratio) ** (1.0 / 3.0), ratio)
    return math.sqrt(4.5 * a) * (1.0 - 2.0 / (9.0 * a) - root)


def dagostino_k2(sample, zeta: float = DEFAULT_ZETA) -> TestResult:
    """Omnibus normality test: k^2 = Z1(g1)^2 + Z2(g2)^2 ~ chi^2(2) under H0.

    Needs at least 20 observations; the normalizing transforms are unstable
    below that.
    """
    x = _as_array(sample, min_size=20, name="normality-test sample")
    n = x.size
    z1 = _skewness_transform(skewness(x), n)
    z2 = _kurtosis_transform(kurtosis(x) - 3.0, n)
    k2 = z1 * z1 + z2 * z2
    p = 1.0 - chi2_cdf(k2, 2.0)
    return TestResult(statistic=k2, p_value=min(max(p, 0.0), 1.0),
                      alternative="two_sided", zeta=zeta, dof=2.0)


def _t_pvalue(t: float, dof: float, alternative: str) -> float:
    if alternative == "two_sided":
        return 2.0 * (1.0 - t_cdf(abs(t), dof))
    if alternative == "less":
        return t_cdf(t, dof)
    if alternative == "greater":
        return 1.0 - t_cdf(t, dof)
    raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")


def t_test_one_sample(sample, mu0: float, alternative: str = "two_sided",
                      zeta: float = DEFAULT_ZETA) -> TestResult:
    """One-sample Student t test of the sample mean against mu0."""
    x = _as_array(sample, min_size=2)
    n = x.size
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        raise ValueError("one-sample t test undefined for zero sample variance")
    t = (float(x.mean()) - mu0) * math.sqrt(n) / sd
    dof = float(n - 1)
    return TestResult(statistic=t, p_value=min(_t_pvalue(t, dof, alternative), 1.0),
                      alternative=alternative, zeta=zeta, dof=dof)


def welch_t_test(x, y, alternative: str = "two_sided", zeta: float = DEFAULT_ZETA) -> TestResult:
    """Two-sample t test with unequal variances (Welch-Satterthwaite dof)."""
    xa = _as_array(x, min_size=2, name="x")
    ya = _as_array(y, min_size=2, name="y")
    nx, ny = xa.size, ya.size
    vx = float(xa.var(ddof=1))
    vy = float(ya.var(ddof=1))
    if vx == 0.0 and vy == 0.0:
        raise ValueError("Welch t test undefined when both samples have zero variance")
    sex2 = vx / nx
    sey2 = vy / ny
    t = (float(xa.mean()) - float(ya.mean())) / math.sqrt(sex2 + sey2)
    dof = (sex2 + sey2) ** 2 / (sex2**2 / (nx - 1) + sey2**2 / (ny - 1))
    return TestResult(statistic=t, p_value=min(_t_pvalue(t, dof, alternative), 1.0),
                      alternative=alternative, zeta=zeta, dof=dof)


def _fractional_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the mean rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def u_statistic(x, y) -> float:
    """U(X, Y): number of pairs with x > y, ties counting one half.

    Computed through ranks in O(n log n); equals the literal double sum.
    """
    xa = _as_array(x, name="x")
    ya = _as_array(y, name="y")
    combined = np.concatenate([xa, ya])
    ranks = _fractional_ranks(combined)
    rank_sum_x = float(ranks[: xa.size].sum())
    return rank_sum_x - xa.size * (xa.size + 1) / 2.0


def mann_whitney_u(x, y, alternative: str = "two_sided", zeta: float = DEFAULT_ZETA) -> TestResult:
    """Mann-Whitney rank test with normal approximation.

    The reported statistic is min(U(X,Y), U(Y,X)).  The p-value uses the
    tie-corrected normal approximation with a 0.5 continuity correction;
    ``less`` tests the alternative that X is stochastically smaller than Y.
    """
    xa = _as_array(x, name="x")
    ya = _as_array(y, name="y")
    n1, n2 = xa.size, ya.size
    u_xy = u_statistic(xa, ya)
    u_min = min(u_xy, n1 * n2 - u_xy)

    combined = np.concatenate([xa, ya])
    n = n1 + n2
    _, counts = np.unique(combined, return_counts=True)
    tie_term = float((counts.astype(float) ** 3 - counts).sum())
    variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0))) if n > 1 else 0.0
    mean = n1 * n2 / 2.0

    if variance == 0.0:  # every value tied
        p_less = p_greater = 1.0
    else:
        sd = math.sqrt(variance)
        p_less = normal_cdf((u_xy - mean + 0.5) / sd)
        p_greater = 1.0 - normal_cdf((u_xy - mean - 0.5) / sd)
    if alternative == "less":
        p = p_less
    elif alternative == "greater":
        p = p_greater
    elif alternative == "two_sided":
        p = min(1.0, 2.0 * min(p_less, p_greater))
    else:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    return TestResult(statistic=u_min, p_value=min(max(p, 0.0), 1.0),
                      alternative=alternative, zeta=zeta)


def pearson_correlation(x, y) -> float:
    xa = _as_array(x, min_size=2, name="x")
    ya = _as_array(y, min_size=2, name="y")
    if xa.size != ya.size:
        raise ValueError(f"length mismatch: {xa.size} vs {ya.size}")
    sx = float(xa.std())
    sy = float(ya.std())
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for zero-variance input")
    r = float(np.mean((xa - xa.mean()) * (ya - ya.mean())) / (sx * sy))
    return max(-1.0, min(1.0, r))


def difference_distribution(x: SampleSet, y: SampleSet, shuffle_seed: int) -> SampleSet:
    """Element-wise difference of two equally sized sample sets.

    Both inputs are shuffled independently first so that common-random-number
    pairing cannot leak correlation into the differences; the shuffle streams
    derive deterministically from ``shuffle_seed``.
    """
    if len(x) != len(y):
        raise ValueError(f"sample sets differ in size: {len(x)} vs {len(y)}")
    rng_x = np.random.Generator(np.random.PCG64(np.random.SeedSequence((shuffle_seed, 0))))
    rng_y = np.random.Generator(np.random.PCG64(np.random.SeedSequence((shuffle_seed, 1))))
    xs = x.values[rng_x.permutation(len(x))]
    ys = y.values[rng_y.permutation(len(y))]
    meta = {
        "kind": "difference",
        "shuffle_seed": shuffle_seed,
        "left": dict(x.meta),
        "right": dict(y.meta),
    }
    return SampleSet(values=xs - ys, meta=meta)
