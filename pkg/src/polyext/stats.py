"""Small statistical tests shared by experiments and the acceptance suite."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import stats as sps


def normal_cdf(x, mean: float = 0.0, std: float = 1.0):
    z = (np.asarray(x, dtype=np.float64) - mean) / (std * math.sqrt(2.0))
    from scipy.special import erf

    return 0.5 * (1.0 + erf(z))


def ks_distance(sample, cdf) -> float:
    """Kolmogorov-Smirnov distance sup |F_hat - F| against a callable CDF."""
    s = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(s)
    c = np.asarray(cdf(s), dtype=np.float64)
    upper = np.max(np.arange(1, n + 1) / n - c)
    lower = np.max(c - np.arange(0, n) / n)
    return float(max(upper, lower))


def paired_one_sided_t(diffs: Sequence[float]) -> tuple[float, float]:
    """One-sided paired t-test of mean(diffs) > 0; returns (t, p-value)."""
    d = np.asarray(diffs, dtype=np.float64)
    n = len(d)
    if n < 2:
        raise ValueError("need at least two paired differences")
    se = d.std(ddof=1) / math.sqrt(n)
    if se == 0.0:
        return (math.inf if d.mean() > 0 else -math.inf), (0.0 if d.mean() > 0 else 1.0)
    t = float(d.mean() / se)
    p = float(sps.t.sf(t, df=n - 1))
    return t, p


def mann_kendall(xs: Sequence[float]) -> tuple[int, float]:
    """Mann-Kendall S statistic and one-sided p-value for an increasing trend.

    Exact null distribution by enumeration of rank permutations for n <= 8
    (our tables are short); ties counted as zero contributions.
    """
    x = np.asarray(xs, dtype=np.float64)
    n = len(x)
    if n < 3:
        raise ValueError("need at least three points for a trend test")
    s = 0
    for i in range(n - 1):
        s += int(np.sum(np.sign(x[i + 1:] - x[i])))
    if n <= 8:
        import itertools

        count = 0
        total = 0
        for perm in itertools.permutations(range(n)):
            sp = 0
            for i in range(n - 1):
                for j in range(i + 1, n):
                    sp += (perm[j] > perm[i]) - (perm[j] < perm[i])
            total += 1
            count += sp >= s
        return s, count / total
    var = n * (n - 1) * (2 * n + 5) / 18.0
    z = (s - math.copysign(1, s)) / math.sqrt(var) if s != 0 else 0.0
    return s, float(sps.norm.sf(z))


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares slope, intercept, and R^2 of y against x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2:
        raise ValueError("need at least two points")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise ValueError("degenerate abscissa")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - slope * x - intercept) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def two_sample_ks_pvalue(a, b) -> float:
    """Two-sample KS test p-value (scipy exact/asymptotic)."""
    return float(sps.ks_2samp(a, b, method="auto").pvalue)
