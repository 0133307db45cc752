"""Exact simple-random-walk quantities on Z^2.

Provides n-step transition kernels (iterated 4-neighbor averaging), the
closed-form return probability P(S_2k = 0) = (C(2k,k) / 4^k)^2, the
two-walk overlap sum R_N, and the disorder strength beta_N = beta_hat / sqrt(R_N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

N_MAX_KERNEL = 4096


@dataclass(frozen=True)
class KernelTable:
    """Exact n-step SRW displacement distribution on [-n, n]^2.

    probs[i, j] is the probability of displacement (i - n, j - n); sites of
    the wrong parity carry exact 0.
    """

    n: int
    probs: np.ndarray

    def prob(self, d) -> float:
        d1, d2 = d
        if abs(d1) > self.n or abs(d2) > self.n:
            return 0.0
        return float(self.probs[d1 + self.n, d2 + self.n])


def kernel(n: int, n_max: int = N_MAX_KERNEL) -> KernelTable:
    """n-step SRW kernel by iterated 4-neighbor averaging (exact dyadic values)."""
    if not 1 <= n <= n_max:
        raise ValueError(f"kernel order must satisfy 1 <= n <= {n_max}, got {n}")
    size = 2 * n + 1
    p = np.zeros((size, size))
    p[n, n] = 1.0
    for _ in range(n):
        q = np.zeros_like(p)
        q[1:, :] += 0.25 * p[:-1, :]
        q[:-1, :] += 0.25 * p[1:, :]
        q[:, 1:] += 0.25 * p[:, :-1]
        q[:, :-1] += 0.25 * p[:, 1:]
        p = q
    return KernelTable(n, p)


_EXACT_RETURN_K = 256  # exact integer binomials below this, log-gamma beyond


def return_prob(k: int) -> float:
    """P(S_2k = 0) for the 2D SRW: (C(2k,k) 4^-k)^2.

    Exact rational arithmetic (one final rounding) for k < 256, so small
    values like 1/4 and 9/64 come out exactly; log-domain binomials beyond,
    where C(2k,k) would overflow any fixed-width float.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k < _EXACT_RETURN_K:
        c = math.comb(2 * k, k)
        return (c * c) / 16**k
    logp = gammaln(2 * k + 1) - 2 * gammaln(k + 1) - k * math.log(4.0)
    return math.exp(2.0 * logp)


def overlap_R(N: int) -> float:
    """R_N = sum_{k=1..N} P(S^1_k = S^2_k), the expected two-walk collision count.

    The difference of two independent SRWs at time k has the law of a 2k-step
    SRW, so each term is return_prob(k); summed with compensation (fsum).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    head = [return_prob(k) for k in range(1, min(N, _EXACT_RETURN_K - 1) + 1)]
    tail = []
    if N >= _EXACT_RETURN_K:
        k = np.arange(_EXACT_RETURN_K, N + 1, dtype=np.float64)
        logp = 2.0 * (gammaln(2 * k + 1) - 2 * gammaln(k + 1) - k * math.log(4.0))
        tail = np.exp(logp).tolist()
    return math.fsum(head + tail)


def beta_N(beta_hat: float, N: int) -> float:
    """Intermediate-disorder strength beta_hat / sqrt(R_N); requires 0 < beta_hat < 1."""
    if not 0.0 < beta_hat < 1.0:
        raise ValueError(f"beta_hat must lie in (0, 1) (subcritical regime), got {beta_hat}")
    return beta_hat / math.sqrt(overlap_R(N))
