"""Closed-form constants and analytic machinery.

Variance constants lambda^2 and lambda^2_{u,v}, the scale profile sigma(u),
the extremal constant sigma_star = sqrt(2) * int_0^1 sigma, the first-moment
envelope, Edwards-Wilkinson covariance quadrature, the discrete variational
problem with exhaustive-grid oracle and coordinate descent, and the
intersection-moment growth condition used to validate experiment configs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

EULER_GAMMA = 0.5772156649015328606


def lambda_sq(beta_hat: float) -> float:
    """Limit variance of log Z_N: -log(1 - beta_hat^2)."""
    if not 0.0 < beta_hat < 1.0:
        raise ValueError(f"beta_hat must lie in (0, 1), got {beta_hat}")
    return -math.log(1.0 - beta_hat * beta_hat)


def lambda_sq_interval(u: float, v: float, beta_hat: float) -> float:
    """Scale-interval variance log((1 - beta_hat^2 u) / (1 - beta_hat^2 v)).

    Additive over adjacent intervals; lambda_sq_interval(0, 1) == lambda_sq.
    """
    if u > v:
        raise ValueError(f"need u <= v, got u={u} v={v}")
    if not 0.0 < beta_hat < 1.0:
        raise ValueError(f"beta_hat must lie in (0, 1), got {beta_hat}")
    b2 = beta_hat * beta_hat
    return math.log((1.0 - b2 * u) / (1.0 - b2 * v))


def sigma_profile(u: float, beta_hat: float) -> float:
    """Scale-dependent standard deviation sqrt(beta_hat^2 / (1 - beta_hat^2 u))."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    if not 0.0 < beta_hat < 1.0:
        raise ValueError(f"beta_hat must lie in (0, 1), got {beta_hat}")
    b2 = beta_hat * beta_hat
    return math.sqrt(b2 / (1.0 - b2 * u))


def _adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Recursive adaptive Simpson quadrature with Richardson correction."""

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lmid, rmid = 0.5 * (lo + mid), 0.5 * (mid + hi)
        fl, fr = f(lmid), f(rmid)
        left = simpson(lo, mid, flo, fl, fmid)
        right = simpson(mid, hi, fmid, fr, fhi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(lo, mid, flo, fl, fmid, left, eps / 2.0, depth - 1) + recurse(
            mid, hi, fmid, fr, fhi, right, eps / 2.0, depth - 1
        )

    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48)


def simpson_quad(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Public adaptive-Simpson entry point (used for profile integrals)."""
    return _adaptive_simpson(f, a, b, tol)


def sigma_star(beta_hat: float, tol: float = 1e-12) -> float:
    """Extremal constant sqrt(2) * int_0^1 sigma(u) du by adaptive Simpson."""
    return math.sqrt(2.0) * _adaptive_simpson(lambda u: sigma_profile(u, beta_hat), 0.0, 1.0, tol)


def sigma_star_closed_form(beta_hat: float) -> float:
    """Antiderivative form 2*sqrt(2)*(1 - sqrt(1 - beta_hat^2)) / beta_hat.

    int_0^1 beta (1 - beta^2 u)^(-1/2) du = (2/beta)(1 - sqrt(1 - beta^2)).
    """
    if not 0.0 < beta_hat < 1.0:
        raise ValueError(f"beta_hat must lie in (0, 1), got {beta_hat}")
    return 2.0 * math.sqrt(2.0) * (1.0 - math.sqrt(1.0 - beta_hat * beta_hat)) / beta_hat


class NaiveBound(NamedTuple):
    """First-moment envelope in both normalizations.

    literal: (int_0^1 sigma^2)^(1/2) = sqrt(lambda^2), as printed in the source;
    normalized: sqrt(2 * lambda^2), the variant that actually dominates
    sigma_star (Cauchy-Schwarz). Both reported, no silent correction.
    """

    literal: float
    normalized: float


def naive_bound(beta_hat: float) -> NaiveBound:
    l2 = lambda_sq(beta_hat)
    return NaiveBound(literal=math.sqrt(l2), normalized=math.sqrt(2.0 * l2))


# ---------------------------------------------------------------------------
# exponential integral E1 and the Edwards-Wilkinson covariance quadrature
# ---------------------------------------------------------------------------

def exp1(z):
    """E1(z) = int_z^inf w^-1 e^-w dw for z > 0, vectorized.

    Power series for z <= 1, modified-Lentz continued fraction for z > 1;
    both iterated to machine tolerance (absolute error < 1e-14, well inside
    the documented 1e-10 budget). Cross-checked against scipy.special.exp1
    in the test suite.
    """
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= 0):
        raise ValueError("exp1 requires z > 0")
    out = np.empty_like(z)

    small = z <= 1.0
    if np.any(small):
        zs = z[small]
        total = -EULER_GAMMA - np.log(zs)
        term = np.ones_like(zs)
        for k in range(1, 60):
            term = term * (-zs) / k
            contrib = -term / k
            total += contrib
            if np.max(np.abs(contrib)) < 1e-18:
                break
        out[small] = total

    big = ~small
    if np.any(big):
        zb = z[big]
        # E1(z) = e^-z * CF, CF = 1/(z+1- 1^2/(z+3- 2^2/(z+5- ...)))
        tiny = 1e-300
        b = zb + 1.0
        c = np.full_like(zb, 1.0 / tiny)
        d = 1.0 / b
        h = d.copy()
        for k in range(1, 200):
            a = -float(k * k)
            b = b + 2.0
            d = 1.0 / (a * d + b)
            c = b + a / c
            delta = c * d
            h = h * delta
            if np.max(np.abs(delta - 1.0)) < 1e-16:
                break
        out[big] = np.exp(-zb) * h

    return out if out.ndim else float(out)


def ew_covariance(psi: np.ndarray, h: float) -> float:
    """Variance constant sigma^2_psi = (1/pi) iint psi(x) psi(y) E1(|x-y|^2/2) dx dy.

    psi is sampled at the centers of square cells of side h (compact support
    = the array extent). Tensor midpoint rule: the double integral becomes
    h^4 * sum over displacement Delta of autocorr(psi)(Delta) * E1(|Delta h|^2/2).
    The diagonal cell pair uses the kernel at the mean squared separation of
    two uniform points in one cell, |x-y|^2/2 -> h^2/6 (the log singularity
    is integrable; the self-convergence test pins the accuracy).
    """
    psi = np.asarray(psi, dtype=np.float64)
    if psi.ndim != 2:
        raise ValueError("psi must be a 2-D gridded function")
    if not np.all(np.isfinite(psi)):
        raise ValueError("psi must be finite (compactly supported grid)")
    if h <= 0:
        raise ValueError(f"grid spacing must be positive, got {h}")
    if not psi.any():
        return 0.0
    n1, n2 = psi.shape
    # autocorrelation over displacements via FFT
    f = np.fft.rfft2(psi, s=(2 * n1 - 1, 2 * n2 - 1))
    corr = np.fft.irfft2(f * np.conj(f), s=(2 * n1 - 1, 2 * n2 - 1))
    corr = np.fft.fftshift(corr)
    d1 = np.arange(-(n1 - 1), n1)
    d2 = np.arange(-(n2 - 1), n2)
    r2 = (d1[:, None] ** 2 + d2[None, :] ** 2) * (h * h)
    arg = r2 / 2.0
    arg[n1 - 1, n2 - 1] = h * h / 6.0
    kern = exp1(arg)
    return float(h**4 / math.pi * np.sum(corr * kern))


# ---------------------------------------------------------------------------
# discrete variational problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VariationalInstance:
    """Instance (M, t, a, f) of the tail-constrained minimization.

    Feasible set: g on [t..M] with sum g > a + sum_{t..M} f and, for every
    s > t, sum_{s..M} g <= a + sum_{s..M} f. Objective: sum g(s)/f(s).
    """

    M: int
    t: int
    a: float
    f: np.ndarray  # f[j] = f(t + j), nondecreasing positives, length M - t + 1

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.float64)
        object.__setattr__(self, "f", f)
        if not 1 <= self.t <= self.M:
            raise ValueError(f"need 1 <= t <= M, got t={self.t} M={self.M}")
        if len(f) != self.M - self.t + 1:
            raise ValueError(f"f must have length M - t + 1 = {self.M - self.t + 1}, got {len(f)}")
        if self.a < 0:
            raise ValueError(f"a must be >= 0, got {self.a}")
        if np.any(f <= 0) or np.any(np.diff(f) < 0):
            raise ValueError("f must be positive and nondecreasing")


def variational_bound(inst: VariationalInstance) -> float:
    """Lower bound M - t + 1 + a / f(M) on the constrained objective."""
    return inst.M - inst.t + 1 + inst.a / float(inst.f[-1])


def _tail_caps(inst: VariationalInstance) -> np.ndarray:
    # cap[j] = a + sum_{s >= t+j} f(s), the tail budget at position j
    rev_cum = np.cumsum(inst.f[::-1])[::-1]
    return inst.a + rev_cum


def variational_search(
    inst: VariationalInstance, grid_step: float, method: str = "grid"
) -> tuple[np.ndarray, float]:
    """Approximate minimizer of sum g/f over the discretized feasible set.

    method="grid": exhaustive search over g in (grid_step * Z)^d, the oracle
    mode (dimension M - t + 1 <= 8). The strict total constraint is realized
    as >= a + sum f + grid_step. method="descent": greedy tail-filling plus
    coordinate descent on the same grid, any dimension; ties broken toward
    the lexicographically smallest g.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    d = inst.M - inst.t + 1
    f = inst.f
    caps = _tail_caps(inst)
    total_min = caps[0] + grid_step  # strict ">" on the grid

    if method == "grid":
        if d > 8:
            raise ValueError("grid oracle restricted to M - t + 1 <= 8 dimensions")
        # per-coordinate caps: tail constraints bound g(s) <= a + F(s) for s > t;
        # the leading coordinate never needs to exceed the total budget + one step.
        cap0 = caps[0] + 2.0 * grid_step
        axes = []
        for j in range(d):
            cj = cap0 if j == 0 else caps[j]
            axes.append(np.arange(0.0, cj + grid_step * 0.5, grid_step))
        sizes = [len(ax) for ax in axes]
        n_combos = int(np.prod(sizes))
        if n_combos > 8_000_000:
            raise ValueError(
                f"grid oracle would enumerate {n_combos} points; coarsen grid_step "
                f"(need at most 8e6 combinations)"
            )
        best_val = math.inf
        best_g = None
        chunk = 1 << 20
        strides = np.cumprod([1] + sizes[::-1][:-1])[::-1].astype(np.int64)
        inv_f = 1.0 / f
        for lo in range(0, n_combos, chunk):
            idx = np.arange(lo, min(lo + chunk, n_combos), dtype=np.int64)
            g = np.empty((len(idx), d))
            for j in range(d):
                g[:, j] = axes[j][(idx // strides[j]) % sizes[j]]
            tails = np.cumsum(g[:, ::-1], axis=1)[:, ::-1]
            feas = tails[:, 0] >= total_min - 1e-12
            for j in range(1, d):
                feas &= tails[:, j] <= caps[j] + 1e-12
            if not np.any(feas):
                continue
            obj = g[feas] @ inv_f
            k = int(np.argmin(obj))  # ties: lowest enumeration index is
            if obj[k] < best_val - 1e-15:  # lexicographically smallest
                best_val = float(obj[k])
                best_g = g[feas][k].copy()
        if best_g is None:
            raise ValueError("no feasible grid point; refine grid_step")
        return best_g, best_val

    if method == "descent":
        # start at the canonical near-minimizer g = f + a e_M (+ one step on
        # the unconstrained leading coordinate for the strict total), which is
        # always feasible, then descend coordinatewise on the step lattice
        g = f.copy()
        g[-1] += inst.a
        g[0] += grid_step

        def feasible(v):
            tails = np.cumsum(v[::-1])[::-1]
            if tails[0] < total_min - 1e-12:
                return False
            return all(tails[j] <= caps[j] + 1e-12 for j in range(1, d))

        if not feasible(g):
            raise ValueError("descent initialization infeasible; refine grid_step")
        improved = True
        while improved:
            improved = False
            for j in range(d):
                while g[j] >= grid_step - 1e-12:
                    trial = g.copy()
                    trial[j] -= grid_step
                    if feasible(trial):
                        g = trial
                        improved = True
                    else:
                        break
        return g, float(g @ (1.0 / f))

    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Appendix-style growth condition on the replica count q(N)
# ---------------------------------------------------------------------------

class MomentCondition(NamedTuple):
    holds: bool
    margin: float
    lhs: float
    rhs: float
    q_at_probe: int


def moment_condition(q_of_N, k: int, M: int, beta_hat: float, N_probe: int) -> MomentCondition:
    """Check (1/log N) C(q,2) < (1 - beta_hat^2 k/M)/beta_hat^2 at N = N_probe.

    q_of_N may be an int (constant), a callable N -> q, or the pair
    ("c_sqrt_log", c) meaning q(N) = floor(c * sqrt(log N)).
    """
    if not 1 <= k <= M:
        raise ValueError(f"need 1 <= k <= M, got k={k} M={M}")
    if not 0.0 < beta_hat < 1.0:
        raise ValueError(f"beta_hat must lie in (0, 1), got {beta_hat}")
    if isinstance(q_of_N, tuple) and len(q_of_N) == 2 and q_of_N[0] == "c_sqrt_log":
        q = int(q_of_N[1] * math.sqrt(math.log(N_probe)))
    elif callable(q_of_N):
        q = int(q_of_N(N_probe))
    else:
        q = int(q_of_N)
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    lhs = (q * (q - 1) / 2.0) / math.log(N_probe)
    rhs = (1.0 - beta_hat * beta_hat * k / M) / (beta_hat * beta_hat)
    return MomentCondition(holds=lhs < rhs, margin=rhs - lhs, lhs=lhs, rhs=rhs, q_at_probe=q)
