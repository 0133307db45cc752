"""Scale decomposition of log Z_N: schedules, ratios, barriers, diagnostics.

Time scales t_k = ceil(N^(k/M)) and space scales r_k = ceil(N^(k/(2M)))
split the horizon into M bands; the band ratios W_k = Z_{t_k}/Z_{t_{k-1}}
telescope to Z_N, and their truncated versions W-tilde localize each band's
disorder (endpoint-measure average of a walled partition function).

Convention at the first scale: Z_{t_0} is the empty-horizon partition
function (== 1), so W_1 = Z_{t_1} and the telescope is exact; W-tilde_1 is
the walled Z-tilde_{t_1} started at x.  Scale k >= 2 covers times
[t_{k-1}+1, t_k] verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .env import DisorderField
from .polymer import Box, WallSpec, WindowPolicy, backward_sweep, forward_sweep
from .walk import beta_N


def _ceil_root_pow(N: int, num: int, den: int) -> int:
    """Exact ceil(N^(num/den)) for positive integers via integer comparison."""
    if num == 0:
        return 1
    g = max(1, int(round(N ** (num / den))))
    while g**den >= N**num:
        g -= 1
    g += 1  # smallest g with g^den >= N^num
    while g**den < N**num:
        g += 1
    return g


@dataclass(frozen=True)
class MultiscaleSchedule:
    """Time/space scales (t_k, r_k) for a horizon-N, M-band decomposition."""

    N: int
    M: int
    t: tuple  # t[k] for k = 0..M, with t[0] = 1
    r: tuple  # r[k] for k = 0..M, with r[0] = 1; r_{-1} is also 1

    def r_of(self, k: int) -> int:
        if k in (-1, 0):
            return 1
        return self.r[k]

    def span(self, k: int) -> int:
        """Number of time steps in band k: t_1 for k = 1, else t_k - t_{k-1}."""
        if not 1 <= k <= self.M:
            raise ValueError(f"band index must lie in [1, {self.M}], got {k}")
        return self.t[1] if k == 1 else self.t[k] - self.t[k - 1]


def schedule(N: int, M: int) -> MultiscaleSchedule:
    if N < 2 or M < 1:
        raise ValueError(f"need N >= 2 and M >= 1, got N={N} M={M}")
    t = [1] + [_ceil_root_pow(N, k, M) for k in range(1, M + 1)]
    r = [1] + [_ceil_root_pow(N, k, 2 * M) for k in range(1, M + 1)]
    return MultiscaleSchedule(N=N, M=M, t=tuple(t), r=tuple(r))


def ratio_W_all(
    env: DisorderField,
    x,
    sched: MultiscaleSchedule,
    beta_hat: float,
    policy: Optional[WindowPolicy] = None,
) -> np.ndarray:
    """log W_k(x) for k = 1..M from one forward pass recording every t_k.

    Telescoping: sum_k log W_k(x) = log Z_N(x) holds exactly by construction
    (W_1 = Z_{t_1}; Z at the empty horizon is 1).
    """
    pol = policy if policy is not None else WindowPolicy(sched.N)
    b = beta_N(beta_hat, sched.N)
    res = forward_sweep(env, x, sched.t[sched.M], b, pol, record_times=sched.t[1:-1])
    log_z = [0.0]
    for k in range(1, sched.M):
        log_z.append(res.snapshots[sched.t[k]].log_z)
    log_z.append(res.log_z)
    return np.diff(np.asarray(log_z))


def ratio_W(env, x, k: int, sched: MultiscaleSchedule, beta_hat: float, policy=None) -> float:
    """log W_k(x) = log Z_{t_k}(x) - log Z_{t_{k-1}}(x) (log Z_{t_0} := 0)."""
    if not 1 <= k <= sched.M:
        raise ValueError(f"band index must lie in [1, {sched.M}], got {k}")
    pol = policy if policy is not None else WindowPolicy(sched.N)
    b = beta_N(beta_hat, sched.N)
    rec = [sched.t[k - 1]] if k >= 2 else []
    res = forward_sweep(env, x, sched.t[k], b, pol, record_times=rec)
    if k == 1:
        return res.log_z
    return res.log_z - res.snapshots[sched.t[k - 1]].log_z


def _wall_for(sched: MultiscaleSchedule, k: int, x, wall_mode: str) -> WallSpec:
    radius = math.sqrt(sched.span(k)) * math.log(sched.N)
    if wall_mode == "start":
        center = (int(x[0]), int(x[1]))
    elif wall_mode == "origin":
        center = (0, 0)
    else:
        raise ValueError(f"wall_mode must be 'start' or 'origin', got {wall_mode!r}")
    return WallSpec(center=center, radius=radius)


def _tilde_from_measure(
    env: DisorderField,
    x,
    k: int,
    sched: MultiscaleSchedule,
    beta: float,
    pol: WindowPolicy,
    measure,
    wall_mode: str,
) -> float:
    """log W-tilde_k given mu_{t_{k-1}}(x, .); one walled backward sweep."""
    span = sched.span(k)
    wall = _wall_for(sched, k, x, wall_mode)
    if k == 1:
        fld = backward_sweep(
            env, 1, sched.t[1], Box.square((int(x[0]), int(x[1])), 0), beta, pol, wall=wall
        )
        return fld.log_at((int(x[0]), int(x[1])))

    ball = sched.r_of(k - 1) * math.log(sched.N)
    rad = int(math.floor(ball))
    window = Box.square((int(x[0]), int(x[1])), rad)
    shifted = env.shifted(sched.t[k - 1])
    fld = backward_sweep(shifted, 1, span, window, beta, pol, wall=wall)

    d1 = np.arange(window.lo1, window.hi1 + 1) - x[0]
    d2 = np.arange(window.lo2, window.hi2 + 1) - x[1]
    in_ball = (d1[:, None] ** 2 + d2[None, :] ** 2) <= ball * ball

    # mu restricted to the ball, aligned with the field's window
    mu = np.zeros(window.shape)
    mb = measure.box
    lo1 = max(window.lo1, mb.lo1)
    hi1 = min(window.hi1, mb.hi1)
    lo2 = max(window.lo2, mb.lo2)
    hi2 = min(window.hi2, mb.hi2)
    if lo1 <= hi1 and lo2 <= hi2:
        mu[lo1 - window.lo1: hi1 - window.lo1 + 1, lo2 - window.lo2: hi2 - window.lo2 + 1] = (
            measure.probs[lo1 - mb.lo1: hi1 - mb.lo1 + 1, lo2 - mb.lo2: hi2 - mb.lo2 + 1]
        )
    mu[~in_ball] = 0.0

    logs = fld.values  # + fld.log_offset, folded back below
    alive = mu > 0.0
    alive &= np.isfinite(logs)
    if not np.any(alive):
        raise ValueError("empty truncated sum; schedule and wall are inconsistent")
    terms = np.log(mu[alive]) + logs[alive]
    m = float(terms.max())
    return m + math.log(float(np.sum(np.exp(terms - m)))) + fld.log_offset


def ratio_W_tilde(
    env: DisorderField,
    x,
    k: int,
    sched: MultiscaleSchedule,
    beta_hat: float,
    wall_mode: str = "start",
    policy: Optional[WindowPolicy] = None,
) -> float:
    """log of W-tilde_k(x) = sum_{|y-x| <= r_{k-1} log N} mu_{t_{k-1}}(x,y) Z-tilde(y).

    The walled partition function runs on the time-shifted environment; the
    wall box is centered at x (wall_mode="start", default) or at the lattice
    origin (wall_mode="origin", the source text read literally).
    """
    if not 1 <= k <= sched.M:
        raise ValueError(f"band index must lie in [1, {sched.M}], got {k}")
    pol = policy if policy is not None else WindowPolicy(sched.N)
    b = beta_N(beta_hat, sched.N)
    measure = None
    if k >= 2:
        measure = forward_sweep(env, x, sched.t[k - 1], b, pol).measure
    return _tilde_from_measure(env, x, k, sched, b, pol, measure, wall_mode)


class TildeProfile(NamedTuple):
    log_w: np.ndarray        # log W_k, k = 1..M
    log_w_tilde: np.ndarray  # log W-tilde_k, k = 1..M
    log_z: float             # log Z_N(x) = sum log W_k


def ratio_W_tilde_all(
    env: DisorderField,
    x,
    sched: MultiscaleSchedule,
    beta_hat: float,
    wall_mode: str = "start",
    policy: Optional[WindowPolicy] = None,
) -> TildeProfile:
    """All band ratios and truncated ratios at x, sharing one forward pass."""
    pol = policy if policy is not None else WindowPolicy(sched.N)
    b = beta_N(beta_hat, sched.N)
    res = forward_sweep(env, x, sched.t[sched.M], b, pol, record_times=sched.t[1:-1])
    log_z = [0.0]
    for k in range(1, sched.M):
        log_z.append(res.snapshots[sched.t[k]].log_z)
    log_z.append(res.log_z)
    log_w = np.diff(np.asarray(log_z))

    tilde = np.empty(sched.M)
    for k in range(1, sched.M + 1):
        measure = res.snapshots[sched.t[k - 1]] if k >= 2 else None
        tilde[k - 1] = _tilde_from_measure(env, x, k, sched, b, pol, measure, wall_mode)
    return TildeProfile(log_w=log_w, log_w_tilde=tilde, log_z=float(log_z[-1]))


# ---------------------------------------------------------------------------
# barrier sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BarrierSpec:
    """Candidate increment profile (alpha_k..alpha_M) against the barrier at level k."""

    epsilon: float
    M: int
    k: int
    alphas: np.ndarray
    cap: float  # M0 sqrt(log N)

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=np.float64)
        object.__setattr__(self, "alphas", a)
        if not 1 <= self.k <= self.M:
            raise ValueError(f"need 1 <= k <= M, got k={self.k} M={self.M}")
        if len(a) != self.M - self.k + 1:
            raise ValueError(f"alphas must have length M - k + 1 = {self.M - self.k + 1}")
        if np.any(a < 0) or np.any(a > self.cap):
            raise ValueError("alphas must lie in [0, cap]")


def barrier_member(spec: BarrierSpec, lambdas, N: int) -> bool:
    """Membership in the level-k barrier set.

    Requires sum_{i>=k} alpha_i to exceed the level-k bound strictly while
    every deeper tail sum_{i>=l} (l >= k+1) stays at or below its bound,
    where bound(l) = (sqrt(2)(1+eps)/sqrt(M)) sum_{i>=l} lambda_i sqrt(log N)
    + eps sqrt(log N).
    """
    lam = np.asarray(lambdas, dtype=np.float64)
    if len(lam) != spec.M - spec.k + 1:
        raise ValueError(f"lambdas must have length M - k + 1 = {spec.M - spec.k + 1}")
    root_log = math.sqrt(math.log(N))
    coef = math.sqrt(2.0) * (1.0 + spec.epsilon) / math.sqrt(spec.M)
    a_tail = np.cumsum(spec.alphas[::-1])[::-1]
    l_tail = np.cumsum(lam[::-1])[::-1]
    bound = coef * l_tail * root_log + spec.epsilon * root_log
    if not a_tail[0] > bound[0]:
        return False
    return bool(np.all(a_tail[1:] <= bound[1:]))


# ---------------------------------------------------------------------------
# Gaussian-domination diagnostic
# ---------------------------------------------------------------------------

class DominationSample(NamedTuple):
    i: int
    x: tuple
    worst_ratio: float
    threshold: float
    holds: bool


class DominationReport(NamedTuple):
    samples: list
    threshold: float
    event_holds: bool
    worst_ratio: float


def _gaussian_reference(n: int, hat_delta: float, box: Box) -> np.ndarray:
    """p-hat_n(y) on the box: exp(-hat_delta |y|^2 / n), normalized over all of Z^2.

    The normalizer sums the lattice Gaussian out to where the tail is below
    1e-16 of the total, so sum_y p-hat = 1 to well within 1e-10.
    """
    reach = int(math.ceil(math.sqrt(40.0 * n / hat_delta))) + 2
    ys = np.arange(-reach, reach + 1, dtype=np.float64)
    q = np.exp(-hat_delta * ys * ys / n)
    norm = float(np.sum(q[:, None] * q[None, :]))
    y1 = np.arange(box.lo1, box.hi1 + 1, dtype=np.float64)
    y2 = np.arange(box.lo2, box.hi2 + 1, dtype=np.float64)
    r2 = y1[:, None] ** 2 + y2[None, :] ** 2
    return np.exp(-hat_delta * r2 / n) / norm


def domination_check(
    env: DisorderField,
    sched: MultiscaleSchedule,
    L: int,
    x_samples: int,
    hat_delta: float,
    beta_hat: float,
    rng_seed: int = 0,
    i_values=None,
    policy: Optional[WindowPolicy] = None,
) -> DominationReport:
    """Diagnostic for the Gaussian-domination event: is every polymer endpoint
    measure mu_{t_i}(x, .) dominated by N^(1/(L M^2)) p-hat_{t_i}(.)?

    Samples starting points x from [0, r_{i-1})^2 at each probed band i and
    reports the worst ratio max_y mu / p-hat; diagnostic only, never a proof.
    """
    if L < 1 or hat_delta <= 0:
        raise ValueError("need L >= 1 and hat_delta > 0")
    pol = policy if policy is not None else WindowPolicy(sched.N)
    b = beta_N(beta_hat, sched.N)
    threshold = sched.N ** (1.0 / (L * sched.M**2))
    rng = np.random.default_rng(rng_seed)
    probes = list(i_values) if i_values is not None else list(range(1, sched.M))
    samples = []
    worst = 0.0
    for i in probes:
        side = sched.r_of(i - 1)
        pts = {(0, 0)}
        while len(pts) < min(x_samples, side * side):
            pts.add((int(rng.integers(0, side)), int(rng.integers(0, side))))
        for x in sorted(pts):
            meas = forward_sweep(env, x, sched.t[i], b, pol).measure
            ref = _gaussian_reference(sched.t[i], hat_delta, meas.box)
            ratio = float(np.max(meas.probs / ref))
            samples.append(
                DominationSample(
                    i=i, x=x, worst_ratio=ratio, threshold=threshold, holds=ratio <= threshold
                )
            )
            worst = max(worst, ratio)
    return DominationReport(
        samples=samples,
        threshold=threshold,
        event_holds=all(s.holds for s in samples),
        worst_ratio=worst,
    )
