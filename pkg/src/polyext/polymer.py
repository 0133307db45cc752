"""Transfer-matrix dynamic programming for polymer partition functions.

A backward sweep computes log Z_{s,t}(x) for every starting point x in a
rectangular window in one pass; a forward sweep computes the endpoint Gibbs
measure mu_t(x, .) and the normalizations log Z_n(x) along the way.  All
arithmetic runs on linear-domain weights with a running global log-offset
(the sweep is linear, so one offset suffices); per-step renormalization
keeps stored magnitudes within e^(+-64).

Window policy: a sweep over m steps keeps sites within
min(m, width(m)) of the starting window, where width(m) is
ceil(c * sqrt(m+1) * (1 + log N)) under the default certified policy
(dominating the sqrt(t) log N wall) or ceil(kappa * sqrt(m+1)) under the
cheaper "stat" policy for large statistical runs.  Both are certified
empirically by window doubling in the test suite; mass beyond the window is
dropped, which is exactly the truncation the certification measures.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .env import DisorderField

LOG_RENORM_BOUND = 64.0  # stored linear weights kept within e^(+-64)


class WindowError(ValueError):
    """A sweep cannot fit the requested truncation policy in the given bounds."""


class BudgetError(RuntimeError):
    """The requested computation exceeds the configured size budget."""


@dataclass(frozen=True)
class Box:
    """Closed lattice rectangle [lo1, hi1] x [lo2, hi2]."""

    lo1: int
    hi1: int
    lo2: int
    hi2: int

    def __post_init__(self):
        if self.lo1 > self.hi1 or self.lo2 > self.hi2:
            raise ValueError(f"empty box {self}")

    @staticmethod
    def square(center, radius: int) -> "Box":
        c1, c2 = center
        r = int(radius)
        return Box(c1 - r, c1 + r, c2 - r, c2 + r)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.hi1 - self.lo1 + 1, self.hi2 - self.lo2 + 1)

    def contains(self, x) -> bool:
        return self.lo1 <= x[0] <= self.hi1 and self.lo2 <= x[1] <= self.hi2

    def index_of(self, x) -> tuple[int, int]:
        if not self.contains(x):
            raise KeyError(f"{x} outside box {self}")
        return (x[0] - self.lo1, x[1] - self.lo2)


@dataclass(frozen=True)
class WindowPolicy:
    """Diffusive-window sizing for sweeps belonging to a horizon-N run."""

    N: int
    mode: str = "certified"  # "certified" | "stat"
    c: float = 1.0
    kappa: float = 4.0
    scale: float = 1.0  # multiplier for doubling certification runs

    def width(self, m: int) -> int:
        if m <= 0:
            return 0
        if self.mode == "certified":
            w = self.c * math.sqrt(m + 1.0) * (1.0 + math.log(self.N))
        elif self.mode == "stat":
            w = self.kappa * math.sqrt(m + 1.0)
        else:
            raise ValueError(f"unknown window mode {self.mode!r}")
        return int(math.ceil(self.scale * w))

    def margin(self, m: int) -> int:
        """Needed margin beyond the start window after m walk steps."""
        return min(m, self.width(m))


@dataclass(frozen=True)
class WallSpec:
    """Hard constraint |S_i - center|_inf <= radius for every step of the sweep."""

    center: tuple[int, int]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"wall radius must be positive, got {self.radius}")


@dataclass
class LogWeightField:
    """Log-weights over a window for one time slice of a sweep.

    True value at x is values[box.index_of(x)] + log_offset; -inf marks
    sites with exactly zero weight (wall-forbidden or unreachable).
    """

    box: Box
    values: np.ndarray
    log_offset: float
    time_lo: int
    time_hi: int
    horizon: int = 0

    def log_at(self, x) -> float:
        i, j = self.box.index_of(x)
        return float(self.values[i, j]) + self.log_offset

    def logs(self) -> np.ndarray:
        return self.values + self.log_offset


@dataclass
class EndpointMeasure:
    """Normalized endpoint distribution mu_t(origin, .) plus its normalization."""

    origin: tuple[int, int]
    time: int
    box: Box
    probs: np.ndarray
    log_z: float  # log Z_t(origin) recovered from the normalization

    def prob(self, y) -> float:
        if not self.box.contains(y):
            return 0.0
        i, j = self.box.index_of(y)
        return float(self.probs[i, j])


def _wall_mask_apply(arr: np.ndarray, box_lo1: int, box_lo2: int, wall: WallSpec) -> None:
    """Zero entries of arr (window starting at box_lo) outside the wall box."""
    n1, n2 = arr.shape
    r = int(math.floor(wall.radius))
    w_lo1 = wall.center[0] - r - box_lo1
    w_hi1 = wall.center[0] + r - box_lo1
    w_lo2 = wall.center[1] - r - box_lo2
    w_hi2 = wall.center[1] + r - box_lo2
    if w_lo1 > 0:
        arr[: min(w_lo1, n1), :] = 0.0
    if w_hi1 < n1 - 1:
        arr[max(w_hi1 + 1, 0):, :] = 0.0
    if w_lo2 > 0:
        arr[:, : min(w_lo2, n2)] = 0.0
    if w_hi2 < n2 - 1:
        arr[:, max(w_hi2 + 1, 0):] = 0.0


def _renorm(buf: np.ndarray, log_offset: float) -> float:
    m = float(buf.max())
    if m <= 0.0:
        return log_offset  # fully dead field handled by caller
    if m > math.exp(LOG_RENORM_BOUND) or m < math.exp(-LOG_RENORM_BOUND):
        buf /= m
        log_offset += math.log(m)
    return log_offset


def backward_sweep(
    env: DisorderField,
    s: int,
    t: int,
    window: Box,
    beta: float,
    policy: WindowPolicy,
    wall: Optional[WallSpec] = None,
    max_radius: Optional[int] = None,
) -> LogWeightField:
    """Field of log Z_{s,t}(x) for every x in `window` (log Z-tilde under a wall).

    Backward recursion u_t = 1, u_{n-1}(y) = (1/4) sum_{z ~ y}
    exp(beta omega(n, z) - beta^2/2) u_n(z); returns u_{s-1} on the window.
    """
    if not 1 <= s <= t:
        raise ValueError(f"need 1 <= s <= t, got s={s} t={t}")
    span = t - s + 1
    c1 = (window.lo1 + window.hi1) // 2
    c2 = (window.lo2 + window.hi2) // 2
    halo = max(window.hi1 - c1, c1 - window.lo1, window.hi2 - c2, c2 - window.lo2)

    r_max = halo + policy.margin(span)
    if max_radius is not None and r_max > max_radius:
        raise WindowError(
            f"sweep over {span} steps from a radius-{halo} window requires "
            f"radius {r_max} > max_radius {max_radius}"
        )
    size = 2 * (r_max + 1) + 1
    ctr = r_max + 1
    buf = np.zeros((size, size))

    r_top = halo + policy.margin(span)
    buf[ctr - r_top: ctr + r_top + 1, ctr - r_top: ctr + r_top + 1] = 1.0
    if wall is not None:
        view = buf[ctr - r_top: ctr + r_top + 1, ctr - r_top: ctr + r_top + 1]
        _wall_mask_apply(view, c1 - r_top, c2 - r_top, wall)

    log_offset = 0.0
    r_prev = r_top
    for n in range(t, s - 1, -1):
        r_w = halo + policy.margin(n - s)          # write radius for u_{n-1}
        r_r = min(r_w + 1, r_prev)                 # read radius (beyond r_prev is zero)
        g = env.block(n, c1 - r_r, c1 + r_r, c2 - r_r, c2 + r_r)
        np.multiply(g, beta, out=g)
        g -= 0.5 * beta * beta
        np.exp(g, out=g)
        g *= 0.25
        if wall is not None:
            _wall_mask_apply(g, c1 - r_r, c2 - r_r, wall)
        v = buf[ctr - r_r: ctr + r_r + 1, ctr - r_r: ctr + r_r + 1]
        a = v * g
        if r_r == r_w + 1:
            out = a[:-2, 1:-1] + a[2:, 1:-1]
            out += a[1:-1, :-2]
            out += a[1:-1, 2:]
        else:  # read radius == write radius: pad the stencil with zeros
            out = np.zeros((2 * r_w + 1, 2 * r_w + 1))
            out[1:-1, 1:-1] = a[:-2, 1:-1] + a[2:, 1:-1] + a[1:-1, :-2] + a[1:-1, 2:]
            out[0, 1:-1] += a[1, 1:-1] + a[0, :-2] + a[0, 2:]
            out[-1, 1:-1] += a[-2, 1:-1] + a[-1, :-2] + a[-1, 2:]
            out[1:-1, 0] += a[:-2, 0] + a[2:, 0] + a[1:-1, 1]
            out[1:-1, -1] += a[:-2, -1] + a[2:, -1] + a[1:-1, -2]
            out[0, 0] += a[0, 1] + a[1, 0]
            out[0, -1] += a[0, -2] + a[1, -1]
            out[-1, 0] += a[-1, 1] + a[-2, 0]
            out[-1, -1] += a[-1, -2] + a[-2, -1]
        buf[ctr - r_w: ctr + r_w + 1, ctr - r_w: ctr + r_w + 1] = out
        log_offset = _renorm(buf[ctr - r_w: ctr + r_w + 1, ctr - r_w: ctr + r_w + 1], log_offset)
        r_prev = r_w

    i1 = window.lo1 - c1 + ctr
    i2 = window.lo2 - c2 + ctr
    h1, h2 = window.shape
    vals = buf[i1: i1 + h1, i2: i2 + h2].copy()
    if wall is not None and not np.any(vals > 0.0):
        raise WindowError("wall excludes every requested starting point")
    with np.errstate(divide="ignore"):
        logs = np.log(vals)
    return LogWeightField(
        box=window, values=logs, log_offset=log_offset, time_lo=s, time_hi=t, horizon=policy.N
    )


class ForwardResult(NamedTuple):
    measure: EndpointMeasure
    log_z: float
    snapshots: dict  # time -> EndpointMeasure at the recorded intermediate times


def forward_sweep(
    env: DisorderField,
    x,
    t: int,
    beta: float,
    policy: WindowPolicy,
    record_times: Sequence[int] = (),
    wall: Optional[WallSpec] = None,
) -> ForwardResult:
    """Endpoint measure mu_t(x, .) by the forward recursion.

    v_0 = delta_x, v_n(y) = exp(beta omega(n, y) - beta^2/2) * (1/4)
    sum_{z ~ y} v_{n-1}(z); the normalization recovers log Z_t(x), and
    snapshots of mu_n(x, .) are kept at each requested intermediate time.
    """
    if t < 1:
        raise ValueError(f"need t >= 1, got {t}")
    x1, x2 = int(x[0]), int(x[1])
    record = sorted(set(int(r) for r in record_times))
    if record and (record[0] < 1 or record[-1] > t):
        raise ValueError(f"record times must lie in [1, {t}]")

    r_max = policy.margin(t)
    size = 2 * (r_max + 1) + 1
    ctr = r_max + 1
    buf = np.zeros((size, size))
    buf[ctr, ctr] = 1.0

    log_offset = 0.0
    snapshots: dict = {}
    r_prev = 0
    for n in range(1, t + 1):
        r_w = policy.margin(n)
        r_r = min(r_w, r_prev + 1)  # v_{n-1} is zero beyond r_prev
        a = buf[ctr - r_r - 1: ctr + r_r + 2, ctr - r_r - 1: ctr + r_r + 2]
        out = a[:-2, 1:-1] + a[2:, 1:-1]
        out += a[1:-1, :-2]
        out += a[1:-1, 2:]
        g = env.block(n, x1 - r_r, x1 + r_r, x2 - r_r, x2 + r_r)
        np.multiply(g, beta, out=g)
        g -= 0.5 * beta * beta
        np.exp(g, out=g)
        g *= 0.25
        if wall is not None:
            _wall_mask_apply(g, x1 - r_r, x2 - r_r, wall)
        out *= g
        buf[ctr - r_r: ctr + r_r + 1, ctr - r_r: ctr + r_r + 1] = out
        log_offset = _renorm(
            buf[ctr - r_r: ctr + r_r + 1, ctr - r_r: ctr + r_r + 1], log_offset
        )
        r_prev = r_r
        if record and n == record[0]:
            record.pop(0)
            snapshots[n] = _measure_from(buf, ctr, r_prev, (x1, x2), n, log_offset)

    meas = _measure_from(buf, ctr, r_prev, (x1, x2), t, log_offset)
    return ForwardResult(measure=meas, log_z=meas.log_z, snapshots=snapshots)


def _measure_from(buf, ctr, r, origin, n, log_offset) -> EndpointMeasure:
    view = buf[ctr - r: ctr + r + 1, ctr - r: ctr + r + 1]
    total = float(view.sum())
    if total <= 0.0:
        raise WindowError(f"endpoint sweep died at time {n}; widen the wall or window")
    box = Box(origin[0] - r, origin[0] + r, origin[1] - r, origin[1] + r)
    return EndpointMeasure(
        origin=origin,
        time=n,
        box=box,
        probs=view / total,
        log_z=math.log(total) + log_offset,
    )


def forward_endpoint(
    env: DisorderField, x, t: int, beta: float, policy: WindowPolicy
) -> EndpointMeasure:
    """mu_t(x, .); the normalization equals Z_t(x) from the backward sweep."""
    return forward_sweep(env, x, t, beta, policy).measure


class PointToPoint(NamedTuple):
    value: float          # p_n(x, y) * Z_n(x, y), the unnormalized endpoint weight
    parity_ok: bool


def point_to_point(
    env: DisorderField, x, y, n: int, beta: float, policy: WindowPolicy
) -> PointToPoint:
    """Unnormalized endpoint weight p_n(x,y) Z_n(x,y); exact 0 when unreachable."""
    d1 = abs(y[0] - x[0])
    d2 = abs(y[1] - x[1])
    if (d1 + d2 + n) % 2 != 0:
        return PointToPoint(0.0, False)
    if d1 + d2 > n:
        return PointToPoint(0.0, True)
    res = forward_sweep(env, x, n, beta, policy)
    m = res.measure
    return PointToPoint(m.prob(y) * math.exp(m.log_z), True)


def phi_field(
    env: DisorderField,
    N: int,
    beta_hat: float,
    grid,
    policy: Optional[WindowPolicy] = None,
) -> dict:
    """Rescaled field phi_N(x) = sqrt(log N) log Z_N([x sqrt(N)]) on macroscopic points.

    [.] truncates coordinatewise toward zero, so the sup over [-1,1]^2 equals
    the max over the lattice box of radius floor(sqrt(N)).
    """
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    from .walk import beta_N as _beta_N

    beta = _beta_N(beta_hat, N)
    pol = policy if policy is not None else WindowPolicy(N)
    root = math.sqrt(N)
    targets = {tuple(p): (int(p[0] * root), int(p[1] * root)) for p in grid}
    if not targets:
        return {}
    pts = list(targets.values())
    lo1 = min(p[0] for p in pts)
    hi1 = max(p[0] for p in pts)
    lo2 = min(p[1] for p in pts)
    hi2 = max(p[1] for p in pts)
    fld = backward_sweep(env, 1, N, Box(lo1, hi1, lo2, hi2), beta, pol)
    scale = math.sqrt(math.log(N))
    return {p: scale * fld.log_at(tgt) for p, tgt in targets.items()}


# ---------------------------------------------------------------------------
# binary field dump (debugging interface)
# ---------------------------------------------------------------------------

_MAGIC = b"PXF1"
_HEADER = struct.Struct("<4sqqqqqqqd")  # magic, N, s, t, lo1, hi1, lo2, hi2, log_offset


def save_field(fld: LogWeightField, path) -> None:
    """Little-endian dump: header (N, s, t, window, log_offset), row-major float64."""
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                _MAGIC,
                fld.horizon,
                fld.time_lo,
                fld.time_hi,
                fld.box.lo1,
                fld.box.hi1,
                fld.box.lo2,
                fld.box.hi2,
                fld.log_offset,
            )
        )
        fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())


def load_field(path) -> LogWeightField:
    with open(path, "rb") as fh:
        magic, n, s, t, lo1, hi1, lo2, hi2, off = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC:
            raise ValueError(f"not a polyext field dump: {path}")
        box = Box(lo1, hi1, lo2, hi2)
        vals = np.frombuffer(fh.read(), dtype="<f8").reshape(box.shape).copy()
    return LogWeightField(box=box, values=vals, log_offset=off, time_lo=s, time_hi=t, horizon=n)
