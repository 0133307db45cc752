"""Exact small-scale ground truth, independent of the polymer sweeps.

Three routes to joint moments of partition functions:
  * brute-force enumeration of all 4^(q * span) joint step sequences,
  * difference-walk DP for two replicas (the difference of two SRWs steps
    with the two-step kernel; the collision weight e^(beta^2) accrues at the
    origin), exact up to a certified window,
  * Monte Carlo over the disorder, which must bracket the exact values.

Plus the collision-tilted transfer operator on a torus: matrix-free power
iteration for its Perron eigenvalue and eigenvector, and the point-to-point
moment scaling table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .env import DisorderField, replica_seed
from .polymer import BudgetError
from .walk import beta_N, kernel, overlap_R

ENUM_MAX_STEPS = 12          # enumeration cap: q * (t - s + 1) <= 12
DIFF_WALK_KAPPA = 5.5        # window radius kappa * sqrt(2 * span), doubling-certified

_MOVES = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)


@dataclass(frozen=True)
class ReplicaConfig:
    """q independent walks on a common horizon [s, t] with tilt beta."""

    q: int
    starts: tuple
    s: int
    t: int
    beta: float

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"need q >= 2 replicas, got {self.q}")
        if len(self.starts) != self.q:
            raise ValueError(f"need {self.q} starting points, got {len(self.starts)}")
        if self.s > self.t:
            raise ValueError(f"need s <= t, got s={self.s} t={self.t}")

    @property
    def span(self) -> int:
        return self.t - self.s + 1


def exact_joint_moment(cfg: ReplicaConfig, mode: str = "auto") -> float:
    """E[prod_i Z_{s,t}(x_i)] = E^(x q walks)[exp(beta^2 * pair collisions)].

    mode="enum" enumerates all 4^(q*span) joint step sequences (q*span <= 12);
    mode="dp" uses the exact difference-walk DP (q = 2 only, any horizon);
    mode="auto" picks dp for q == 2 else enum.
    """
    if mode == "auto":
        mode = "dp" if cfg.q == 2 else "enum"
    if mode == "dp":
        if cfg.q != 2:
            raise BudgetError("difference-walk DP handles exactly q = 2 replicas")
        d0 = (cfg.starts[0][0] - cfg.starts[1][0], cfg.starts[0][1] - cfg.starts[1][1])
        return collision_mgf(cfg.span, cfg.beta**2, start=d0)
    if mode == "enum":
        return _enumerate_joint(cfg)
    raise ValueError(f"unknown mode {mode!r}")


def _enumerate_joint(cfg: ReplicaConfig) -> float:
    n_steps = cfg.q * cfg.span
    if n_steps > ENUM_MAX_STEPS:
        raise BudgetError(
            f"enumeration needs q*(t-s+1) <= {ENUM_MAX_STEPS}, got {n_steps}"
        )
    total_paths = 4**n_steps
    w = math.exp(cfg.beta**2)
    acc = 0.0
    chunk = 1 << 20
    starts = np.asarray(cfg.starts, dtype=np.int64)  # (q, 2)
    for lo in range(0, total_paths, chunk):
        idx = np.arange(lo, min(lo + chunk, total_paths), dtype=np.int64)
        # decode base-4 digits: step of walk i at time j is digit i*span + j
        digits = (idx[:, None] >> (2 * np.arange(n_steps, dtype=np.int64))) & 3
        moves = _MOVES[digits]                        # (B, n_steps, 2)
        moves = moves.reshape(len(idx), cfg.q, cfg.span, 2)
        pos = np.cumsum(moves, axis=2) + starts[None, :, None, :]
        coll = np.zeros(len(idx), dtype=np.int64)
        for i in range(cfg.q):
            for j in range(i + 1, cfg.q):
                coll += np.sum(np.all(pos[:, i] == pos[:, j], axis=-1), axis=-1)
        acc += float(np.sum(w**coll.astype(np.float64)))
    return acc / total_paths


def collision_mgf(
    span: int,
    beta_sq: float,
    start=(0, 0),
    kappa: float = DIFF_WALK_KAPPA,
) -> float:
    """E[exp(beta_sq * #{n <= span : D_n = 0})] for the difference walk D.

    D steps with the two-step SRW kernel (difference of two independent SRW
    steps); D_0 = start.  Exact up to the window truncation at radius
    ceil(kappa * sqrt(2 * span)) + |start|, certified by doubling.
    """
    if span < 1:
        raise ValueError(f"need span >= 1, got {span}")
    s1, s2 = int(start[0]), int(start[1])
    r = int(math.ceil(kappa * math.sqrt(2.0 * span))) + max(abs(s1), abs(s2))
    size = 2 * r + 1
    f = np.zeros((size, size))
    f[r + s1, r + s2] = 1.0
    w0 = math.exp(beta_sq)
    log_off = 0.0
    for _ in range(span):
        t = np.zeros_like(f)
        t[1:-1, 1:-1] = 0.25 * (f[:-2, 1:-1] + f[2:, 1:-1] + f[1:-1, :-2] + f[1:-1, 2:])
        f = np.zeros_like(f)
        f[1:-1, 1:-1] = 0.25 * (t[:-2, 1:-1] + t[2:, 1:-1] + t[1:-1, :-2] + t[1:-1, 2:])
        f[r, r] *= w0
        m = float(f.max())
        if m > 0 and not (1e-28 < m < 1e28):
            f /= m
            log_off += math.log(m)
    return float(f.sum()) * math.exp(log_off)


class MonteCarloMoment(NamedTuple):
    estimate: float
    stderr: float
    replicas: int


def mc_joint_moment(
    cfg: ReplicaConfig, replicas: int, seed: int, chunk: int = 4096
) -> MonteCarloMoment:
    """Disorder average of prod_i Z_{s,t}(x_i) over i.i.d. environments.

    Each replica shares one environment across the q factors (that is the
    point of the identity); the tiny forward sweeps are batched over
    replicas.  Must bracket exact_joint_moment within a few standard errors.
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    span = cfg.span
    if cfg.beta == 0.0:
        return MonteCarloMoment(estimate=1.0, stderr=0.0, replicas=replicas)
    seeds_all = np.array(
        [replica_seed(seed, j) for j in range(replicas)], dtype=np.uint64
    )
    from .env import omega_block

    prods = np.empty(replicas)
    c = 0.5 * cfg.beta * cfg.beta
    for lo in range(0, replicas, chunk):
        seeds = seeds_all[lo: lo + chunk]
        batch = np.ones(len(seeds))
        for (x1, x2) in cfg.starts:
            # batched forward sweep over the full reachable cone (exact:
            # the grid radius equals the span, so no mass can leave it)
            v = np.zeros((len(seeds), 2 * span + 1, 2 * span + 1))
            v[:, span, span] = 1.0
            for n in range(1, span + 1):
                out = np.zeros_like(v)
                out[:, 1:, :] += 0.25 * v[:, :-1, :]
                out[:, :-1, :] += 0.25 * v[:, 1:, :]
                out[:, :, 1:] += 0.25 * v[:, :, :-1]
                out[:, :, :-1] += 0.25 * v[:, :, 1:]
                g = omega_block(
                    seeds,
                    cfg.s - 1 + n,
                    x1 - span,
                    x1 + span,
                    x2 - span,
                    x2 + span,
                )
                out *= np.exp(cfg.beta * g - c)
                v = out
            batch *= v.sum(axis=(1, 2))
        prods[lo: lo + len(seeds)] = batch
    est = float(prods.mean())
    se = float(prods.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    return MonteCarloMoment(estimate=est, stderr=se, replicas=replicas)


class SecondMomentPoint(NamedTuple):
    N: int
    value: float           # exact E[Z_N^2]
    limit: float           # 1 / (1 - beta_hat^2)
    doubling_diff: float   # |value - value at twice the window|


def second_moment_curve(
    beta_hat: float, Ns: Sequence[int], certify: bool = True
) -> list[SecondMomentPoint]:
    """Exact E[Z_N^2] = E[e^(beta_N^2 L_N)] along Ns, with window certification."""
    if not 0.0 < beta_hat < 1.0:
        raise ValueError(f"beta_hat must lie in (0, 1), got {beta_hat}")
    limit = 1.0 / (1.0 - beta_hat * beta_hat)
    out = []
    for N in Ns:
        b2 = beta_hat**2 / overlap_R(N)
        v = collision_mgf(N, b2)
        d = abs(v - collision_mgf(N, b2, kappa=2 * DIFF_WALK_KAPPA)) if certify else 0.0
        out.append(SecondMomentPoint(N=N, value=v, limit=limit, doubling_diff=d))
    return out


# ---------------------------------------------------------------------------
# collision-tilted transfer operator on the torus (Perron route)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusOperator:
    """Q(x, y) = p(x, y) exp(beta^2 V(y)) for p replicas of the SRW on a torus.

    V counts coinciding replica pairs; applied matrix-free.  p = 1 keeps the
    plain stochastic kernel (V = 0); p = 2 acts on side^4 pair states.
    """

    side: int
    p: int
    beta: float

    def __post_init__(self):
        if self.side < 2:
            raise ValueError(f"torus side must be >= 2, got {self.side}")
        if self.p not in (1, 2):
            raise ValueError(f"replica count p must be 1 or 2, got {self.p}")
        if self.p == 2 and self.side > 16:
            raise BudgetError(f"p = 2 torus limited to side <= 16, got {self.side}")

    @property
    def shape(self):
        return (self.side, self.side) if self.p == 1 else (self.side,) * 4

    def collision_weight(self) -> Optional[np.ndarray]:
        if self.p == 1:
            return None
        s = self.side
        w = np.ones((s, s, s, s))
        i = np.arange(s)
        same1 = i[:, None, None, None] == i[None, None, :, None]
        same2 = i[None, :, None, None] == i[None, None, None, :]
        w[same1 & same2] = math.exp(self.beta**2)
        return w

    def apply(self, v: np.ndarray, weight: Optional[np.ndarray] = None) -> np.ndarray:
        """One application of Q: average over each replica's 4 torus moves,
        then tilt by the collision weight at the target configuration."""
        if self.p == 1:
            out = 0.25 * (
                np.roll(v, 1, 0) + np.roll(v, -1, 0) + np.roll(v, 1, 1) + np.roll(v, -1, 1)
            )
            return out
        out = 0.25 * (
            np.roll(v, 1, 0) + np.roll(v, -1, 0) + np.roll(v, 1, 1) + np.roll(v, -1, 1)
        )
        out = 0.25 * (
            np.roll(out, 1, 2) + np.roll(out, -1, 2) + np.roll(out, 1, 3) + np.roll(out, -1, 3)
        )
        if weight is None:
            weight = self.collision_weight()
        return out * weight


def torus_side(N: int, K: int = 4) -> int:
    """Paper-convention torus side 4 * floor(K sqrt(N)) for horizon N."""
    return 4 * int(math.floor(K * math.sqrt(N)))


class PerronResult(NamedTuple):
    eigenvalue: float
    phi: np.ndarray
    iterations: int
    residual: float        # ||Q phi - lambda phi||_inf / ||phi||_inf on the sector
    support: np.ndarray    # boolean mask of the irreducible sector carrying phi


def _collision_sector(op: TorusOperator) -> np.ndarray:
    """States reachable from coinciding replicas: even total coordinate parity.

    Each step flips every replica's parity, so total parity mod 2 is
    conserved and the pair operator splits into two invariant sectors; all
    collisions (and the top eigenvalue) live in the even one.
    """
    if op.p == 1:
        return np.ones(op.shape, dtype=bool)
    i = np.arange(op.side)
    par = (
        i[:, None, None, None] + i[None, :, None, None]
        + i[None, None, :, None] + i[None, None, None, :]
    ) % 2
    return par == 0


def perron(op: TorusOperator, tol: float = 1e-12, max_iter: int = 200000) -> PerronResult:
    """Top eigenvalue and positive eigenvector of Q by damped power iteration.

    The iteration runs on the collision sector (Q is block-invariant there)
    with the aperiodic damping v <- Q v + v, which defeats the period-2
    parity alternation of the walk; eigenvalue estimates come from the
    Rayleigh quotient of Q itself in the exp(beta^2 V)-weighted inner
    product, where Q is self-adjoint.  Stops when the quotient drift and the
    sup-norm residual both fall below tol.
    """
    weight = op.collision_weight()
    support = _collision_sector(op)
    v = support.astype(np.float64)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    lam = 1.0
    resid = math.inf
    iters = 0
    w_ip = weight if weight is not None else 1.0
    for iters in range(1, max_iter + 1):
        qv = op.apply(v, weight)
        lam = float(np.sum(v * qv * w_ip) / np.sum(v * v * w_ip))
        resid = float(np.max(np.abs(qv - lam * v)) / np.max(np.abs(v)))
        if abs(lam - lam_prev) < tol * max(1.0, abs(lam)) and resid < tol:
            break
        lam_prev = lam
        v = qv + v
        v /= np.linalg.norm(v)
    else:
        raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")
    phi = v / np.max(v)
    return PerronResult(
        eigenvalue=lam, phi=phi, iterations=iters, residual=resid, support=support
    )


def reversibility_residual(
    op: TorusOperator, result: PerronResult, n_samples: int = 256, seed: int = 0
) -> float:
    """Residual of the reversible-stochastic structure of q under m.

    q(x,y) = Q(x,y) phi(y) / (lambda phi(x)) and m(y) = phi(y)^2 exp(beta^2 V(y)).
    Returns the max of the detailed-balance defect |m q(x,y) - m q(y,x)| / m q
    over sampled transitions and the row-sum defect max_x |sum_y q(x,y) - 1|
    (the latter is what actually exercises Q phi = lambda phi).
    """
    rng = np.random.default_rng(seed)
    s = op.side
    phi = result.phi
    lam = result.eigenvalue
    b2 = op.beta**2
    worst = 0.0
    for _ in range(n_samples):
        if op.p == 1:
            x = (int(rng.integers(s)), int(rng.integers(s)))
            step = _MOVES[int(rng.integers(4))]
            y = ((x[0] + int(step[0])) % s, (x[1] + int(step[1])) % s)
            vx = vy = 0.0
            p_step = 0.25
        else:
            # every transition moves both replicas by one step each; sample
            # within the collision sector (phi vanishes off it)
            while True:
                x = tuple(int(rng.integers(s)) for _ in range(4))
                if result.support[x]:
                    break
            sa = _MOVES[int(rng.integers(4))]
            sb = _MOVES[int(rng.integers(4))]
            y = (
                (x[0] + int(sa[0])) % s,
                (x[1] + int(sa[1])) % s,
                (x[2] + int(sb[0])) % s,
                (x[3] + int(sb[1])) % s,
            )
            vx = 1.0 if (x[0] == x[2] and x[1] == x[3]) else 0.0
            vy = 1.0 if (y[0] == y[2] and y[1] == y[3]) else 0.0
            p_step = 1.0 / 16.0
        px, py = float(phi[x]), float(phi[y])
        mx = px * px * math.exp(b2 * vx)
        my = py * py * math.exp(b2 * vy)
        q_xy = p_step * math.exp(b2 * vy) * py / (lam * px)
        q_yx = p_step * math.exp(b2 * vx) * px / (lam * py)
        worst = max(worst, abs(mx * q_xy - my * q_yx) / max(mx * q_xy, 1e-300))
    qphi = op.apply(result.phi)
    sup = result.support
    row = np.abs(qphi[sup] / (lam * result.phi[sup]) - 1.0)
    return max(worst, float(row.max()))


# ---------------------------------------------------------------------------
# point-to-point moment scaling
# ---------------------------------------------------------------------------

class PtopRow(NamedTuple):
    N: int
    scaled_max: float      # max over sampled (x, y) of MC E[(Z p)^p] * N^p
    stderr: float
    y_used: tuple


class PtopTrend(NamedTuple):
    rows: list
    mk_statistic: int
    p_value: float         # one-sided Mann-Kendall p for an increasing trend
    bounded: bool          # no increasing trend at the 5% level


def _kernel_mode_site(N: int):
    """Parity-correct site of maximal N-step transition probability."""
    k = kernel(N)
    idx = np.unravel_index(np.argmax(k.probs), k.probs.shape)
    return (int(idx[0]) - N, int(idx[1]) - N), float(k.probs[idx])


def ptop_moment_trend(
    beta_hat: float,
    p: int,
    Ns: Sequence[int],
    replicas: int,
    seed: int,
    policy_kappa: float = 4.5,
) -> PtopTrend:
    """Monte Carlo table of N^p E[(Z_N(x,y) p_N(x,y))^p] at the kernel mode.

    p = 1 is exact (E Z = 1 pointwise, so the entry is N p_N(x, y), a local
    CLT constant); p >= 2 averages the p-th power of the forward endpoint
    weight over disorder replicas.  Boundedness = no increasing trend by a
    one-sided Mann-Kendall test at 5%.
    """
    from .polymer import WindowPolicy, forward_sweep
    from .stats import mann_kendall

    if p not in (1, 2, 3):
        raise ValueError(f"p must be in {{1, 2, 3}}, got {p}")
    rows = []
    for N in Ns:
        y, pn = _kernel_mode_site(N)
        if p == 1:
            rows.append(PtopRow(N=N, scaled_max=N * pn, stderr=0.0, y_used=y))
            continue
        b = beta_N(beta_hat, N)
        pol = WindowPolicy(N, mode="stat", kappa=policy_kappa)
        vals = np.empty(replicas)
        for j in range(replicas):
            envj = DisorderField(replica_seed(seed, j))
            res = forward_sweep(envj, (0, 0), N, b, pol)
            m = res.measure
            vals[j] = (m.prob(y) * math.exp(m.log_z)) ** p
        est = float(vals.mean()) * N**p
        se = float(vals.std(ddof=1) / math.sqrt(replicas)) * N**p
        rows.append(PtopRow(N=N, scaled_max=est, stderr=se, y_used=y))
    s_stat, p_val = mann_kendall([r.scaled_max for r in rows])
    return PtopTrend(rows=rows, mk_statistic=s_stat, p_value=p_val, bounded=p_val >= 0.05)
