"""Monte Carlo experiment drivers with reproducible CSV + manifest output.

Every driver takes an ExperimentConfig and returns a RunRecord holding one
row of observables per replica (ordered by replica id, independent of
thread scheduling) plus aggregate statistics.  A record fully determines
its own reproduction: master seed, effective config, and code version are
echoed into the manifest, and replica j always uses the derived seed
replica_seed(seed, j).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import __version__
from .env import DisorderField, omega_block, replica_seed
from .multiscale import ratio_W_tilde_all, schedule
from .oracles import ReplicaConfig, exact_joint_moment, mc_joint_moment
from .polymer import Box, BudgetError, WindowPolicy, backward_sweep, forward_sweep
from .stats import ks_distance, linear_fit, normal_cdf
from .theory import lambda_sq, sigma_profile, simpson_quad
from .walk import beta_N

EXPERIMENT_KINDS = (
    "extremes",
    "gaussian-limit",
    "moment-identity",
    "lower-tail",
    "brw",
    "ew-cov",
    "multiscale",
    "domination",
    "simulate",
)

FULL_BOX_N_CAP = 4096      # largest N with every start in Lambda_sqrt(N)
STRIDED_N_CAP = 16384
BRW_LEAF_CAP = 2**22


@dataclass
class ExperimentConfig:
    kind: str = "simulate"
    N: int = 1024
    beta_hat: float = 0.5
    M: int = 8
    replicas: int = 100
    seed: int = 1
    out: str = ""
    threads: int = 1
    window_mode: str = "certified"   # "certified" | "stat"
    window_c: float = 1.0
    window_kappa: float = 4.0
    wall_mode: str = "start"         # wall centering for truncated ratios
    stride: int = 1                  # extremes start-grid stride
    grid_h: float = 0.05             # ew-cov resolution
    psi: str = "gauss"               # ew-cov test function
    t_points: int = 12               # lower-tail grid size
    depth: int = 20                  # brw depth n
    branching: int = 2               # brw branching b
    profile: str = "const"           # brw edge-std profile: const|increasing|zero
    profile_beta: float = 0.9
    dom_L: int = 4
    dom_delta: float = 0.125
    dom_x_samples: int = 3

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; valid: {EXPERIMENT_KINDS}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        if not 0.0 < self.beta_hat < 1.0:
            raise ValueError(f"beta_hat must lie in (0, 1), got {self.beta_hat}")
        if self.N < 4:
            raise ValueError(f"N must be >= 4, got {self.N}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.wall_mode not in ("start", "origin"):
            raise ValueError(f"wall_mode must be 'start' or 'origin', got {self.wall_mode!r}")
        if self.window_mode not in ("certified", "stat"):
            raise ValueError(f"window_mode must be 'certified' or 'stat', got {self.window_mode!r}")

    def policy(self) -> WindowPolicy:
        return WindowPolicy(self.N, mode=self.window_mode, c=self.window_c, kappa=self.window_kappa)


@dataclass
class RunRecord:
    experiment: str
    config: dict
    columns: list
    rows: list                 # one dict per replica, ascending replica_id
    aggregates: dict
    wall_clock: float
    code_version: str = __version__

    def write(self, out_path: str) -> None:
        """CSV (one row per replica) plus JSON manifest, both written atomically."""
        if not out_path:
            raise ValueError("no output path configured")
        base = ["experiment", "N", "beta_hat", "M", "seed", "replica_id"]
        header = base + self.columns
        meta = {
            "experiment": self.experiment,
            "N": self.config.get("N"),
            "beta_hat": self.config.get("beta_hat"),
            "M": self.config.get("M"),
            "seed": self.config.get("seed"),
        }
        lines = []
        for row in self.rows:
            rec = dict(meta)
            rec.update(row)
            lines.append([_csv_cell(rec.get(k)) for k in header])
        _atomic_write_text(
            out_path,
            "\n".join([",".join(header)] + [",".join(cells) for cells in lines]) + "\n",
        )
        manifest = {
            "schema_version": 1,
            "experiment": self.experiment,
            "config": self.config,
            "aggregates": self.aggregates,
            "wall_clock_s": round(self.wall_clock, 3),
            "code_version": self.code_version,
            "csv": os.path.basename(out_path),
            "csv_columns": header,
        }
        _atomic_write_text(out_path + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _atomic_write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-polyext-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parallel_rows(worker: Callable[[int], dict], replicas: int, threads: int) -> list:
    """Map replica ids through worker; result order is ascending id regardless
    of scheduling, so aggregation and CSV bytes are thread-count invariant."""
    if threads <= 1:
        rows = [worker(j) for j in range(replicas)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(worker, range(replicas)))
    for j, row in enumerate(rows):
        row["replica_id"] = j
    return rows


# ---------------------------------------------------------------------------
# experiment drivers
# ---------------------------------------------------------------------------

def run_extremes(cfg: ExperimentConfig) -> RunRecord:
    """Per replica: one backward sweep over Lambda_sqrt(N) gives log Z_N(x) at
    every start; records m_N = max_x log Z_N(x) / sqrt(log N) (= phi*_N / log N),
    the argmax, and the per-band profile log W_k at the argmax."""
    t0 = time.time()
    root = int(math.isqrt(cfg.N))
    if cfg.stride == 1 and cfg.N > FULL_BOX_N_CAP:
        raise BudgetError(
            f"full-box extremes capped at N = {FULL_BOX_N_CAP}; "
            f"use stride >= {max(2, cfg.N // FULL_BOX_N_CAP)} for N = {cfg.N}"
        )
    if cfg.N > STRIDED_N_CAP:
        raise BudgetError(f"extremes capped at N = {STRIDED_N_CAP}")
    beta = beta_N(cfg.beta_hat, cfg.N)
    pol = cfg.policy()
    sched = schedule(cfg.N, cfg.M)
    box = Box(-root, root, -root, root)
    sqrt_log = math.sqrt(math.log(cfg.N))

    def worker(j: int) -> dict:
        env = DisorderField(replica_seed(cfg.seed, j))
        fld = backward_sweep(env, 1, cfg.N, box, beta, pol)
        logs = fld.logs()
        if cfg.stride > 1:
            logs = logs[:: cfg.stride, :: cfg.stride]
        idx = np.unravel_index(np.argmax(logs), logs.shape)
        x1 = box.lo1 + int(idx[0]) * cfg.stride
        x2 = box.lo2 + int(idx[1]) * cfg.stride
        logz_max = float(logs[idx])
        row = {
            "m_n": logz_max / sqrt_log,
            "argmax1": x1,
            "argmax2": x2,
            "logz_max": logz_max,
            "logz0": fld.log_at((0, 0)),
        }
        res = forward_sweep(env, (x1, x2), cfg.N, beta, pol, record_times=sched.t[1:-1])
        lz = [0.0] + [res.snapshots[t].log_z for t in sched.t[1:-1]] + [res.log_z]
        for k in range(1, cfg.M + 1):
            row[f"w_{k}"] = lz[k] - lz[k - 1]
        return row

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    m = np.array([r["m_n"] for r in rows])
    agg = {
        "m_n_mean": float(m.mean()),
        "m_n_stderr": float(m.std(ddof=1) / math.sqrt(len(m))) if len(m) > 1 else 0.0,
        "m_n_max": float(m.max()),
        "sqrt_2lambda2": math.sqrt(2 * lambda_sq(cfg.beta_hat)),
    }
    cols = ["m_n", "argmax1", "argmax2", "logz_max", "logz0"] + [f"w_{k}" for k in range(1, cfg.M + 1)]
    return RunRecord("extremes", asdict(cfg), cols, rows, agg, time.time() - t0)


def run_gaussian_limit(cfg: ExperimentConfig) -> RunRecord:
    """MC sample of log Z_N(0): mean, variance, control-variate mean (using
    Z - 1, whose expectation is exactly 0), KS distance to N(-l^2/2, l^2)."""
    t0 = time.time()
    beta = beta_N(cfg.beta_hat, cfg.N)
    pol = cfg.policy()

    def worker(j: int) -> dict:
        env = DisorderField(replica_seed(cfg.seed, j))
        res = forward_sweep(env, (0, 0), cfg.N, beta, pol)
        return {"logz0": res.log_z, "z0": math.exp(res.log_z)}

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    lz = np.array([r["logz0"] for r in rows])
    z = np.array([r["z0"] for r in rows])
    l2 = lambda_sq(cfg.beta_hat)
    if len(lz) > 1 and float(np.var(z)) > 0:
        c_hat = float(np.cov(lz, z)[0, 1] / np.var(z))
    else:
        c_hat = 0.0
    cv = lz - c_hat * (z - 1.0)
    agg = {
        "mean": float(lz.mean()),
        "var": float(lz.var(ddof=1)) if len(lz) > 1 else 0.0,
        "cv_mean": float(cv.mean()),
        "cv_stderr": float(cv.std(ddof=1) / math.sqrt(len(cv))) if len(cv) > 1 else 0.0,
        "cv_coefficient": c_hat,
        "target_mean": -l2 / 2.0,
        "lambda_sq": l2,
        "ks_to_limit": ks_distance(lz, lambda s: normal_cdf(s, -l2 / 2.0, math.sqrt(l2))),
    }
    return RunRecord("gaussian-limit", asdict(cfg), ["logz0", "z0"], rows, agg, time.time() - t0)


def run_lower_tail(cfg: ExperimentConfig) -> RunRecord:
    """Empirical log P(Z_N <= 1/t) against (log t)^2 on a geometric t-grid."""
    t0 = time.time()
    beta = beta_N(cfg.beta_hat, cfg.N)
    pol = cfg.policy()

    def worker(j: int) -> dict:
        env = DisorderField(replica_seed(cfg.seed, j))
        res = forward_sweep(env, (0, 0), cfg.N, beta, pol)
        return {"logz0": res.log_z}

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    lz = np.array([r["logz0"] for r in rows])
    log_t = np.linspace(0.25, max(0.5, -lz.min() * 0.9), cfg.t_points)
    counts = np.array([(lz <= -s).sum() for s in log_t], dtype=np.int64)
    phat = counts / len(lz)
    usable = phat > 0
    agg: dict = {
        "t_grid_log": [float(s) for s in log_t],
        "tail_prob": [float(p) for p in phat],
        "events": [int(c) for c in counts],
        "degenerate": bool(counts.sum() == 0),
        "monotone_nonincreasing": bool(np.all(np.diff(phat) <= 1e-15)),
    }
    if usable.sum() >= 3:
        slope, intercept, r2 = linear_fit(log_t[usable] ** 2, np.log(phat[usable]))
        agg.update({"slope": slope, "intercept": intercept, "r_squared": r2})
    else:
        agg.update({"slope": None, "intercept": None, "r_squared": None})
        agg["suggestion"] = f"insufficient tail events; rerun with replicas >= {4 * cfg.replicas}"
    return RunRecord("lower-tail", asdict(cfg), ["logz0"], rows, agg, time.time() - t0)


def default_moment_battery(beta_hat: float, N_ref: int = 64) -> list:
    """Twelve-plus small replica configurations with enumerable exact values."""
    b1 = beta_N(beta_hat, 1)          # = 2 beta_hat, since R_1 = 1/4
    bN = beta_N(beta_hat, N_ref)
    battery = [
        ReplicaConfig(2, ((0, 0), (0, 0)), 1, 1, b1),
        ReplicaConfig(2, ((0, 0), (0, 0)), 1, 2, b1),
        ReplicaConfig(2, ((0, 0), (0, 0)), 1, 3, bN),
        ReplicaConfig(2, ((0, 0), (1, 1)), 1, 2, b1),
        ReplicaConfig(2, ((0, 0), (2, 0)), 1, 2, b1),
        ReplicaConfig(2, ((0, 0), (4, 0)), 1, 1, b1),   # disjoint supports: exact 1
        ReplicaConfig(2, ((0, 0), (0, 0)), 2, 3, b1),   # shifted horizon
        ReplicaConfig(2, ((0, 0), (0, 0)), 1, 6, bN),
        ReplicaConfig(3, ((0, 0), (0, 0), (0, 0)), 1, 2, bN),
        ReplicaConfig(3, ((0, 0), (1, 1), (2, 0)), 1, 2, bN),
        ReplicaConfig(4, ((0, 0),) * 4, 1, 2, bN),
        ReplicaConfig(3, ((0, 0), (0, 0), (0, 0)), 1, 3, bN),
        ReplicaConfig(2, ((1, 0), (0, 1)), 1, 4, bN),
    ]
    return battery


def run_moment_identity(cfg: ExperimentConfig) -> RunRecord:
    """Joint-moment table, one row per (configuration, method).

    Methods: "enumeration" and "dp" where applicable (exact routes), "mc"
    for the disorder average; mc rows carry a z-score against the exact
    reference.  Pass iff every |z| <= 4.
    """
    t0 = time.time()
    battery = default_moment_battery(cfg.beta_hat)
    rows = []
    zmax = 0.0
    rid = 0
    for i, rc in enumerate(battery):
        base = {
            "config_id": i,
            "q": rc.q,
            "s": rc.s,
            "t": rc.t,
            "beta": rc.beta,
            "starts": "|".join(f"{a},{b}" for a, b in rc.starts),
        }
        methods = []
        if rc.q * rc.span <= 12:
            methods.append(("enumeration", exact_joint_moment(rc, "enum"), 0.0))
        if rc.q == 2:
            methods.append(("dp", exact_joint_moment(rc, "dp"), 0.0))
        exact = methods[0][1]
        mc = mc_joint_moment(rc, cfg.replicas, replica_seed(cfg.seed, i))
        methods.append(("mc", mc.estimate, mc.stderr))
        for method, value, stderr in methods:
            z = 0.0
            if method == "mc" and stderr > 0:
                z = (value - exact) / stderr
                zmax = max(zmax, abs(z))
            rows.append(
                dict(base, replica_id=rid, method=method, value=value, stderr=stderr, z_score=z)
            )
            rid += 1
    agg = {"configs": len(battery), "max_abs_z": zmax, "pass": bool(zmax <= 4.0)}
    cols = ["config_id", "q", "s", "t", "beta", "starts", "method", "value", "stderr", "z_score"]
    return RunRecord("moment-identity", asdict(cfg), cols, rows, agg, time.time() - t0)


def _brw_sigma(cfg: ExperimentConfig) -> Callable[[float], float]:
    if cfg.profile == "const":
        return lambda u: 1.0
    if cfg.profile == "zero":
        return lambda u: 0.0
    if cfg.profile == "increasing":
        return lambda u: sigma_profile(u, cfg.profile_beta)
    raise ValueError(f"unknown brw profile {cfg.profile!r}")


def run_brw(cfg: ExperimentConfig) -> RunRecord:
    """Branching random walk with depth-dependent edge std sigma(j/n).

    Exact level-array simulation (b^n leaves); edge noise is drawn from the
    counter-based field keyed by (level, node id), so replicas reproduce
    bit-identically.  Records the maximal leaf value M_n; aggregates compare
    M_n/n against v_inc = sqrt(2 log b) int sigma and
    v_hom = sqrt(2 log b int sigma^2).
    """
    t0 = time.time()
    n, b = cfg.depth, cfg.branching
    if b < 2:
        raise ValueError(f"branching must be >= 2, got {b}")
    if b**n > BRW_LEAF_CAP:
        raise BudgetError(f"b^n = {b**n} leaves exceeds cap {BRW_LEAF_CAP}")
    sig = _brw_sigma(cfg)
    sig_j = np.array([sig(j / n) for j in range(1, n + 1)])

    def worker(j: int) -> dict:
        seed = replica_seed(cfg.seed, j)
        vals = np.zeros(1)
        for lvl in range(1, n + 1):
            vals = np.repeat(vals, b)
            if sig_j[lvl - 1] > 0.0:
                g = omega_block(seed, lvl, 0, 0, 0, len(vals) - 1)[0]
                vals = vals + sig_j[lvl - 1] * g
        return {"max_leaf": float(vals.max())}

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    m = np.array([r["max_leaf"] for r in rows])
    log_b = math.log(b)
    int_sigma = simpson_quad(sig, 0.0, 1.0, 1e-12)
    int_sigma2 = simpson_quad(lambda u: sig(u) ** 2, 0.0, 1.0, 1e-12)
    v_inc = math.sqrt(2.0 * log_b) * int_sigma
    v_hom = math.sqrt(2.0 * log_b * int_sigma2)
    agg = {
        "speed_mean": float(m.mean() / n),
        "speed_stderr": float(m.std(ddof=1) / math.sqrt(len(m)) / n) if len(m) > 1 else 0.0,
        "v_inc": v_inc,
        "v_hom": v_hom,
    }
    return RunRecord("brw", asdict(cfg), ["max_leaf"], rows, agg, time.time() - t0)


def _psi_grid(cfg: ExperimentConfig):
    h = cfg.grid_h
    if not 0.0 < h <= 0.5:
        raise ValueError(f"grid_h must lie in (0, 0.5], got {h}")
    n = int(round(2.0 / h))
    centers = -1.0 + (np.arange(n) + 0.5) * h
    xx, yy = np.meshgrid(centers, centers, indexing="ij")
    if cfg.psi == "gauss":
        psi = np.exp(-(xx**2 + yy**2))
    elif cfg.psi == "zero":
        psi = np.zeros_like(xx)
    else:
        raise ValueError(f"unknown test function {cfg.psi!r}")
    return centers, psi


def run_ew_cov(cfg: ExperimentConfig) -> RunRecord:
    """MC variance of h^2 sum_x psi(x) phi_N(x) against the EW prediction.

    Recentring G_N = phi_N - mean phi_N(0) shifts the statistic by a constant
    and leaves its variance unchanged, so the variance is computed directly.
    """
    from .theory import ew_covariance

    t0 = time.time()
    beta = beta_N(cfg.beta_hat, cfg.N)
    pol = cfg.policy()
    centers, psi = _psi_grid(cfg)
    root = math.sqrt(cfg.N)
    targets1 = np.array([int(c * root) for c in centers])
    box = Box(int(targets1.min()), int(targets1.max()), int(targets1.min()), int(targets1.max()))
    sqrt_log = math.sqrt(math.log(cfg.N))
    h = cfg.grid_h

    def worker(j: int) -> dict:
        env = DisorderField(replica_seed(cfg.seed, j))
        if not psi.any():
            return {"s_psi": 0.0}
        fld = backward_sweep(env, 1, cfg.N, box, beta, pol)
        logs = fld.logs()
        i1 = targets1 - box.lo1
        phi = sqrt_log * logs[np.ix_(i1, i1)]
        return {"s_psi": float(h * h * np.sum(psi * phi))}

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    s = np.array([r["s_psi"] for r in rows])
    theory_var = (
        cfg.beta_hat**2 / (1.0 - cfg.beta_hat**2) * ew_covariance(psi, cfg.grid_h)
    )
    mc_var = float(s.var(ddof=1)) if len(s) > 1 else 0.0
    agg = {
        "mc_var": mc_var,
        "theory_var": theory_var,
        "ratio": (mc_var / theory_var) if theory_var > 0 else None,
    }
    return RunRecord("ew-cov", asdict(cfg), ["s_psi"], rows, agg, time.time() - t0)


def run_multiscale(cfg: ExperimentConfig) -> RunRecord:
    """Truncation diagnostic at x = 0: band ratios W_k, truncated ratios
    W-tilde_k, the telescoping defect |log Z_N - sum log W-tilde_k|, and the
    worst ratio W_k / W-tilde_k."""
    t0 = time.time()
    sched = schedule(cfg.N, cfg.M)
    pol = cfg.policy()

    def worker(j: int) -> dict:
        env = DisorderField(replica_seed(cfg.seed, j))
        prof = ratio_W_tilde_all(env, (0, 0), sched, cfg.beta_hat, cfg.wall_mode, pol)
        row = {
            "logz": prof.log_z,
            "defect": abs(prof.log_z - float(prof.log_w_tilde.sum())),
            "max_log_ratio": float(np.max(prof.log_w - prof.log_w_tilde)),
        }
        for k in range(1, cfg.M + 1):
            row[f"w_{k}"] = float(prof.log_w[k - 1])
            row[f"wt_{k}"] = float(prof.log_w_tilde[k - 1])
        return row

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    defects = np.array([r["defect"] for r in rows])
    ratios = np.array([r["max_log_ratio"] for r in rows])
    agg = {
        "defect_max": float(defects.max()),
        "defect_threshold": cfg.M * math.log(2.0),
        "defect_exceed_count": int((defects >= cfg.M * math.log(2.0)).sum()),
        "ratio_ge_2_count": int((ratios >= math.log(2.0)).sum()),
        "monotone_w_ge_wt": bool(np.all(ratios >= -1e-9)),
    }
    cols = ["logz", "defect", "max_log_ratio"]
    cols += [f"w_{k}" for k in range(1, cfg.M + 1)] + [f"wt_{k}" for k in range(1, cfg.M + 1)]
    return RunRecord("multiscale", asdict(cfg), cols, rows, agg, time.time() - t0)


def run_domination(cfg: ExperimentConfig) -> RunRecord:
    """Gaussian-domination diagnostic across replicas (event frequency)."""
    from .multiscale import domination_check

    t0 = time.time()
    sched = schedule(cfg.N, cfg.M)
    pol = cfg.policy()

    def worker(j: int) -> dict:
        env = DisorderField(replica_seed(cfg.seed, j))
        rep = domination_check(
            env, sched, cfg.dom_L, cfg.dom_x_samples, cfg.dom_delta, cfg.beta_hat,
            rng_seed=j, policy=pol,
        )
        return {
            "event_holds": int(rep.event_holds),
            "worst_ratio": rep.worst_ratio,
            "threshold": rep.threshold,
        }

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    holds = np.array([r["event_holds"] for r in rows])
    agg = {"event_frequency": float(holds.mean()), "threshold": rows[0]["threshold"]}
    return RunRecord("domination", asdict(cfg), ["event_holds", "worst_ratio", "threshold"], rows, agg, time.time() - t0)


def run_simulate(cfg: ExperimentConfig) -> RunRecord:
    """Basic polymer run: log Z_N(0) per replica (forward sweep)."""
    t0 = time.time()
    beta = beta_N(cfg.beta_hat, cfg.N)
    pol = cfg.policy()

    def worker(j: int) -> dict:
        env = DisorderField(replica_seed(cfg.seed, j))
        res = forward_sweep(env, (0, 0), cfg.N, beta, pol)
        return {"logz0": res.log_z}

    rows = _parallel_rows(worker, cfg.replicas, cfg.threads)
    lz = np.array([r["logz0"] for r in rows])
    agg = {
        "mean": float(lz.mean()),
        "var": float(lz.var(ddof=1)) if len(lz) > 1 else 0.0,
        "beta_N": beta,
    }
    return RunRecord("simulate", asdict(cfg), ["logz0"], rows, agg, time.time() - t0)


RUNNERS = {
    "extremes": run_extremes,
    "gaussian-limit": run_gaussian_limit,
    "moment-identity": run_moment_identity,
    "lower-tail": run_lower_tail,
    "brw": run_brw,
    "ew-cov": run_ew_cov,
    "multiscale": run_multiscale,
    "domination": run_domination,
    "simulate": run_simulate,
}


def run(cfg: ExperimentConfig) -> RunRecord:
    rec = RUNNERS[cfg.kind](cfg)
    if cfg.out:
        rec.write(cfg.out)
    return rec
