"""Oracles: enumeration vs difference-walk DP vs Monte Carlo; transfer operator."""

import itertools
import math

import numpy as np
import pytest

from polyext.oracles import (
    DIFF_WALK_KAPPA,
    MonteCarloMoment,
    PerronResult,
    ReplicaConfig,
    TorusOperator,
    collision_mgf,
    exact_joint_moment,
    mc_joint_moment,
    perron,
    ptop_moment_trend,
    reversibility_residual,
    second_moment_curve,
    torus_side,
)
from polyext.polymer import BudgetError
from polyext.walk import beta_N, overlap_R


def brute_two_walk(starts, s, t, beta):
    """Direct two-walk enumeration of E[exp(beta^2 * collisions on [s, t])]."""
    moves = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    span = t - s + 1
    total = 0.0
    for pa in itertools.product(moves, repeat=span):
        xa, ya = starts[0]
        posa = []
        for m in pa:
            xa, ya = xa + m[0], ya + m[1]
            posa.append((xa, ya))
        for pb in itertools.product(moves, repeat=span):
            xb, yb = starts[1]
            coll = 0
            for i, m in enumerate(pb):
                xb, yb = xb + m[0], yb + m[1]
                coll += (xb, yb) == posa[i]
            total += math.exp(beta * beta * coll)
    return total / 16.0**span


def test_one_step_same_start_closed_form():
    # two walks from one site: collide with probability 1/4 after one step
    for beta in (0.5, 1.0, 1.7):
        cfg = ReplicaConfig(2, ((0, 0), (0, 0)), 1, 1, beta)
        want = 0.75 + 0.25 * math.exp(beta * beta)
        assert exact_joint_moment(cfg, mode="enum") == pytest.approx(want, rel=1e-14)
        assert exact_joint_moment(cfg, mode="dp") == pytest.approx(want, rel=1e-12)


def test_zero_beta_gives_one():
    for cfg in (
        ReplicaConfig(2, ((0, 0), (3, 1)), 1, 4, 0.0),
        ReplicaConfig(3, ((0, 0), (0, 0), (0, 0)), 1, 2, 0.0),
    ):
        assert exact_joint_moment(cfg) == pytest.approx(1.0, rel=1e-14)


def test_enumeration_vs_dp_cross_check():
    # q = 2, t = 2: 4^4 = 256 joint paths vs the difference-walk DP
    for beta in (0.6, 1.0):
        cfg = ReplicaConfig(2, ((0, 0), (0, 0)), 1, 2, beta)
        assert exact_joint_moment(cfg, "enum") == pytest.approx(
            exact_joint_moment(cfg, "dp"), abs=1e-12
        )


def test_enumeration_vs_nested_loop_oracle():
    for starts, s, t, beta in [
        (((0, 0), (0, 0)), 1, 2, 0.8),
        (((0, 0), (1, 1)), 1, 2, 1.1),
        (((0, 0), (2, 0)), 1, 3, 0.7),
    ]:
        cfg = ReplicaConfig(2, starts, s, t, beta)
        assert exact_joint_moment(cfg, "enum") == pytest.approx(
            brute_two_walk(starts, s, t, beta), rel=1e-12
        )
        assert exact_joint_moment(cfg, "dp") == pytest.approx(
            brute_two_walk(starts, s, t, beta), rel=1e-12
        )


def test_horizon_shift_invariance():
    # collisions over [s, t] depend only on the span for same-start replicas
    a = exact_joint_moment(ReplicaConfig(2, ((0, 0), (0, 0)), 1, 3, 0.9), "dp")
    b = exact_joint_moment(ReplicaConfig(2, ((0, 0), (0, 0)), 5, 7, 0.9), "dp")
    assert a == pytest.approx(b, rel=1e-14)


def test_enum_budget_guard():
    with pytest.raises(BudgetError):
        exact_joint_moment(ReplicaConfig(2, ((0, 0), (0, 0)), 1, 7, 0.5), "enum")
    with pytest.raises(BudgetError):
        exact_joint_moment(ReplicaConfig(3, ((0, 0),) * 3, 1, 2, 0.5), "dp")


def test_replica_config_validation():
    with pytest.raises(ValueError):
        ReplicaConfig(1, ((0, 0),), 1, 2, 0.5)
    with pytest.raises(ValueError):
        ReplicaConfig(2, ((0, 0),), 1, 2, 0.5)
    with pytest.raises(ValueError):
        ReplicaConfig(2, ((0, 0), (0, 0)), 3, 2, 0.5)


def test_disjoint_supports_give_one():
    # two starts too far to meet within the horizon: moment is exactly 1
    cfg = ReplicaConfig(2, ((0, 0), (9, 0)), 1, 3, 1.3)
    assert exact_joint_moment(cfg, "dp") == pytest.approx(1.0, rel=1e-14)


def test_mc_brackets_exact_one_step():
    beta = 1.0
    cfg = ReplicaConfig(2, ((0, 0), (0, 0)), 1, 1, beta)
    want = 0.75 + 0.25 * math.e
    mc = mc_joint_moment(cfg, replicas=100_000, seed=12)
    assert isinstance(mc, MonteCarloMoment)
    assert abs(mc.estimate - want) <= 3.0 * mc.stderr
    assert mc.stderr < 0.01


def test_mc_zero_beta_exact():
    cfg = ReplicaConfig(2, ((0, 0), (0, 0)), 1, 2, 0.0)
    mc = mc_joint_moment(cfg, replicas=100, seed=1)
    assert mc.estimate == 1.0 and mc.stderr == 0.0


def test_mc_stderr_scaling():
    # light-tailed config so the sample SD is stable: x4 replicas halves stderr
    cfg = ReplicaConfig(2, ((0, 0), (0, 0)), 1, 1, 0.5)
    a = mc_joint_moment(cfg, replicas=2000, seed=5)
    b = mc_joint_moment(cfg, replicas=8000, seed=5)
    assert b.stderr / a.stderr == pytest.approx(0.5, abs=0.12)


def test_mc_deterministic_given_seed():
    cfg = ReplicaConfig(2, ((0, 0), (1, 1)), 1, 2, 0.7)
    a = mc_joint_moment(cfg, replicas=500, seed=9)
    b = mc_joint_moment(cfg, replicas=500, seed=9)
    assert a == b


def test_second_moment_small_n_closed_form():
    # N = 1, beta_hat = 0.5: beta_1 = 1, E Z_1^2 = (3 + e)/4
    pts = second_moment_curve(0.5, [1])
    assert pts[0].value == pytest.approx((3.0 + math.e) / 4.0, rel=1e-12)
    assert pts[0].limit == pytest.approx(4.0 / 3.0, rel=1e-15)
    assert pts[0].doubling_diff < 1e-12


def test_second_moment_matches_collision_mgf():
    for N in (4, 16):
        b2 = 0.25 / overlap_R(N)
        assert second_moment_curve(0.5, [N], certify=False)[0].value == pytest.approx(
            collision_mgf(N, b2), rel=1e-14
        )


def test_second_moment_converges_toward_limit():
    pts = second_moment_curve(0.5, [16, 64, 256])
    gaps = [abs(p.value - p.limit) for p in pts]
    assert gaps[0] > gaps[1] > gaps[2]
    for p in pts:
        assert p.doubling_diff < 1e-10


def test_collision_mgf_off_origin_parity():
    # odd-parity separation: the difference walk never hits the origin
    assert collision_mgf(5, 1.0, start=(1, 0)) == pytest.approx(1.0, rel=1e-14)


# ---------------------------------------------------------------------------
# transfer operator
# ---------------------------------------------------------------------------

def test_perron_stochastic_at_zero_beta():
    for p in (1, 2):
        op = TorusOperator(side=8, p=p, beta=0.0)
        res = perron(op, tol=1e-13)
        assert res.eigenvalue == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(res.phi[res.support], 1.0, atol=1e-10)
        assert res.residual < 1e-12


def test_perron_pair_operator_properties():
    op = TorusOperator(side=8, p=2, beta=0.6)
    res = perron(op, tol=1e-12)
    assert res.eigenvalue >= 1.0
    sect = res.phi[res.support]
    assert np.all(sect > 0)
    assert res.residual < 1e-11
    # bounded eigenvector ratios on the collision sector
    assert float(sect.max() / sect.min()) < 10.0
    assert reversibility_residual(op, res, n_samples=300, seed=2) < 1e-10


def test_perron_monotone_in_beta():
    lams = []
    for beta in (0.0, 0.4, 0.8, 1.2):
        res = perron(TorusOperator(side=6, p=2, beta=beta), tol=1e-12)
        lams.append(res.eigenvalue)
    assert all(b >= a - 1e-13 for a, b in zip(lams, lams[1:]))
    assert lams[-1] > lams[0]


def test_perron_against_dense_eigensolver():
    # independent route: materialize Q for a tiny pair torus and call eigs
    side, beta = 4, 0.7
    op = TorusOperator(side=side, p=2, beta=beta)
    n = side**4
    Q = np.zeros((n, n))
    w = op.collision_weight().reshape(-1)
    idx = np.arange(n).reshape((side,) * 4)
    for a1 in range(side):
        for a2 in range(side):
            for b1 in range(side):
                for b2 in range(side):
                    row = idx[a1, a2, b1, b2]
                    for da in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        for db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                            col = idx[
                                (a1 + da[0]) % side,
                                (a2 + da[1]) % side,
                                (b1 + db[0]) % side,
                                (b2 + db[1]) % side,
                            ]
                            Q[row, col] += (1.0 / 16.0) * w[col]
    top = float(np.max(np.real(np.linalg.eigvals(Q))))
    res = perron(op, tol=1e-12)
    assert res.eigenvalue == pytest.approx(top, rel=1e-9)


def test_torus_side_convention():
    assert torus_side(64, K=4) == 4 * int(4 * 8)
    assert torus_side(100, K=2) == 4 * 20


def test_torus_operator_validation():
    with pytest.raises(ValueError):
        TorusOperator(side=1, p=1, beta=0.5)
    with pytest.raises(ValueError):
        TorusOperator(side=8, p=3, beta=0.5)
    with pytest.raises(BudgetError):
        TorusOperator(side=64, p=2, beta=0.5)


# ---------------------------------------------------------------------------
# point-to-point moment scaling
# ---------------------------------------------------------------------------

def test_ptop_p1_exact_kernel_constant():
    trend = ptop_moment_trend(0.5, 1, [64, 128, 256], replicas=1, seed=0)
    # E[Z p] = p exactly; N p_N(y*) at the mode is the local-CLT constant
    from polyext.walk import kernel

    for row in trend.rows:
        k = kernel(row.N)
        assert row.scaled_max == pytest.approx(row.N * k.prob(row.y_used), rel=1e-12)
        assert 0.3 < row.scaled_max < 3.0
    assert trend.bounded


def test_ptop_p2_no_growth_small():
    trend = ptop_moment_trend(0.4, 2, [16, 32, 64], replicas=120, seed=3)
    assert trend.p_value >= 0.0
    assert len(trend.rows) == 3
    for row in trend.rows:
        assert row.scaled_max > 0


@pytest.mark.slow
def test_three_sigma_bracket_coverage():
    # 100 repeated MC experiments: the 3-sigma bracket holds in >= 99 of them
    cfg = ReplicaConfig(2, ((0, 0), (0, 0)), 1, 2, 1.0)
    exact = exact_joint_moment(cfg, "dp")
    hits = 0
    for rep in range(100):
        mc = mc_joint_moment(cfg, replicas=20_000, seed=1000 + rep)
        hits += abs(mc.estimate - exact) <= 3 * mc.stderr
    assert hits >= 99


@pytest.mark.slow
def test_appendix_regression_log_second_moment():
    # regression value pinned from this implementation's own exact DP:
    # log E[Z_N^2] at N = 2^12, beta_hat = 0.3 sits within 10% of lambda^2
    from polyext.theory import lambda_sq

    val = second_moment_curve(0.3, [4096], certify=False)[0].value
    assert val == pytest.approx(1.100478180, abs=1e-6)
    ratio = math.log(val) / lambda_sq(0.3)
    assert 0.9 < ratio < 1.1
