"""Convex blocks: bound directions, small-instance oracles, solver wrapper."""

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from see_opt import subproblems as sp
from see_opt.model import (LN2, PowerAllocation, Schedule, Trajectory,
                           causality_residuals, link_rates, se_channel_gain,
                           validate_design)
from see_opt.initializers import initial_trajectory
from see_opt.scenario import default_scenario

RNG = np.random.default_rng(1234)


def tiny_trajectory(points):
    """Static geometry for power tests: only the positions matter."""
    q = np.asarray(points, dtype=float)
    n = q.shape[0] - 1
    v = np.tile([1.0, 0.0], (n + 1, 1))
    return Trajectory(q=q, v=v, a=np.zeros((n, 2)))


# ---------------------------------------------------------------------------
# bound directions (small draws; the full randomized suites run in acceptance)

def test_log2_tangent_over_estimates():
    h = np.array([1e3, 2e4, 7.7e-4])
    p_ref = np.array([0.01, 0.002, 0.02])
    val, slope = sp.log2_affine_ub(h, p_ref)
    for p in np.linspace(0.0, 0.05, 23):
        ub = val + slope * (p - p_ref)
        truth = np.log2(1.0 + h * p)
        assert np.all(ub - truth >= -1e-12)
    at_ref = val + slope * 0.0
    assert np.allclose(at_ref, np.log2(1.0 + h * p_ref), rtol=1e-12)


def test_bound_hand_examples():
    # tangent of log2(1+p) at p=1, evaluated at p=3
    val, slope = sp.log2_affine_ub(1.0, 1.0)
    ub = float(val + slope * 2.0)
    assert ub == pytest.approx(1.0 + 1.0 / LN2, rel=1e-12)
    assert ub >= np.log2(4.0)

    # speed-squared bound around v_m=(10,0), evaluated at v=(0,10)
    sc = default_scenario()
    tp = sp.TaylorPoint(p_s_ref=np.array([0.01]), p_r_ref=np.array([0.01]),
                        q_ref=np.zeros((2, 2)),
                        v_ref=np.array([[10.0, 0.0], [10.0, 0.0]]),
                        u_rd_ref=np.array([1e5]), u_sr_ref=np.array([1e5]))
    pwr = PowerAllocation(p_s=np.array([0.01]), p_r=np.array([0.01]))
    est = sp.trajectory_under_estimators(tp, sc.layout(), pwr,
                                         sc.channel().gamma_0)
    phi_v = est["v_const"][0] + est["v_grad"][0] @ np.array([0.0, 10.0])
    assert phi_v == pytest.approx(-100.0)
    assert phi_v <= 100.0 + 1e-12                  # true speed squared


def test_trajectory_bounds_under_estimate():
    sc = default_scenario(60)
    traj = initial_trajectory(sc)
    n = traj.N
    pwr = PowerAllocation(p_s=np.full(n, 0.01), p_r=np.full(n, 0.01))
    tp = sp.taylor_point(traj, pwr, sc.layout())
    est = sp.trajectory_under_estimators(tp, sc.layout(), pwr, sc.channel().gamma_0)

    for _ in range(20):
        dq = RNG.normal(scale=40.0, size=(n, 2))
        dv = RNG.normal(scale=5.0, size=(n, 2))
        pos = tp.q_ref[1:] + dq
        vel = tp.v_ref[1:] + dv
        u_re_true = np.sum((pos - sc.layout().w_E) ** 2, axis=1) + sc.layout().H ** 2
        re_lb = est["re_const"] + np.sum(est["re_grad"] * pos, axis=1)
        assert np.all(re_lb <= u_re_true + 1e-9)
        v2_lb = est["v_const"] + np.sum(est["v_grad"] * vel, axis=1)
        assert np.all(v2_lb <= np.sum(vel ** 2, axis=1) + 1e-9)

        u = np.maximum(tp.u_rd_ref + RNG.normal(scale=1e5, size=n), 1e4)
        rd_lb = est["rd_A"] - est["rd_B"] * (u - tp.u_rd_ref)
        rd_true = np.log2(1.0 + sc.channel().gamma_0 * pwr.p_r / u)
        assert np.all(rd_lb <= rd_true + 1e-9)

    # equality at the expansion point
    assert np.allclose(est["re_const"] + np.sum(est["re_grad"] * tp.q_ref[1:], axis=1),
                       est["u_re_ref"], rtol=1e-12)
    assert np.allclose(est["v_const"] + np.sum(est["v_grad"] * tp.v_ref[1:], axis=1),
                       np.sum(tp.v_ref[1:] ** 2, axis=1), rtol=1e-12)


# ---------------------------------------------------------------------------
# scheduling LP

def brute_force_schedule(a, b, c):
    """Best binary schedule value under the causality chain."""
    n = a.shape[0]
    best = -np.inf
    for mask in range(1 << n):
        lam = np.array([(mask >> i) & 1 for i in range(n)], dtype=float)
        onem = 1.0 - lam
        if c[0] > 0 and onem[0] > 0:
            continue
        fwd = np.cumsum(onem * c)
        recv = np.cumsum(lam * b)
        if n > 1 and np.any(fwd[1:] - fwd[0] > recv[:-1] + 1e-12):
            continue
        best = max(best, float(np.sum(onem * a)))
    return best


def random_coeffs(n):
    c = RNG.uniform(0.0, 5.0, size=n)
    a = c - RNG.uniform(0.0, 3.0, size=n)
    b = RNG.uniform(0.0, 3.0, size=n)
    return sp.SchedulingCoeffs(a=a, b=b, c=c)


def test_lp_upper_bounds_binary_schedules():
    for _ in range(5):
        coeffs = random_coeffs(6)
        sched, res = sp.solve_scheduling(coeffs)
        assert res.status == sp.OPTIMAL
        lp_val = float(np.sum((1.0 - sched.lam) * coeffs.a))
        assert lp_val >= brute_force_schedule(coeffs.a, coeffs.b, coeffs.c) - 1e-7


def test_lp_respects_first_slot_and_causality():
    coeffs = sp.SchedulingCoeffs(a=np.array([4.0, 4.0, 4.0]),
                                 b=np.array([1.0, 1.0, 1.0]),
                                 c=np.array([4.0, 4.0, 4.0]))
    sched, res = sp.solve_scheduling(coeffs)
    assert res.status == sp.OPTIMAL
    lam = sched.lam
    assert lam[0] == pytest.approx(1.0, abs=1e-6)   # nothing to forward yet
    onem = 1.0 - lam
    fwd = np.cumsum(onem * coeffs.c)
    recv = np.cumsum(lam * coeffs.b)
    assert np.all(fwd[1:] - fwd[0] <= recv[:-1] + 1e-6)


def test_lp_prefers_receiving_when_forwarding_loses():
    coeffs = sp.SchedulingCoeffs(a=np.array([-1.0, -2.0]),
                                 b=np.array([1.0, 1.0]),
                                 c=np.array([0.5, 0.5]))
    sched, _ = sp.solve_scheduling(coeffs)
    assert np.allclose(sched.lam, 1.0, atol=1e-6)


def test_round_schedule_counts():
    sched = Schedule(lam=np.array([0.0, 1.0, 0.494, 0.505, 0.3349]), eta=100)
    lam1, lam2 = sp.round_schedule(sched)
    assert lam1.tolist() == [0, 100, 49, 51, 33]
    assert np.all(lam1 + lam2 == 100)
    with pytest.raises(ValueError):
        sp.round_schedule(sched, eta=0)


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=20),
       st.integers(min_value=1, max_value=500))
@settings(max_examples=200, deadline=None)
def test_round_schedule_is_nearest_count(lams, eta):
    sched = Schedule(lam=np.array(lams), eta=eta)
    lam1, lam2 = sp.round_schedule(sched)
    assert np.all((0 <= lam1) & (lam1 <= eta))
    assert np.all(lam1 + lam2 == eta)
    assert np.all(np.abs(lam1 - eta * sched.lam) <= 0.5 + 1e-9)


# ---------------------------------------------------------------------------
# power step

def two_slot_setup():
    """Receive slot near S, transmit slot near D, eavesdropper close by."""
    sc = default_scenario()
    layout = sc.layout()
    traj = tiny_trajectory([[-310.0, -100.0], [-300.0, -100.0], [300.0, -100.0]])
    sched = Schedule(lam=np.array([1.0, 0.0]))
    limits_kw = dict(V_max=40.0, a_max=5.0, delta_t=1.0, N=2,
                     P_s_bar=0.01, P_r_bar=0.01)
    from see_opt.model import UavLimits
    limits = UavLimits(**limits_kw)
    pwr_ref = PowerAllocation(p_s=np.full(2, 0.01), p_r=np.full(2, 0.01))
    tp = sp.taylor_point(traj, pwr_ref, layout)
    h_se_hat = se_channel_gain(sc.channel(), layout) / sc.channel().sigma2
    return sc, layout, limits, traj, sched, tp, h_se_hat


def surrogate_power_objective(ps1, pr2, layout, tp, sched, h_se_hat, gamma_0):
    """The power program's objective on the two free variables."""
    d2 = sp.slot_distance_squares(layout, tp.q_ref)
    h_sr1, h_rd2, h_re2 = d2["u_sr"][0], d2["u_rd"][1], d2["u_re"][1]
    ub = sp.power_over_estimators(tp, gamma_0 / d2["u_re"], h_se_hat)
    recv = np.log2(1.0 + gamma_0 * ps1 / h_sr1) - (
        ub["se_const"][0] + ub["se_slope"][0] * (ps1 - tp.p_s_ref[0]))
    fwd = np.minimum(np.log2(1.0 + gamma_0 * pr2 / h_rd2), np.maximum(recv, 0.0))
    re_ub = ub["re_const"][1] + ub["re_slope"][1] * (pr2 - tp.p_r_ref[1])
    return fwd - re_ub


def test_power_two_slots_matches_grid():
    sc, layout, limits, traj, sched, tp, h_se_hat = two_slot_setup()
    g0 = sc.channel().gamma_0
    pwr, res = sp.solve_power(sched, tp, layout, g0, h_se_hat, limits)
    assert res.status == sp.OPTIMAL

    ps = np.linspace(0.0, 2 * limits.P_s_bar, 200)
    pr = np.linspace(0.0, 2 * limits.P_r_bar, 200)
    grid = surrogate_power_objective(ps[:, None], pr[None, :], layout, tp,
                                     sched, h_se_hat, g0)
    assert res.objective >= grid.max() - 1e-9           # grid points are feasible
    assert abs(res.objective - grid.max()) <= 1e-3


def test_power_solution_is_truly_causal():
    sc, layout, limits, traj, sched, tp, h_se_hat = two_slot_setup()
    pwr, res = sp.solve_power(sched, tp, layout, sc.channel().gamma_0,
                              h_se_hat, limits)
    rates = link_rates(sc.channel(), layout, traj, sched, pwr)
    assert causality_residuals(rates).min() >= -1e-6
    assert np.mean(pwr.p_s) <= limits.P_s_bar * (1 + 1e-7)
    assert np.mean(pwr.p_r) <= limits.P_r_bar * (1 + 1e-7)


def test_power_strips_gated_slots():
    sc, layout, limits, traj, _, tp, h_se_hat = two_slot_setup()
    sched = Schedule(lam=np.array([0.0, 1.0]))     # transmit first: must idle
    pwr, res = sp.solve_power(sched, tp, layout, sc.channel().gamma_0,
                              h_se_hat, limits)
    assert pwr.p_r[0] == 0.0                       # first slot cannot forward
    assert pwr.p_s[0] == 0.0                       # schedule gates the source
    assert pwr.p_r[1] == 0.0                       # receive slot: relay silent


def test_repair_zeroes_negative_margin_slots():
    lam = np.array([1.0, 1.0, 0.0])
    p = np.array([0.01, 0.02, 0.03])
    h_sr = np.array([2e3, 1e-5, 2e3])
    out = sp._repair_source_slots(lam, p, h_sr, h_se_hat=7.7e-4)
    assert out.tolist() == [0.01, 0.0, 0.03]
    assert p[1] == 0.02                            # input untouched


# ---------------------------------------------------------------------------
# solver wrapper

def test_convex_solve_simple_qp():
    x = cp.Variable(2)
    res = sp.convex_solve(cp.Minimize(cp.sum_squares(x - np.array([1.0, 2.0]))),
                          [x >= 0], {"x": x})
    assert res.status == sp.OPTIMAL
    assert np.allclose(res.variables["x"], [1.0, 2.0], atol=1e-5)
    assert res.kkt_residual <= sp.SOLVER_TOL


def test_convex_solve_detects_infeasible():
    x = cp.Variable()
    res = sp.convex_solve(cp.Maximize(x), [x >= 1, x <= 0], {"x": x})
    assert res.status == sp.INFEASIBLE


def test_convex_solve_polish_hook_wins():
    x = cp.Variable(3)
    target = np.array([1.0, 1.0, 1.0])

    def polish(values):
        return {"x": np.round(values["x"], 6)}

    res = sp.convex_solve(cp.Minimize(cp.sum_squares(x - target)),
                          [cp.sum(x) == 3.0], {"x": x}, polish=polish)
    assert res.status == sp.OPTIMAL
    assert np.array_equal(res.variables["x"], np.round(res.variables["x"], 6))


def test_relative_violation_treats_nan_as_infinite():
    # a sloppy solver point can push an affine log argument negative; the
    # resulting NaN must read as infinitely infeasible, never as feasible
    x = cp.Variable(2)
    x.value = np.array([-5.0, 2.0])
    assert sp._relative_violation([x[1] <= cp.log(x[0])]) == np.inf


# ---------------------------------------------------------------------------
# kinematic polishing

def test_polish_restores_exact_kinematics():
    sc = default_scenario(60)
    layout, limits = sc.layout(), sc.limits()
    traj = initial_trajectory(sc)
    noisy = {
        "q": traj.q + RNG.normal(scale=1e-7, size=traj.q.shape),
        "v": traj.v + RNG.normal(scale=1e-7, size=traj.v.shape),
        "a": traj.a + RNG.normal(scale=1e-7, size=traj.a.shape),
    }
    out = sp._polish_kinematics(dict(noisy), layout, limits)
    q, v, a = out["q"], out["v"], out["a"]
    dt = limits.delta_t
    assert np.allclose(q[1:], q[:-1] + v[:-1] * dt + 0.5 * a * dt ** 2, atol=1e-10)
    assert np.allclose(v[1:], v[:-1] + a * dt, atol=1e-10)
    assert np.allclose(v[0], v[-1], atol=1e-10)
    assert np.allclose(q[-1], layout.q_F, atol=1e-9)


# ---------------------------------------------------------------------------
# Dinkelbach

def test_dinkelbach_matches_scan_on_1d_fractional():
    # maximize log(1+x) / (0.5+x) on [0, 10]; solver has a closed form
    def solver(mu):
        x = np.clip(1.0 / mu - 1.0, 0.0, 10.0) if mu > 0 else 10.0
        return x, float(np.log1p(x)), 0.5 + x

    out = sp.dinkelbach(solver, mu_0=0.0, tol_dink=1e-12)
    xs = np.arange(0.0, 10.0, 1e-4)
    scan = float(np.max(np.log1p(xs) / (0.5 + xs)))
    assert out["converged"]
    assert out["mu"] == pytest.approx(scan, abs=1e-5)
    assert out["mu_trace"] == sorted(out["mu_trace"])   # monotone ascent


def test_dinkelbach_rejects_nonpositive_denominator():
    with pytest.raises(sp.NonpositiveDenominator):
        sp.dinkelbach(lambda mu: (0.0, 1.0, 0.0), mu_0=0.0)


def test_dinkelbach_iteration_cap():
    # a solver that never closes the gap: F(mu) stuck above tolerance
    out = sp.dinkelbach(lambda mu: (mu, mu + 1.0, 1.0), mu_0=0.0,
                        tol_dink=1e-12, max_iter=7)
    assert not out["converged"]
    assert out["iterations"] == 7


# ---------------------------------------------------------------------------
# trajectory step on a moderate instance

def test_trajectory_step_improves_and_stays_feasible():
    sc = default_scenario(60)
    layout, limits, ep = sc.layout(), sc.limits(), sc.energy()
    cp_ = sc.channel()
    h_se_hat = se_channel_gain(cp_, layout) / cp_.sigma2
    traj = initial_trajectory(sc)
    n = limits.N
    pwr = PowerAllocation(p_s=np.full(n, limits.P_s_bar),
                          p_r=np.full(n, limits.P_r_bar))
    coeffs = sp.scheduling_coefficients(cp_, layout, traj, pwr, h_se_hat)
    sched, _ = sp.solve_scheduling(coeffs, eta=sc.eta)
    tp = sp.taylor_point(traj, pwr, layout)
    pwr2, res = sp.solve_power(sched, tp, layout, cp_.gamma_0, h_se_hat, limits)
    assert res.status == sp.OPTIMAL

    tp = sp.taylor_point(traj, pwr2, layout)
    traj2, slacks, info = sp.solve_trajectory(
        sched, pwr2, tp, layout, limits, ep, h_se_hat, cp_.gamma_0,
        mu_0=0.0, v_floor=sc.v_floor_ms, tol_dink=sc.tol_dink)
    assert info["status"] in (sp.OPTIMAL, sp.MAX_ITER)
    assert traj2 is not None
    rep = validate_design(layout, limits, traj2, None, None, kin_tol=sc.kin_tol)
    assert rep.ok, str(rep)
    assert info["mu"][-1] > 0.0
    mu = np.array(info["mu"])
    # ascends up to re-evaluation noise at the polished points
    assert np.all(np.diff(mu) >= -1e-3 * mu.max())

    # the surrogate ratio never overstates the true unclamped ratio
    rates = link_rates(cp_, layout, traj2, sched, pwr2)
    from see_opt.model import propulsion_energy
    true_num = float(np.sum(rates.r_RD - rates.r_RE))
    true_den = propulsion_energy(ep, traj2, limits.delta_t,
                                 v_floor=sc.v_floor_ms)["E_total"] / limits.delta_t
    assert info["mu"][-1] <= true_num / true_den + 1e-6
