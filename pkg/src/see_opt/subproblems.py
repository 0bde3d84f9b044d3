"""Convex subproblems: scheduling LP, power allocation, trajectory design.

Each block of the alternating scheme is built here as a disciplined convex
program and handed to convex_solve (cvxpy + CLARABEL, SCS fallback). The
non-convex pieces are replaced by first-order bounds that are exact at the
expansion point: over-estimators for the rates that hurt secrecy (S->E,
R->E in the power step) and under-estimators for the ones that help
(R->D, S->R, the squared speed, and the eavesdropper distance in the
trajectory step). The trajectory step's fractional objective is handled by
Dinkelbach's parametric iteration.

Conventions: all slot arrays have length N and correspond to positions
q[1:]; squared-distance quantities are rescaled to km^2 inside the conic
programs (D2_SCALE) to keep the constraint matrices well conditioned, and
converted back at the boundary.
"""

import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .model import LN2, NodeLayout, PowerAllocation, Schedule, Trajectory, UavLimits

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
MAX_ITER = "MaxIter"
NUMERICAL_TROUBLE = "NumericalTrouble"

SOLVER_TOL = 1e-7
D2_SCALE = 1e6          # m^2 per internal distance-square unit (km^2)
_TINY = 1e-12


class NonpositiveDenominator(Exception):
    """Dinkelbach requires a strictly positive denominator."""


@dataclass
class ConvexSolveResult:
    variables: dict
    objective: float
    status: str
    kkt_residual: float


@dataclass
class TaylorPoint:
    """Expansion point of the current outer iteration."""

    p_s_ref: np.ndarray
    p_r_ref: np.ndarray
    q_ref: np.ndarray      # (N+1, 2)
    v_ref: np.ndarray      # (N+1, 2)
    u_rd_ref: np.ndarray   # ||q-w_D||^2 + H^2 per slot, m^2
    u_sr_ref: np.ndarray


@dataclass
class TrajectorySlacks:
    u_rd: np.ndarray
    u_re: np.ndarray
    u_sr: np.ndarray
    tau: np.ndarray
    s: np.ndarray


@dataclass
class SchedulingCoeffs:
    """Fixed per-slot rates entering the scheduling LP.

    a: forwarding gain (R->D minus R->E rate at full power use of the slot);
    b: source secrecy (S->R minus S->E), clamped at zero;
    c: full R->D rate, the causality chain's forwarding coefficient.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def slot_distance_squares(layout: NodeLayout, q: np.ndarray) -> dict:
    """Squared link distances (incl. altitude) at the slot positions q[1:]."""
    pos = q[1:]
    h2 = layout.H ** 2
    return {
        "u_sr": np.sum((pos - layout.w_S) ** 2, axis=1) + h2,
        "u_rd": np.sum((pos - layout.w_D) ** 2, axis=1) + h2,
        "u_re": np.sum((pos - layout.w_E) ** 2, axis=1) + h2,
    }


def taylor_point(traj: Trajectory, pwr: PowerAllocation, layout: NodeLayout) -> TaylorPoint:
    d2 = slot_distance_squares(layout, traj.q)
    return TaylorPoint(
        p_s_ref=pwr.p_s.copy(), p_r_ref=pwr.p_r.copy(),
        q_ref=traj.q.copy(), v_ref=traj.v.copy(),
        u_rd_ref=d2["u_rd"], u_sr_ref=d2["u_sr"],
    )


def scheduling_coefficients(cp_, layout, traj, pwr, h_se_hat) -> SchedulingCoeffs:
    """LP coefficients: link rates at the incumbent powers and positions."""
    d2 = slot_distance_squares(layout, traj.q)
    g0 = cp_.gamma_0
    a_sr = np.log2(1.0 + g0 * pwr.p_s / d2["u_sr"])
    a_se = np.log2(1.0 + h_se_hat * pwr.p_s)
    a_rd = np.log2(1.0 + g0 * pwr.p_r / d2["u_rd"])
    a_re = np.log2(1.0 + g0 * pwr.p_r / d2["u_re"])
    return SchedulingCoeffs(a=a_rd - a_re, b=np.maximum(a_sr - a_se, 0.0), c=a_rd)


# ---------------------------------------------------------------------------
# Generic convex-solve backend

def _relative_violation(constraints) -> float:
    """Largest constraint violation relative to each constraint's own scale."""
    worst = 0.0
    for con in constraints:
        try:
            with np.errstate(all="ignore"):
                viol = float(np.max(con.violation()))
        except Exception:
            continue
        if not np.isfinite(viol):
            return float("inf")
        scale = 1.0
        for arg in con.args:
            try:
                scale = max(scale, float(np.max(np.abs(arg.value))))
            except Exception:
                pass
        worst = max(worst, viol / scale)
    return worst


def _snapshot(variables):
    return {name: None if var.value is None else np.array(var.value, dtype=float)
            for name, var in variables.items()}


def convex_solve(objective, constraints, variables: dict,
                 solver_tol: float = SOLVER_TOL, polish=None) -> ConvexSolveResult:
    """Solve a DCP problem deterministically and report a checked status.

    CLARABEL first, SCS as fallback. Optimal is reported only when the
    returned point's largest relative constraint violation is within
    solver_tol, regardless of how confident the solver itself was; a
    usable but less accurate point comes back as NumericalTrouble with
    its variables attached, so the caller can still evaluate it against
    the true model.

    polish, when given, maps the raw variable snapshot to a corrected one
    (e.g. re-integrating kinematic equalities exactly) before the
    violation check; the corrected values are what gets reported.
    """
    prob = cp.Problem(objective, constraints)
    best = None   # (resid, values, objective, raw_status)
    # Near a Dinkelbach fixed point the objective tends to zero, so Clarabel's
    # relative-gap test can stall on an otherwise excellent iterate; the reduced
    # tolerances let it hand that iterate back (AlmostSolved) instead of raising,
    # and the violation check below remains the actual acceptance gate.
    clarabel_opts = {"reduced_tol_gap_abs": 1e-3, "reduced_tol_gap_rel": 1e-5,
                     "reduced_tol_feas": 1e-7}
    for solver, kwargs in (("CLARABEL", clarabel_opts),
                           ("SCS", {"eps_abs": 1e-7, "eps_rel": 1e-7, "max_iters": 50000})):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                prob.solve(solver=solver, verbose=False, **kwargs)
        except (cp.error.SolverError, ValueError, ArithmeticError):
            continue
        status = prob.status
        if status in (cp.INFEASIBLE, cp.UNBOUNDED):
            return ConvexSolveResult(_snapshot(variables), float("nan"),
                                     INFEASIBLE if status == cp.INFEASIBLE
                                     else NUMERICAL_TROUBLE, float("inf"))
        if prob.value is None:
            continue
        values = _snapshot(variables)
        if polish is not None:
            values = polish(values)
            for name, var in variables.items():
                if values[name] is not None:
                    var.value = values[name]
        resid = _relative_violation(constraints)
        if best is None or resid < best[0]:
            best = (resid, values, float(prob.value), status)
        if resid <= solver_tol and status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            break

    if best is None:
        return ConvexSolveResult(_snapshot(variables), float("nan"),
                                 NUMERICAL_TROUBLE, float("inf"))
    resid, values, obj, status = best
    if resid <= solver_tol and status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return ConvexSolveResult(values, obj, OPTIMAL, resid)
    return ConvexSolveResult(values, obj, NUMERICAL_TROUBLE, resid)


# ---------------------------------------------------------------------------
# (P1.1) scheduling LP and sub-slot rounding

def solve_scheduling(coeffs: SchedulingCoeffs, eta: int = 100,
                     solver_tol: float = SOLVER_TOL):
    """Relaxed scheduling: maximize forwarding gain under causality.

    Returns (Schedule, ConvexSolveResult). lambda = 1 everywhere is always
    feasible, so a genuinely infeasible LP only signals solver failure.
    """
    n = coeffs.a.shape[0]
    lam = cp.Variable(n)
    fwd = cp.multiply(1.0 - lam, coeffs.c)
    recv = cp.multiply(lam, coeffs.b)
    cons = [lam >= 0, lam <= 1]
    if coeffs.c[0] > 0:
        cons.append((1.0 - lam[0]) * coeffs.c[0] <= 0)   # nothing to forward yet
    if n > 1:
        cum_fwd = cp.cumsum(fwd)
        cum_recv = cp.cumsum(recv)
        cons.append(cum_fwd[1:] - fwd[0] <= cum_recv[:-1])
    obj = cp.Maximize(cp.sum(cp.multiply(1.0 - lam, coeffs.a)))
    res = convex_solve(obj, cons, {"lam": lam}, solver_tol)
    if res.status != OPTIMAL or res.variables["lam"] is None:
        # safe fallback: receive-only schedule forwards nothing
        return Schedule(lam=np.ones(n), eta=eta), res
    return Schedule(lam=np.clip(res.variables["lam"], 0.0, 1.0), eta=eta), res


def round_schedule(sched: Schedule, eta: int = None):
    """Sub-slot counts (receive, transmit) per slot; ties round up."""
    eta = sched.eta if eta is None else int(eta)
    if eta < 1:
        raise ValueError("eta must be >= 1")
    lam1 = np.floor(eta * sched.lam + 0.5).astype(int)
    lam1 = np.clip(lam1, 0, eta)
    return lam1, eta - lam1


# ---------------------------------------------------------------------------
# (P1.2.2) power allocation

def log2_affine_ub(h, p_ref):
    """Tangent of log2(1 + h p) at p_ref: (value, slope). Over-estimates."""
    h = np.asarray(h, dtype=float)
    p_ref = np.asarray(p_ref, dtype=float)
    value = np.log2(1.0 + h * p_ref)
    slope = h / (LN2 * (1.0 + h * p_ref))
    return value, slope


def power_over_estimators(tp: TaylorPoint, h_re, h_se_hat):
    """Affine over-estimators of the R->E and S->E rates around tp."""
    re_val, re_slope = log2_affine_ub(h_re, tp.p_r_ref)
    se_val, se_slope = log2_affine_ub(h_se_hat, tp.p_s_ref)
    return {"re_const": re_val, "re_slope": re_slope,
            "se_const": se_val, "se_slope": se_slope}


def _repair_source_slots(lam, p_s_ref, h_sr, h_se_hat):
    """Zero reference powers in slots whose source secrecy margin is negative.

    The per-slot margin log2(1+h_SR p) - log2(1+h_SE p) has one sign for all
    p > 0; where it is negative the slot cannot contribute received secrecy,
    and the all-zero power matches the clamped causality exactly.
    """
    p = np.asarray(p_s_ref, dtype=float).copy()
    bad = (lam > _TINY) & (p > 0) & (h_sr < h_se_hat)
    p[bad] = 0.0
    return p


def solve_power(sched: Schedule, tp: TaylorPoint, layout: NodeLayout,
                gamma_0: float, h_se_hat: float, limits: UavLimits,
                solver_tol: float = SOLVER_TOL):
    """Source/relay powers at fixed schedule and trajectory.

    The R->D rate enters through a hypograph slack (tight at any optimum
    with p_r > 0), the R->E and S->E rates through their affine
    over-estimators, so the surrogate never overstates the true secrecy
    objective and the causality chain never overstates the received bits.

    Returns (PowerAllocation, ConvexSolveResult).
    """
    n = sched.N
    lam = sched.lam
    onem = 1.0 - lam
    d2 = slot_distance_squares(layout, tp.q_ref)
    h_rd = gamma_0 / d2["u_rd"]
    h_re = gamma_0 / d2["u_re"]
    h_sr = gamma_0 / d2["u_sr"]

    tp_fixed = TaylorPoint(
        p_s_ref=_repair_source_slots(lam, tp.p_s_ref, h_sr, h_se_hat),
        p_r_ref=tp.p_r_ref, q_ref=tp.q_ref, v_ref=tp.v_ref,
        u_rd_ref=tp.u_rd_ref, u_sr_ref=tp.u_sr_ref)
    ub = power_over_estimators(tp_fixed, h_re, h_se_hat)

    p_s = cp.Variable(n, nonneg=True)
    p_r = cp.Variable(n, nonneg=True)
    rhat = cp.Variable(n, nonneg=True)     # hypograph of the R->D rate

    r_re_ub = ub["re_const"] + cp.multiply(ub["re_slope"], p_r - tp_fixed.p_r_ref)
    r_se_ub = ub["se_const"] + cp.multiply(ub["se_slope"], p_s - tp_fixed.p_s_ref)
    r_sr = cp.log(1.0 + cp.multiply(h_sr, p_s)) / LN2

    cons = [
        rhat <= cp.log(1.0 + cp.multiply(h_rd, p_r)) / LN2,
        cp.sum(p_s) <= n * limits.P_s_bar,
        cp.sum(p_r) <= n * limits.P_r_bar,
    ]
    if onem[0] > _TINY:
        cons.append(rhat[0] <= 0)          # first slot cannot forward
    fwd = cp.multiply(onem, rhat)
    recv = cp.multiply(lam, r_sr - r_se_ub)
    if n > 1:
        cons.append(cp.cumsum(fwd)[1:] - fwd[0] <= cp.cumsum(recv)[:-1])

    obj = cp.Maximize(cp.sum(fwd) - cp.sum(cp.multiply(onem, r_re_ub)))
    res = convex_solve(obj, cons, {"p_s": p_s, "p_r": p_r, "rhat": rhat}, solver_tol)
    if res.variables["p_s"] is None or res.variables["p_r"] is None:
        return None, res

    ps = np.maximum(res.variables["p_s"], 0.0)
    pr = np.maximum(res.variables["p_r"], 0.0)
    # slots gated off by the schedule carry no rate; strip their degenerate
    # allocations (and make the first-slot causality exact)
    ps[lam <= _TINY] = 0.0
    ps[h_sr < h_se_hat] = 0.0      # negative secrecy margin: power is wasted
    pr[onem <= _TINY] = 0.0
    if onem[0] > _TINY:
        pr[0] = 0.0
    return PowerAllocation(p_s=ps, p_r=pr), res


# ---------------------------------------------------------------------------
# (P1.3.2) trajectory design

def trajectory_under_estimators(tp: TaylorPoint, layout: NodeLayout,
                                pwr: PowerAllocation, gamma_0: float) -> dict:
    """First-order bounds around tp used by the trajectory program.

    re: affine lower bound of ||q - w_E||^2 + H^2 in q;
    v:  affine lower bound of ||v||^2 in v;
    rd/sr: phi(u) = A - B (u - u_ref) lower-bounding log2(1 + g0 p / u).
    """
    pos_ref = tp.q_ref[1:]
    v_ref = tp.v_ref[1:]
    h2 = layout.H ** 2

    re_grad = 2.0 * (pos_ref - layout.w_E)
    u_re_ref = np.sum((pos_ref - layout.w_E) ** 2, axis=1) + h2
    re_const = u_re_ref - np.sum(re_grad * pos_ref, axis=1)

    v_grad = 2.0 * v_ref
    v_const = -np.sum(v_ref ** 2, axis=1)

    def a_b(p, u_ref):
        a = np.log2(1.0 + gamma_0 * p / u_ref)
        b = gamma_0 * p / (LN2 * u_ref * (u_ref + gamma_0 * p))
        return a, b

    rd_a, rd_b = a_b(pwr.p_r, tp.u_rd_ref)
    sr_a, sr_b = a_b(pwr.p_s, tp.u_sr_ref)
    return {
        "re_const": re_const, "re_grad": re_grad, "u_re_ref": u_re_ref,
        "v_const": v_const, "v_grad": v_grad,
        "rd_A": rd_a, "rd_B": rd_b, "sr_A": sr_a, "sr_B": sr_b,
    }


def _polish_kinematics(values: dict, layout: NodeLayout, limits: UavLimits) -> dict:
    """Re-integrate (q, v) from de-drifted accelerations.

    Interior-point output satisfies the kinematic equalities only to solver
    accuracy; this rebuilds them to machine precision while moving the point
    by no more than the original equality residual.
    """
    if values.get("a") is None or values.get("v") is None:
        return values
    dt, n = limits.delta_t, limits.N
    a = values["a"] - np.mean(values["a"], axis=0)       # exact v-periodicity
    v = np.vstack([values["v"][0], values["v"][0] + dt * np.cumsum(a, axis=0)])
    v = v + (layout.q_F - layout.q_0 - dt * np.sum(v[:-1], axis=0)
             - 0.5 * dt ** 2 * np.sum(a, axis=0)) / (n * dt)
    q = np.empty_like(v)
    q[0] = layout.q_0
    q[1:] = layout.q_0 + np.cumsum(dt * v[:-1] + 0.5 * dt ** 2 * a, axis=0)
    out = dict(values)
    out.update(q=q, v=v, a=a)
    return out


def _build_trajectory_program(sched, pwr, tp, bounds, layout, limits, ep,
                              h_se_hat, gamma_0, v_floor):
    """Assemble the parametric Dinkelbach subproblem max NUM - mu * DEN."""
    n = limits.N
    dt = limits.delta_t
    lam, onem = sched.lam, 1.0 - sched.lam

    q = cp.Variable((n + 1, 2))
    v = cp.Variable((n + 1, 2))
    a = cp.Variable((n, 2))
    tau = cp.Variable(n)
    kap = cp.Variable(n, nonneg=True)   # epigraph of ||a||^2 / tau
    s = cp.Variable(n, nonneg=True)     # R->D rate lower bound

    pos = q[1:]
    cons = [
        q[0] == layout.q_0, q[n] == layout.q_F, v[0] == v[n],
        q[1:] == q[:-1] + v[:-1] * dt + 0.5 * dt ** 2 * a,
        v[1:] == v[:-1] + dt * a,
        cp.norm(v, axis=1) <= limits.V_max,
        cp.norm(a, axis=1) <= limits.a_max,
        tau >= v_floor, tau <= limits.V_max,
        cp.square(tau) <= bounds["v_const"] + cp.sum(cp.multiply(bounds["v_grad"], v[1:]), axis=1),
        cp.SOC(kap + tau,
               cp.hstack([2.0 * a, cp.reshape(kap - tau, (n, 1), order="C")]),
               axis=1),
    ]

    def d2_scaled(w, scale):
        # column-split keeps the fast canonicalization backend applicable
        dx = (pos[:, 0] - w[0]) / np.sqrt(scale)
        dy = (pos[:, 1] - w[1]) / np.sqrt(scale)
        return cp.square(dx) + cp.square(dy) + layout.H ** 2 / scale

    # R->D rate: s <= phi_rd(||q-w_D||^2 + H^2), distances in km^2 internally
    scale = D2_SCALE
    rd_b = bounds["rd_B"] * scale
    d2_rd = d2_scaled(layout.w_D, scale)
    cons.append(s <= bounds["rd_A"] + cp.multiply(rd_b, tp.u_rd_ref / scale - d2_rd))
    if onem[0] > _TINY:
        cons.append(s[0] <= 0)

    # causality: forwarded through n bounded by secrecy received through n-1,
    # with phi_sr evaluated at the true squared distance
    sr_b = bounds["sr_B"] * scale
    d2_sr = d2_scaled(layout.w_S, scale)
    r_se = np.log2(1.0 + h_se_hat * pwr.p_s)
    recv = cp.multiply(lam, bounds["sr_A"]
                       + cp.multiply(sr_b, tp.u_sr_ref / scale - d2_sr) - r_se)
    fwd = cp.multiply(onem, s)
    if n > 1:
        cons.append(cp.cumsum(fwd)[1:] - fwd[0] <= cp.cumsum(recv)[:-1])

    # R->E rate via the log-domain slack: w = ln(u_re / scale),
    # rate = logistic(ln(g0 p_r / scale) - w)/ln2, active slots only
    active = np.flatnonzero((onem > _TINY) & (pwr.p_r > _TINY))
    num = cp.sum(fwd)
    w_re = e_re = None
    if active.size:
        w_re = cp.Variable(active.size)
        e_re = cp.Variable(active.size)
        arg = np.log(gamma_0 * pwr.p_r[active] / scale)
        lb = (bounds["re_const"][active] / scale
              + cp.sum(cp.multiply(bounds["re_grad"][active] / scale, pos[active]), axis=1))
        cons += [e_re >= cp.logistic(arg - w_re), w_re <= cp.log(lb)]
        num = num - cp.sum(cp.multiply(onem[active] / LN2, e_re))

    speed = cp.norm(v[1:], axis=1)
    den = (ep.c1 * cp.sum(cp.power(speed, 3))
           + ep.c2 * cp.sum(cp.inv_pos(tau))
           + (ep.c2 / ep.g ** 2) * cp.sum(kap))
    variables = {"q": q, "v": v, "a": a, "tau": tau, "kap": kap, "s": s}
    if w_re is not None:
        variables["w_re"] = w_re
    return num, den, cons, variables, active


def solve_trajectory(sched: Schedule, pwr: PowerAllocation, tp: TaylorPoint,
                     layout: NodeLayout, limits: UavLimits, ep,
                     h_se_hat: float, gamma_0: float, mu_0: float = 0.0,
                     v_floor: float = 0.1, tol_dink: float = 1e-6,
                     max_iter: int = 30, solver_tol: float = SOLVER_TOL):
    """Trajectory update at fixed schedule and powers, via Dinkelbach.

    Returns (Trajectory or None, TrajectorySlacks or None, info dict).
    info carries the final status, mu trace, and kkt residual.
    """
    # slots with a negative source margin cannot contribute received secrecy;
    # zeroing their power matches the clamped causality (see solve_power)
    h_sr_ref = gamma_0 / tp.u_sr_ref
    pwr_fixed = PowerAllocation(
        p_s=_repair_source_slots(sched.lam, pwr.p_s, h_sr_ref, h_se_hat),
        p_r=pwr.p_r.copy())
    bounds = trajectory_under_estimators(tp, layout, pwr_fixed, gamma_0)

    def parametric(mu):
        num, den, cons, variables, active = _build_trajectory_program(
            sched, pwr_fixed, tp, bounds, layout, limits, ep,
            h_se_hat, gamma_0, v_floor)
        res = convex_solve(cp.Maximize(num - mu * den), cons, variables, solver_tol,
                           polish=lambda vals: _polish_kinematics(vals, layout, limits))
        if res.status != OPTIMAL or res.variables["q"] is None:
            return None, res
        # evaluate at the accepted snapshot (may differ from the last solve)
        for name, var in variables.items():
            var.value = res.variables[name]
        return {"num": float(num.value), "den": float(den.value),
                "vals": res.variables, "active": active}, res

    info = {"mu": [float(mu_0)], "status": NUMERICAL_TROUBLE, "kkt_residual": float("inf"),
            "dinkelbach_iterations": 0}
    best = None
    mu = float(mu_0)
    for k in range(max_iter):
        sol, res = parametric(mu)
        info["dinkelbach_iterations"] = k + 1
        if sol is None:
            # keep the best verified iterate; the caller re-evaluates anyway
            info["status"] = res.status if best is None else OPTIMAL
            break
        if sol["den"] <= 0:
            raise NonpositiveDenominator("propulsion term came out nonpositive")
        best = sol
        info["kkt_residual"] = res.kkt_residual
        f_mu = sol["num"] - mu * sol["den"]
        mu = sol["num"] / sol["den"]
        info["mu"].append(float(mu))
        if f_mu <= tol_dink * sol["den"]:
            info["status"] = OPTIMAL
            break
    else:
        info["status"] = MAX_ITER

    if best is None:
        return None, None, info
    vals = best["vals"]
    traj = Trajectory(q=vals["q"], v=vals["v"], a=vals["a"])
    d2 = slot_distance_squares(layout, traj.q)
    u_re = d2["u_re"].copy()
    if best["active"].size and "w_re" in vals and vals["w_re"] is not None:
        u_re[best["active"]] = np.exp(vals["w_re"]) * D2_SCALE
    slacks = TrajectorySlacks(u_rd=d2["u_rd"], u_re=u_re, u_sr=d2["u_sr"],
                              tau=vals["tau"], s=vals["s"])
    return traj, slacks, info


# ---------------------------------------------------------------------------
# Dinkelbach, generic form (used directly by tests and small problems)

def dinkelbach(parametric_solver, mu_0: float = 0.0, tol_dink: float = 1e-6,
               max_iter: int = 30) -> dict:
    """Classical Dinkelbach iteration for max N(x)/D(x).

    parametric_solver(mu) must return (solution, num, den) for the
    subproblem max N(x) - mu D(x). Stops when F(mu) <= tol_dink * D(x).
    Returns {"mu": ratio, "solution": x, "iterations": k, "converged": bool,
    "mu_trace": [...]}.
    """
    mu = float(mu_0)
    trace = [mu]
    solution = None
    for k in range(1, max_iter + 1):
        solution, num, den = parametric_solver(mu)
        if den <= 0:
            raise NonpositiveDenominator("denominator must be positive, got %g" % den)
        f_mu = num - mu * den
        mu = num / den
        trace.append(mu)
        if f_mu <= tol_dink * den:
            return {"mu": mu, "solution": solution, "iterations": k,
                    "converged": True, "mu_trace": trace}
    return {"mu": mu, "solution": solution, "iterations": max_iter,
            "converged": False, "mu_trace": trace}
