"""Alternating solver: scheduling, power, and trajectory blocks to a fixed point.

Each outer iteration solves scheduling, then power, then records the true
(model-evaluated) objective, then takes a trajectory step. The recorded
points are always causal: the scheduling LP uses exact rates and the power
step's rate hypograph is tight at its optimum, so both enforce causality
exactly at the current trajectory. A trajectory step may leave a small
linearization debt at the new path; the next iteration's scheduling and
power solves repair it before anything is recorded, and a rollback to the
last recorded checkpoint guards the trace against any step that fails to
pay for itself. The reported trace is therefore model truth, never a
surrogate bound, and non-decreasing up to solver noise; the reported design
is the last checkpoint, which carries no debt.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .model import (PowerAllocation, Schedule, Trajectory, causality_residuals,
                    link_rates, propulsion_energy, se_channel_gain,
                    secrecy_throughput, validate_design)
from . import subproblems as sp

log = logging.getLogger("see_opt.optimizer")


class InfeasibleInitialDesign(Exception):
    """The starting design violates kinematics or budget constraints."""


class SubproblemFailure(Exception):
    """A convex block raised instead of returning a status."""

    def __init__(self, message, iteration=None, block=None):
        super().__init__(message)
        self.iteration = iteration
        self.block = block


@dataclass
class Design:
    sched: Schedule
    pwr: PowerAllocation
    traj: Trajectory

    def copy(self):
        return Design(Schedule(lam=self.sched.lam.copy(), eta=self.sched.eta),
                      PowerAllocation(p_s=self.pwr.p_s.copy(), p_r=self.pwr.p_r.copy()),
                      self.traj.copy())


@dataclass
class SolveReport:
    iterations: list = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    see: float = 0.0
    design: Design = None
    rounded: dict = None

    @property
    def n_outer(self):
        return len(self.iterations)


def evaluate_design(scenario, design: Design) -> dict:
    """True-model evaluation: SEE, throughput splits, energy, and slacks."""
    layout, cp_, ep = scenario.layout(), scenario.channel(), scenario.energy()
    limits = scenario.limits()
    rates = link_rates(cp_, layout, design.traj, design.sched, design.pwr)
    thr = secrecy_throughput(rates, cp_.B, limits.delta_t)
    energy = propulsion_energy(ep, design.traj, limits.delta_t,
                               v_floor=scenario.v_floor_ms)
    slack = causality_residuals(rates)
    diff = rates.r_RD - rates.r_RE
    return {
        "see": thr["R_sec_rd"] / energy["E_total"],
        "see_unclamped": cp_.B * limits.delta_t * float(np.sum(diff)) / energy["E_total"],
        "R_sec_sr": thr["R_sec_sr"],
        "R_sec_rd": thr["R_sec_rd"],
        "numerator_bits": thr["R_sec_rd"],
        "energy_J": energy["E_total"],
        "rates": rates,
        "causality": slack,
        "max_causality_violation": max(0.0, -float(slack.min())),
    }


def _rounded_variant(scenario, design: Design) -> dict:
    """Binary sub-slot schedule and its re-evaluated objective."""
    lam1, lam2 = sp.round_schedule(design.sched)
    quantized = Design(Schedule(lam=lam1 / float(design.sched.eta), eta=design.sched.eta),
                       design.pwr, design.traj)
    ev = evaluate_design(scenario, quantized)
    return {"lam1": lam1, "lam2": lam2, "see": ev["see"],
            "max_causality_violation": ev["max_causality_violation"]}


def _feasible(scenario, design: Design) -> bool:
    rep = validate_design(scenario.layout(), scenario.limits(), design.traj,
                          design.sched, design.pwr, kin_tol=scenario.kin_tol,
                          cp=scenario.channel())
    return rep.ok


def optimize(scenario, initial=None, epsilon: float = None, max_outer: int = None,
             optimize_trajectory: bool = True, optimize_power: bool = True) -> SolveReport:
    """Alternate the three blocks until the objective settles.

    initial may be a Trajectory (powers start uniform at the budgets, the
    schedule comes from the first scheduling solve) or a full Design.
    Infeasible or numerically failed blocks are skipped and the incumbent
    kept, so the trace stays monotone; unexpected block exceptions surface
    as SubproblemFailure with iteration context.
    """
    layout, cp_, ep = scenario.layout(), scenario.channel(), scenario.energy()
    limits = scenario.limits()
    eps = scenario.epsilon if epsilon is None else float(epsilon)
    max_outer = scenario.max_outer if max_outer is None else int(max_outer)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    h_se_hat = se_channel_gain(cp_, layout) / cp_.sigma2
    n = limits.N

    if initial is None:
        from .initializers import initial_trajectory
        initial = initial_trajectory(scenario)
    if isinstance(initial, Design):
        incumbent = initial.copy()
    else:
        incumbent = Design(
            Schedule(lam=np.ones(n), eta=scenario.eta),
            PowerAllocation(p_s=np.full(n, limits.P_s_bar),
                            p_r=np.full(n, limits.P_r_bar)),
            initial.copy())

    rep0 = validate_design(layout, limits, incumbent.traj, incumbent.sched,
                           incumbent.pwr, kin_tol=scenario.kin_tol, cp=cp_)
    if not rep0.ok:
        raise InfeasibleInitialDesign(str(rep0))

    report = SolveReport()
    checkpoint = incumbent.copy()
    a_check = evaluate_design(scenario, checkpoint)["see"]
    a_prev = a_check
    stall = 0

    # The working design may carry transient causality debt right after a
    # trajectory update; the next scheduling and power solves repair it
    # (both enforce causality exactly at the working point), so only the
    # recorded post-power iterates need the monotonicity guard.
    for m in range(1, max_outer + 1):
        statuses, walls = {}, {}

        # 1. scheduling at the incumbent powers and trajectory
        t0 = time.perf_counter()
        try:
            coeffs = sp.scheduling_coefficients(cp_, layout, incumbent.traj,
                                                incumbent.pwr, h_se_hat)
            sched_c, res = sp.solve_scheduling(coeffs, eta=scenario.eta,
                                               solver_tol=scenario.solver_tol)
        except Exception as ex:
            raise SubproblemFailure("scheduling block failed at iteration %d: %s"
                                    % (m, ex), iteration=m, block="scheduling") from ex
        walls["scheduling"] = time.perf_counter() - t0
        statuses["scheduling"] = res.status
        if res.status == sp.OPTIMAL:
            incumbent = Design(sched_c, incumbent.pwr, incumbent.traj)

        # 2. power at the (possibly updated) schedule, same trajectory
        if optimize_power:
            t0 = time.perf_counter()
            try:
                tp = sp.taylor_point(incumbent.traj, incumbent.pwr, layout)
                pwr_c, res = sp.solve_power(incumbent.sched, tp, layout, cp_.gamma_0,
                                            h_se_hat, limits, scenario.solver_tol)
            except Exception as ex:
                raise SubproblemFailure("power block failed at iteration %d: %s"
                                        % (m, ex), iteration=m, block="power") from ex
            walls["power"] = time.perf_counter() - t0
            statuses["power"] = res.status
            if res.status == sp.OPTIMAL and pwr_c is not None:
                incumbent = Design(incumbent.sched, pwr_c, incumbent.traj)

        # record the iterate: schedule and power are exact at this trajectory,
        # so the design here is causal; roll back if a trajectory detour
        # failed to pay for itself
        ev = evaluate_design(scenario, incumbent)
        a_new = ev["see"]
        dip_slack = 10.0 * scenario.solver_tol * max(1.0, a_check)
        rolled_back = False
        if a_new < a_check - dip_slack or not _feasible(scenario, incumbent):
            incumbent = checkpoint.copy()
            ev = evaluate_design(scenario, incumbent)
            a_new = ev["see"]
            rolled_back = True
        entry = {
            "iter": m,
            "see": a_new,
            "numerator_bits": ev["numerator_bits"],
            "energy_J": ev["energy_J"],
            "max_causality_violation": ev["max_causality_violation"],
            "statuses": statuses,
            "wall_s": walls,
        }
        if rolled_back:
            entry["rolled_back"] = True
        report.iterations.append(entry)
        checkpoint = incumbent.copy()
        a_check = a_new
        log.debug("iter %d: SEE %.6g bits/J, causality slack %.2g%s", m, a_new,
                  ev["max_causality_violation"], " (rolled back)" if rolled_back else "")

        rel_change = abs(a_new - a_prev) / max(a_prev, eps)
        improvement = (a_new - a_prev) / max(a_prev, eps)
        a_prev = a_new
        if rel_change <= eps:
            report.converged = True
            report.reason = "epsilon"
            break
        stall = stall + 1 if improvement < eps / 10.0 else 0
        if stall >= 5:
            report.reason = "stall"
            break

        # 3. trajectory at the updated schedule and powers
        if optimize_trajectory:
            t0 = time.perf_counter()
            try:
                tp = sp.taylor_point(incumbent.traj, incumbent.pwr, layout)
                mu0 = max(ev["see_unclamped"] / cp_.B, 0.0)
                traj_c, slacks, info = sp.solve_trajectory(
                    incumbent.sched, incumbent.pwr, tp, layout, limits, ep,
                    h_se_hat, cp_.gamma_0, mu_0=mu0, v_floor=scenario.v_floor_ms,
                    tol_dink=scenario.tol_dink, solver_tol=scenario.solver_tol)
            except Exception as ex:
                raise SubproblemFailure("trajectory block failed at iteration %d: %s"
                                        % (m, ex), iteration=m, block="trajectory") from ex
            walls["trajectory"] = time.perf_counter() - t0
            statuses["trajectory"] = info["status"]
            entry["dinkelbach_iterations"] = info["dinkelbach_iterations"]
            entry["surrogate_mu"] = info["mu"][-1]
            if traj_c is not None:
                cand = Design(incumbent.sched, incumbent.pwr, traj_c)
                try:
                    ev_c = evaluate_design(scenario, cand)
                except Exception:
                    ev_c = None
                accepted = False
                if ev_c is not None:
                    entry["true_mu"] = ev_c["see_unclamped"] / cp_.B
                    kin_ok = validate_design(layout, limits, traj_c, None, None,
                                             kin_tol=scenario.kin_tol).ok
                    gain = ev_c["see_unclamped"] - ev["see_unclamped"]
                    if kin_ok and gain >= -dip_slack:
                        incumbent = cand
                        accepted = True
                statuses["trajectory_accepted"] = accepted
    else:
        report.reason = "max_outer"

    # the checkpoint is the last recorded (causal, post-power) design; the
    # working incumbent may still carry an unrepaired trajectory update
    report.see = a_check
    report.design = checkpoint
    report.rounded = _rounded_variant(scenario, checkpoint)
    return report
