"""Initial trajectory constructors and the two benchmark designs.

The main initializer is the double-circular path: a full circle at the
start point, a straight run to the end point, and a full circle there,
flown back-to-back so that v[0] = v[N]. Trajectories are built velocity
first: the continuous velocity profile is sampled on the slot grid,
positions follow by trapezoid integration and accelerations by forward
differences, which makes the discrete kinematic equalities hold to
machine precision.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import NodeLayout, Trajectory, UavLimits

ACC_MARGIN = 0.95    # fraction of a_max the constructor is willing to use
SPEED_CAP = 0.999    # fraction of V_max treated as attainable


class InfeasibleGeometry(Exception):
    """The endpoints cannot be joined within the slot budget and speed cap."""


class AccelerationExceeded(Exception):
    """No admissible circle speed keeps centripetal acceleration within a_max."""


@dataclass
class InitParams:
    """Resolved initializer plan.

    V is the straight-leg (cruise) speed; v_circle, when set, is a slower
    circle speed used with +-ramp_a ramps on the straight leg (needed when
    constant-speed circles would exceed the acceleration limit). r is the
    circle radius implied by the circle speed and slot split.
    """

    V: float
    laps: int
    N_s: int
    N_c: int
    r: float
    v_circle: float = None
    ramp_a: float = None

    @property
    def circle_speed(self):
        return self.V if self.v_circle is None else self.v_circle


def f_even(x: float) -> int:
    """Nearest even integer; exact odd-integer midpoints round down."""
    if x < 0:
        raise ValueError("f_even is defined for x >= 0")
    k = math.floor(x / 2.0)
    if x / 2.0 - k > 0.5:
        k += 1
    return 2 * k


def _circle_accel(v: float, n_c: int, laps: int, dt: float) -> float:
    """Per-slot acceleration magnitude of the sampled circle."""
    return 2.0 * v * math.sin(math.pi * laps / n_c) / dt


def _straight_profile(v_c, v_s, a_r, n_s, dt):
    """Speeds at the N_s+1 straight-leg samples: ramp, cruise, ramp back."""
    m = np.arange(n_s + 1, dtype=float)
    reach = a_r * dt * np.minimum(m, n_s - m)
    if v_s >= v_c:
        return np.minimum(v_c + reach, v_s)
    return np.maximum(v_c - reach, v_s)


def _straight_distance(v_c, v_s, a_r, n_s, dt):
    s = _straight_profile(v_c, v_s, a_r, n_s, dt)
    return dt * float(np.sum(0.5 * (s[:-1] + s[1:])))


def _solve_cruise_speed(v_c, a_r, n_s, dt, dist, v_lo, v_hi):
    """Bisect the cruise speed so the straight leg covers exactly dist."""
    if _straight_distance(v_c, v_lo, a_r, n_s, dt) > dist:
        return None
    if _straight_distance(v_c, v_hi, a_r, n_s, dt) < dist:
        return None
    for _ in range(80):
        mid = 0.5 * (v_lo + v_hi)
        if _straight_distance(v_c, mid, a_r, n_s, dt) < dist:
            v_lo = mid
        else:
            v_hi = mid
    return 0.5 * (v_lo + v_hi)


def _split_candidates(n_s0, n_total):
    """N_s values to try, nearest to the target split first."""
    lo, hi = 0, n_total - 4
    seen = []
    for off in range(0, hi + 3, 2):
        for cand in (n_s0 + off, n_s0 - off) if off else (n_s0,):
            # both circles need an equal integer slot count
            if lo <= cand <= hi and cand not in seen and (n_total - cand) % 2 == 0:
                seen.append(cand)
    return seen


def plan_double_circular(layout: NodeLayout, limits: UavLimits,
                         speed_frac: float = 0.75, laps: int = 1,
                         v_floor: float = 0.1) -> InitParams:
    """Choose the slot split and speeds for a feasible double-circular path.

    Tries constant-speed plans near the target cruise speed first; when no
    constant speed keeps the circle acceleration within a_max (short
    horizons), falls back to slow circles joined by a faster straight leg
    with bounded ramps.
    """
    dt, n = limits.delta_t, limits.N
    d = float(np.linalg.norm(layout.q_F - layout.q_0))
    v_cap = SPEED_CAP * limits.V_max
    if d > v_cap * n * dt:
        raise InfeasibleGeometry(
            "endpoints %.1f m apart exceed reachable %.1f m" % (d, v_cap * n * dt))
    if n < 6:
        raise InfeasibleGeometry("need at least 6 slots for two circles and a straight leg")

    v_target = min(speed_frac * limits.V_max, v_cap)
    if d < v_floor * dt:
        n_s0 = 0
    else:
        n_s0 = f_even(d / (v_target * dt))
    if (n - n_s0) % 2:
        n_s0 -= 1
    candidates = _split_candidates(max(n_s0, 0), n)
    if not candidates:
        raise InfeasibleGeometry("no admissible straight/circle slot split")

    # Constant-speed plans: V set by exact straight-leg closure. A zero
    # straight leg can only move the drift correction, so it is admissible
    # only when the endpoints coincide.
    for n_s in candidates:
        n_c = (n - n_s) // 2
        if n_c < 2:
            continue
        if n_s == 0:
            if d >= v_floor * dt:
                continue
            v = min(v_target, ACC_MARGIN * limits.a_max * dt
                    / (2.0 * math.sin(math.pi * laps / n_c)))
            if v < v_floor:
                continue
        else:
            v = d / (n_s * dt)
        if not (v_floor <= v <= v_cap):
            continue
        if _circle_accel(v, n_c, laps, dt) <= ACC_MARGIN * limits.a_max:
            r = v * n_c * dt / (2.0 * math.pi * laps)
            return InitParams(V=v, laps=laps, N_s=n_s, N_c=n_c, r=r)

    # Two-speed fallback: circles as fast as the acceleration budget allows,
    # straight leg solved for exact closure.
    a_r = ACC_MARGIN * limits.a_max
    for n_s in candidates:
        n_c = (n - n_s) // 2
        if n_c < 2 or n_s < 2:
            continue
        v_c = min(ACC_MARGIN * limits.a_max * dt
                  / (2.0 * math.sin(math.pi * laps / n_c)), v_cap)
        if v_c < v_floor:
            continue
        v_s = _solve_cruise_speed(v_c, a_r, n_s, dt, d, v_floor, v_cap)
        if v_s is None:
            continue
        r = v_c * n_c * dt / (2.0 * math.pi * laps)
        return InitParams(V=v_s, laps=laps, N_s=n_s, N_c=n_c, r=r,
                          v_circle=v_c, ramp_a=a_r)

    raise AccelerationExceeded(
        "no circle speed satisfies a_max=%.3g within N=%d slots" % (limits.a_max, n))


def _integrate_velocities(v: np.ndarray, q_0, q_F, dt: float) -> Trajectory:
    """Positions by trapezoid rule, accelerations by differences."""
    n = v.shape[0] - 1
    # distribute any closure residual as a uniform velocity offset, which
    # preserves v[0] = v[N]
    travelled = dt * np.sum(0.5 * (v[:-1] + v[1:]), axis=0)
    v = v + (np.asarray(q_F) - np.asarray(q_0) - travelled) / (n * dt)
    q = np.empty((n + 1, 2))
    q[0] = q_0
    q[1:] = q_0 + np.cumsum(dt * 0.5 * (v[:-1] + v[1:]), axis=0)
    a = (v[1:] - v[:-1]) / dt
    return Trajectory(q=q, v=v, a=a)


def double_circular(layout: NodeLayout, limits: UavLimits, ip: InitParams) -> Trajectory:
    """Build the double-circular trajectory realizing a plan from the planner."""
    dt, n = limits.delta_t, limits.N
    if ip.N_s + 2 * ip.N_c != n:
        raise InfeasibleGeometry("plan slots %d+2*%d do not fill N=%d"
                                 % (ip.N_s, ip.N_c, n))
    d_vec = layout.q_F - layout.q_0
    d = float(np.linalg.norm(d_vec))
    e = d_vec / d if d > 0 else np.array([1.0, 0.0])
    nh = np.array([-e[1], e[0]])         # left normal; circle centers at q + r*nh

    v_c = ip.circle_speed
    theta = -0.5 * math.pi + 2.0 * math.pi * ip.laps * np.arange(ip.N_c + 1) / ip.N_c
    circle_v = v_c * (-np.sin(theta)[:, None] * e + np.cos(theta)[:, None] * nh)

    if ip.v_circle is None:
        straight_speed = np.full(ip.N_s + 1, ip.V)
    else:
        straight_speed = _straight_profile(v_c, ip.V, ip.ramp_a, ip.N_s, dt)

    v = np.empty((n + 1, 2))
    v[0:ip.N_c + 1] = circle_v
    v[ip.N_c:ip.N_c + ip.N_s + 1] = straight_speed[:, None] * e
    v[ip.N_c + ip.N_s:] = circle_v
    traj = _integrate_velocities(v, layout.q_0, layout.q_F, dt)

    amax = float(np.max(np.linalg.norm(traj.a, axis=1)))
    if amax > limits.a_max * (1 + 1e-9):
        raise AccelerationExceeded("built path needs %.3f m/s^2 > a_max" % amax)
    vmax = float(np.max(np.linalg.norm(traj.v, axis=1)))
    if vmax > limits.V_max * (1 + 1e-9):
        raise InfeasibleGeometry("built path needs %.3f m/s > V_max" % vmax)
    return traj


def straight_flight(layout: NodeLayout, limits: UavLimits,
                    v_floor: float = 0.1) -> Trajectory:
    """Constant-velocity straight run from q_0 to q_F."""
    dt, n = limits.delta_t, limits.N
    d_vec = layout.q_F - layout.q_0
    speed = float(np.linalg.norm(d_vec)) / (n * dt)
    if speed > limits.V_max * (1 + 1e-12):
        raise InfeasibleGeometry("straight flight needs %.2f m/s > V_max" % speed)
    if speed < v_floor:
        raise InfeasibleGeometry("straight flight speed %.3f m/s below floor" % speed)
    v = np.tile(d_vec / (n * dt), (n + 1, 1))
    return _integrate_velocities(v, layout.q_0, layout.q_F, dt)


def initial_trajectory(scenario) -> Trajectory:
    """Planner + builder in one step from a Scenario."""
    layout, limits = scenario.layout(), scenario.limits()
    ip = plan_double_circular(layout, limits, speed_frac=scenario.init_speed_frac,
                              laps=scenario.init_laps, v_floor=scenario.v_floor_ms)
    return double_circular(layout, limits, ip)


def run_benchmark(scenario, kind: str, optimize_resources: bool = True):
    """Benchmark designs: trajectory frozen, scheduling+power optimized.

    kind 'sfw' uses the straight flight, 'dcfwo' the double-circular path.
    With optimize_resources=False a single scheduling pass at uniform powers
    is evaluated instead of alternating to convergence.
    """
    from .optimizer import optimize   # deferred: optimizer also uses this module

    kind = kind.lower()
    if kind == "sfw":
        traj = straight_flight(scenario.layout(), scenario.limits(),
                               v_floor=scenario.v_floor_ms)
    elif kind == "dcfwo":
        traj = initial_trajectory(scenario)
    else:
        raise ValueError("benchmark kind must be 'sfw' or 'dcfwo', got %r" % kind)
    max_outer = scenario.max_outer if optimize_resources else 1
    return optimize(scenario, initial=traj, max_outer=max_outer,
                    optimize_trajectory=False, optimize_power=optimize_resources)
