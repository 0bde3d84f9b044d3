"""Domain types and pure evaluation of the UAV relay secrecy/energy model.

Everything in this module is a pure function of its inputs: distances,
channel gains, per-slot link rates, secrecy throughput, information
causality residuals, propulsion energy, and the secrecy energy efficiency
(SEE) objective. Time is discretized into N slots of length delta_t; arrays
are 0-based, so slot n (1-based in the usual formulation) lives at index
n-1. Rates in slot n use the position q[n], energy in slot n uses v[n] and
a[n-1].
"""

from dataclasses import dataclass, field

import numpy as np

LN2 = float(np.log(2.0))

# Default tolerances. Kinematic equalities are checked in meters / (m/s);
# budget and causality checks are relative.
KIN_TOL = 1e-6
REL_TOL = 1e-6


class SpeedUnderflow(Exception):
    """Speed fell below the floor that keeps c2/||v|| well-posed."""


class ZeroEnergy(Exception):
    """SEE denominator is not strictly positive."""


class DimensionMismatch(Exception):
    """Array lengths are inconsistent with the slot count N."""


def _vec2(x, name):
    arr = np.array(x, dtype=float).reshape(-1)   # copy: never alias caller state
    if arr.shape != (2,):
        raise DimensionMismatch("%s must be a 2-vector, got shape %s" % (name, arr.shape))
    return arr


@dataclass
class NodeLayout:
    """Ground node positions, UAV altitude, and trajectory endpoints (meters)."""

    w_S: np.ndarray
    w_D: np.ndarray
    w_E: np.ndarray
    H: float
    q_0: np.ndarray
    q_F: np.ndarray

    def __post_init__(self):
        self.w_S = _vec2(self.w_S, "w_S")
        self.w_D = _vec2(self.w_D, "w_D")
        self.w_E = _vec2(self.w_E, "w_E")
        self.q_0 = _vec2(self.q_0, "q_0")
        self.q_F = _vec2(self.q_F, "q_F")
        self.H = float(self.H)
        if self.H <= 0:
            raise ValueError("altitude H must be positive")
        if np.allclose(self.w_S, self.w_D):
            raise ValueError("source and destination must not coincide")


@dataclass
class ChannelParams:
    """Channel constants; gamma_0 = beta_0/sigma2 is derived, never stored."""

    beta_0: float        # reference power gain at 1 m, linear
    sigma2: float        # noise power, watts
    K: float             # ground-to-ground channel constant
    alpha: float         # ground-to-ground path loss exponent
    B: float             # bandwidth, hertz
    zeta_SE: float = 1.0  # fixed fading realization, unit mean

    def __post_init__(self):
        if self.beta_0 <= 0 or self.sigma2 <= 0:
            raise ValueError("beta_0 and sigma2 must be positive")
        if self.alpha < 2:
            raise ValueError("path loss exponent alpha must be >= 2")
        if self.zeta_SE < 0:
            raise ValueError("zeta_SE must be nonnegative")

    @property
    def gamma_0(self):
        return self.beta_0 / self.sigma2


@dataclass
class EnergyParams:
    """Fixed-wing propulsion model p(v,a) = c1 v^3 + (c2/v)(1 + a^2/g^2)."""

    c1: float
    c2: float
    g: float = 9.8
    mass: float = 0.0   # used only to report the kinetic energy change

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0 or self.g <= 0:
            raise ValueError("c1, c2, g must be positive")


@dataclass
class UavLimits:
    """Kinematic limits, slot grid, and average power budgets."""

    V_max: float
    a_max: float
    delta_t: float
    N: int
    P_s_bar: float
    P_r_bar: float

    def __post_init__(self):
        self.N = int(self.N)
        if self.V_max <= 0 or self.a_max <= 0 or self.delta_t <= 0:
            raise ValueError("V_max, a_max, delta_t must be positive")
        if self.N < 2:
            raise ValueError("need at least 2 slots")
        if self.P_s_bar < 0 or self.P_r_bar < 0:
            raise ValueError("power budgets must be nonnegative")

    @property
    def T(self):
        return self.N * self.delta_t


@dataclass
class Trajectory:
    """Discrete state sequence: q[0..N], v[0..N] (2-vectors), a[0..N-1]."""

    q: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        n = self.a.shape[0]
        if self.q.shape != (n + 1, 2) or self.v.shape != (n + 1, 2):
            raise DimensionMismatch(
                "expected q,v of shape (N+1,2) and a of shape (N,2); got %s %s %s"
                % (self.q.shape, self.v.shape, self.a.shape))

    @property
    def N(self):
        return self.a.shape[0]

    def copy(self):
        return Trajectory(self.q.copy(), self.v.copy(), self.a.copy())


@dataclass
class Schedule:
    """Per-slot relay direction: lambda[n]=1 receive (S->R), 0 transmit (R->D)."""

    lam: np.ndarray
    eta: int = 100

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.eta = int(self.eta)
        if self.eta < 1:
            raise ValueError("eta must be a positive integer")
        if self.lam.min() < -1e-12 or self.lam.max() > 1 + 1e-12:
            raise ValueError("lambda entries must lie in [0, 1]")
        self.lam = np.clip(self.lam, 0.0, 1.0)

    @property
    def N(self):
        return self.lam.shape[0]


@dataclass
class PowerAllocation:
    """Per-slot transmit powers in watts."""

    p_s: np.ndarray
    p_r: np.ndarray

    def __post_init__(self):
        self.p_s = np.asarray(self.p_s, dtype=float)
        self.p_r = np.asarray(self.p_r, dtype=float)
        if self.p_s.shape != self.p_r.shape or self.p_s.ndim != 1:
            raise DimensionMismatch("p_s and p_r must be 1-d arrays of equal length")
        if self.p_s.min() < -1e-15 or self.p_r.min() < -1e-15:
            raise ValueError("powers must be nonnegative")
        self.p_s = np.maximum(self.p_s, 0.0)
        self.p_r = np.maximum(self.p_r, 0.0)

    @property
    def N(self):
        return self.p_s.shape[0]


@dataclass
class RateProfile:
    """Per-slot spectral rates (bits/s/Hz), already weighted by the schedule."""

    r_SR: np.ndarray
    r_SE: np.ndarray
    r_RD: np.ndarray
    r_RE: np.ndarray

    @property
    def N(self):
        return self.r_SR.shape[0]


@dataclass
class Violation:
    name: str
    value: float
    tolerance: float


@dataclass
class ValidationReport:
    """Named constraint residuals; empty means feasible within tolerance."""

    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, name, value, tolerance):
        self.violations.append(Violation(name, float(value), float(tolerance)))

    def __len__(self):
        return len(self.violations)

    def __str__(self):
        if self.ok:
            return "feasible"
        return "; ".join("%s: %.3e (tol %.1e)" % (v.name, v.value, v.tolerance)
                         for v in self.violations)


def distances(layout: NodeLayout, q_n) -> dict:
    """Link distances for UAV position(s) q_n; accepts a 2-vector or (...,2)."""
    q = np.asarray(q_n, dtype=float)
    h2 = layout.H ** 2

    def d(w):
        return np.sqrt(np.sum((q - w) ** 2, axis=-1) + h2)

    return {
        "d_SR": d(layout.w_S),
        "d_RD": d(layout.w_D),
        "d_RE": d(layout.w_E),
        "d_SE": float(np.linalg.norm(layout.w_S - layout.w_E)),
    }


def se_channel_gain(cp: ChannelParams, layout: NodeLayout) -> float:
    """Ground S->E channel power gain K * zeta * beta_0 * d_SE^(-alpha)."""
    d_se = float(np.linalg.norm(layout.w_S - layout.w_E))
    return cp.K * cp.zeta_SE * cp.beta_0 * d_se ** (-cp.alpha)


def channel_gains(cp: ChannelParams, layout: NodeLayout, q_n) -> dict:
    """Power gains of the four links at UAV position(s) q_n."""
    d = distances(layout, q_n)
    return {
        "h_SR": cp.beta_0 / d["d_SR"] ** 2,
        "h_RD": cp.beta_0 / d["d_RD"] ** 2,
        "h_RE": cp.beta_0 / d["d_RE"] ** 2,
        "h_SE": se_channel_gain(cp, layout),
    }


def _check_lengths(n, *named):
    for name, length in named:
        if length != n:
            raise DimensionMismatch("%s has length %d, expected %d" % (name, length, n))


def link_rates(cp: ChannelParams, layout: NodeLayout, traj: Trajectory,
               sched: Schedule, pwr: PowerAllocation) -> RateProfile:
    """Schedule-weighted spectral rates of the four links in every slot."""
    n = traj.N
    _check_lengths(n, ("schedule", sched.N), ("powers", pwr.N))
    q = traj.q[1:]                       # position governing slot n
    g0 = cp.gamma_0
    h2 = layout.H ** 2
    lam = sched.lam
    d2_sr = np.sum((q - layout.w_S) ** 2, axis=1) + h2
    d2_rd = np.sum((q - layout.w_D) ** 2, axis=1) + h2
    d2_re = np.sum((q - layout.w_E) ** 2, axis=1) + h2
    h_se_hat = se_channel_gain(cp, layout) / cp.sigma2
    return RateProfile(
        r_SR=lam * np.log2(1.0 + g0 * pwr.p_s / d2_sr),
        r_SE=lam * np.log2(1.0 + h_se_hat * pwr.p_s),
        r_RD=(1.0 - lam) * np.log2(1.0 + g0 * pwr.p_r / d2_rd),
        r_RE=(1.0 - lam) * np.log2(1.0 + g0 * pwr.p_r / d2_re),
    )


def secrecy_throughput(rates: RateProfile, B: float, delta_t: float) -> dict:
    """Accumulated secrecy throughput in bits, per-slot clamped at zero."""
    sr = np.maximum(rates.r_SR - rates.r_SE, 0.0)
    rd = np.maximum(rates.r_RD - rates.r_RE, 0.0)
    return {
        "R_sec_sr": B * delta_t * float(np.sum(sr)),
        "R_sec_rd": B * delta_t * float(np.sum(rd)),
    }


def causality_residuals(rates: RateProfile) -> np.ndarray:
    """Information-causality slack per slot; negative entries are violations.

    slack[0] = -r_RD in the first slot (which must be zero: nothing has been
    received yet); for n >= 2, slack is the received secrecy through slot n-1
    minus the forwarded rate through slot n.
    """
    received = np.maximum(rates.r_SR - rates.r_SE, 0.0)
    cum_recv = np.cumsum(received)           # through slot n
    cum_fwd = np.cumsum(rates.r_RD)          # through slot n
    slack = np.empty(rates.N)
    slack[0] = -rates.r_RD[0]
    slack[1:] = cum_recv[:-1] - (cum_fwd[1:] - rates.r_RD[0])
    return slack


def _power_terms(ep: EnergyParams, traj: Trajectory, v_floor: float) -> np.ndarray:
    """Instantaneous propulsion power per slot (watts), before delta_t."""
    speed = np.linalg.norm(traj.v[1:], axis=1)
    if speed.min() < v_floor:
        raise SpeedUnderflow(
            "slot speed %.4g m/s below floor %.3g" % (speed.min(), v_floor))
    acc2 = np.sum(traj.a ** 2, axis=1)
    return ep.c1 * speed ** 3 + (ep.c2 / speed) * (1.0 + acc2 / ep.g ** 2)


def propulsion_energy(ep: EnergyParams, traj: Trajectory, delta_t: float,
                      v_floor: float = 0.1) -> dict:
    """Propulsion energy upper bound: per-slot joules, total, and Delta_k."""
    per_slot = delta_t * _power_terms(ep, traj, v_floor)
    delta_k = 0.5 * ep.mass * (np.sum(traj.v[-1] ** 2) - np.sum(traj.v[0] ** 2))
    return {
        "per_slot": per_slot,
        "delta_k": float(delta_k),
        "E_total": float(np.sum(per_slot) + delta_k),
    }


def see_objective(rates: RateProfile, ep: EnergyParams, traj: Trajectory,
                  B: float, clamped: bool = False, v_floor: float = 0.1) -> float:
    """Secrecy energy efficiency B * sum(r_RD - r_RE) / sum(power terms), bits/J.

    The numerator is unclamped by default (the per-slot clamp is inactive at
    any optimized design); pass clamped=True for the reporting variant.
    """
    diff = rates.r_RD - rates.r_RE
    if clamped:
        diff = np.maximum(diff, 0.0)
    den = float(np.sum(_power_terms(ep, traj, v_floor)))
    if not np.isfinite(den) or den <= 0:
        raise ZeroEnergy("propulsion energy denominator must be positive")
    return B * float(np.sum(diff)) / den


def validate_design(layout: NodeLayout, limits: UavLimits, traj: Trajectory,
                    sched: Schedule, pwr: PowerAllocation,
                    kin_tol: float = KIN_TOL, rel_tol: float = REL_TOL,
                    cp: ChannelParams = None) -> ValidationReport:
    """Check a full design against kinematics, limits, budgets, and causality.

    The causality check (which needs channel gains) runs only when cp is
    given; schedule and power checks run only when those are given. Returns
    a report whose emptiness means feasibility.
    """
    n = limits.N
    if traj.N != n:
        raise DimensionMismatch("trajectory has N=%d, limits say N=%d" % (traj.N, n))
    if sched is not None:
        _check_lengths(n, ("schedule", sched.N))
    if pwr is not None:
        _check_lengths(n, ("powers", pwr.N))
    dt = limits.delta_t
    rep = ValidationReport()

    # Endpoint and periodicity constraints
    r = np.max(np.abs(traj.q[0] - layout.q_0))
    if r > kin_tol:
        rep.add("q_start", r, kin_tol)
    r = np.max(np.abs(traj.q[-1] - layout.q_F))
    if r > kin_tol:
        rep.add("q_end", r, kin_tol)
    r = np.max(np.abs(traj.v[0] - traj.v[-1]))
    if r > kin_tol:
        rep.add("v_periodic", r, kin_tol)

    # Discrete kinematics
    q_pred = traj.q[:-1] + traj.v[:-1] * dt + 0.5 * traj.a * dt ** 2
    r = np.max(np.abs(traj.q[1:] - q_pred))
    if r > kin_tol:
        rep.add("kinematics_q", r, kin_tol)
    v_pred = traj.v[:-1] + traj.a * dt
    r = np.max(np.abs(traj.v[1:] - v_pred))
    if r > kin_tol:
        rep.add("kinematics_v", r, kin_tol)

    # Speed / acceleration limits
    r = np.max(np.linalg.norm(traj.v, axis=1)) - limits.V_max
    if r > kin_tol:
        rep.add("v_max", r, kin_tol)
    r = np.max(np.linalg.norm(traj.a, axis=1)) - limits.a_max
    if r > kin_tol:
        rep.add("a_max", r, kin_tol)

    # Schedule box and power budgets
    if sched is not None:
        r = max(-sched.lam.min(), sched.lam.max() - 1.0)
        if r > rel_tol:
            rep.add("lambda_box", r, rel_tol)
    if pwr is not None:
        if pwr.p_s.min() < -rel_tol:
            rep.add("p_s_nonneg", -pwr.p_s.min(), rel_tol)
        if pwr.p_r.min() < -rel_tol:
            rep.add("p_r_nonneg", -pwr.p_r.min(), rel_tol)
        for name, p, bar in (("s_budget", pwr.p_s, limits.P_s_bar),
                             ("r_budget", pwr.p_r, limits.P_r_bar)):
            r = float(np.mean(p)) - bar
            if r > rel_tol * max(bar, 1e-30):
                rep.add(name, r, rel_tol * max(bar, 1e-30))

    # Information causality, relative to the forwarded-rate scale
    if cp is not None and sched is not None and pwr is not None:
        rates = link_rates(cp, layout, traj, sched, pwr)
        slack = causality_residuals(rates)
        scale = max(float(np.sum(rates.r_RD)), 1.0)
        r = -float(slack.min())
        if r > rel_tol * scale:
            rep.add("causality", r, rel_tol * scale)
    return rep
