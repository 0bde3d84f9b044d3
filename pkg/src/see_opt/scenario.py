"""Scenario files: flat key = value text with units encoded in key names.

Power-like quantities are configured in dB/dBm (the usual mix in link
budgets) and converted to linear units on access. A scenario file only
needs the keys it overrides; everything else comes from the defaults,
which reproduce the reference simulation setup.
"""

from dataclasses import dataclass, fields, replace

from .model import ChannelParams, EnergyParams, NodeLayout, UavLimits


class ScenarioError(Exception):
    """Malformed scenario file; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass
class Scenario:
    """All physical and algorithmic parameters of one run."""

    label: str = "section4"
    seed: int = 0

    # Node geometry, meters
    w_s_x_m: float = -750.0
    w_s_y_m: float = 0.0
    w_d_x_m: float = 750.0
    w_d_y_m: float = 0.0
    w_e_x_m: float = 300.0
    w_e_y_m: float = -300.0
    h_m: float = 100.0
    q0_x_m: float = -900.0
    q0_y_m: float = -200.0
    qf_x_m: float = 900.0
    qf_y_m: float = -200.0

    # Channel
    b_hz: float = 1e6
    k_const: float = 1e-3
    alpha: float = 3.0
    sigma2_dbm: float = -110.0
    beta0_db: float = -50.0
    zeta_se: float = 1.0

    # Propulsion energy model
    c1: float = 9.26e-4
    c2: float = 2250.0
    g_ms2: float = 9.8
    mass_kg: float = 0.0

    # UAV limits, slot grid, power budgets
    v_max_ms: float = 40.0
    a_max_ms2: float = 5.0
    delta_t_s: float = 1.0
    t_horizon_s: float = 100.0
    p_s_dbm: float = 10.0
    p_r_dbm: float = 10.0

    # Initializer knobs
    init_speed_frac: float = 0.75
    init_laps: int = 1

    # Algorithm tolerances
    epsilon: float = 1e-5
    solver_tol: float = 1e-7
    tol_dink: float = 1e-6
    eta: int = 100
    max_outer: int = 100
    v_floor_ms: float = 0.1
    kin_tol: float = 1e-6

    @property
    def N(self) -> int:
        n = self.t_horizon_s / self.delta_t_s
        if abs(n - round(n)) > 1e-9:
            raise ScenarioError("t_horizon_s must be an integer multiple of delta_t_s")
        return int(round(n))

    def layout(self) -> NodeLayout:
        return NodeLayout(
            w_S=[self.w_s_x_m, self.w_s_y_m],
            w_D=[self.w_d_x_m, self.w_d_y_m],
            w_E=[self.w_e_x_m, self.w_e_y_m],
            H=self.h_m,
            q_0=[self.q0_x_m, self.q0_y_m],
            q_F=[self.qf_x_m, self.qf_y_m],
        )

    def channel(self) -> ChannelParams:
        return ChannelParams(
            beta_0=db_to_linear(self.beta0_db),
            sigma2=dbm_to_watts(self.sigma2_dbm),
            K=self.k_const,
            alpha=self.alpha,
            B=self.b_hz,
            zeta_SE=self.zeta_se,
        )

    def energy(self) -> EnergyParams:
        return EnergyParams(c1=self.c1, c2=self.c2, g=self.g_ms2, mass=self.mass_kg)

    def limits(self) -> UavLimits:
        return UavLimits(
            V_max=self.v_max_ms,
            a_max=self.a_max_ms2,
            delta_t=self.delta_t_s,
            N=self.N,
            P_s_bar=dbm_to_watts(self.p_s_dbm),
            P_r_bar=dbm_to_watts(self.p_r_dbm),
        )

    def with_horizon(self, t_seconds: float) -> "Scenario":
        return replace(self, t_horizon_s=float(t_seconds))


_FIELD_TYPES = {f.name: f.type for f in fields(Scenario)}
_INT_FIELDS = {"seed", "eta", "max_outer", "init_laps"}


def parse_scenario(text: str) -> Scenario:
    """Parse flat key = value lines into a Scenario; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError("expected 'key = value', got %r" % raw.strip(), lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _FIELD_TYPES:
            raise ScenarioError("unknown key %r" % key, lineno)
        if key in values:
            raise ScenarioError("duplicate key %r" % key, lineno)
        if key == "label":
            values[key] = val
        elif key in _INT_FIELDS:
            try:
                values[key] = int(val)
            except ValueError:
                raise ScenarioError("key %r needs an integer, got %r" % (key, val), lineno)
        else:
            try:
                values[key] = float(val)
            except ValueError:
                raise ScenarioError("key %r needs a number, got %r" % (key, val), lineno)
    try:
        sc = Scenario(**values)
        sc.N  # trigger the divisibility check early
        sc.layout(), sc.channel(), sc.energy(), sc.limits()
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(str(exc))
    return sc


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def serialize_scenario(sc: Scenario) -> str:
    """Emit a scenario file that round-trips to an identical Scenario."""
    lines = []
    for f in fields(Scenario):
        val = getattr(sc, f.name)
        lines.append("%s = %s" % (f.name, val if isinstance(val, str) else repr(val)))
    return "\n".join(lines) + "\n"


def default_scenario(t_horizon_s: float = None) -> Scenario:
    sc = Scenario()
    if t_horizon_s is not None:
        sc = sc.with_horizon(t_horizon_s)
    return sc
