"""Secrecy energy efficiency maximization for a fixed-wing UAV relay.

A decode-and-forward relay mounted on a fixed-wing UAV carries confidential
traffic from a source to a destination while an eavesdropper listens. The
package jointly optimizes the communication schedule, the transmit powers,
and the flight path to maximize secrecy bits delivered per joule of
propulsion energy, by alternating three convex blocks (an exact scheduling
LP, a power step, and a Dinkelbach-driven trajectory step built from tight
first-order bounds).

Typical use:

    from see_opt import default_scenario, optimize
    report = optimize(default_scenario(t_horizon_s=100))
    print(report.see, report.converged)

The ``see-opt`` console script exposes the same runs as batch commands with
CSV/JSON artifacts.
"""

from .model import (ChannelParams, EnergyParams, NodeLayout, PowerAllocation,
                    RateProfile, Schedule, Trajectory, UavLimits,
                    causality_residuals, link_rates, propulsion_energy,
                    se_channel_gain, secrecy_throughput, see_objective,
                    validate_design)
from .scenario import (Scenario, ScenarioError, default_scenario, load_scenario,
                       parse_scenario, serialize_scenario)
from .initializers import (InfeasibleGeometry, InitParams, double_circular,
                           f_even, initial_trajectory, plan_double_circular,
                           run_benchmark, straight_flight)
from .optimizer import (Design, InfeasibleInitialDesign, SolveReport,
                        SubproblemFailure, evaluate_design, optimize)
from .subproblems import dinkelbach, round_schedule

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "Design", "EnergyParams", "InfeasibleGeometry",
    "InfeasibleInitialDesign", "InitParams", "NodeLayout", "PowerAllocation",
    "RateProfile", "Scenario", "ScenarioError", "Schedule", "SolveReport",
    "SubproblemFailure", "Trajectory", "UavLimits", "causality_residuals",
    "default_scenario", "dinkelbach", "double_circular", "evaluate_design",
    "f_even", "initial_trajectory", "link_rates", "load_scenario", "optimize",
    "parse_scenario", "plan_double_circular", "propulsion_energy",
    "round_schedule", "run_benchmark", "se_channel_gain", "secrecy_throughput",
    "see_objective", "serialize_scenario", "straight_flight", "validate_design",
]
