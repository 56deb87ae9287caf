"""tdslip: simulation and co-design optimization of small hopping robots.

The robot is abstracted as a torque-driven, damped spring-loaded
inverted pendulum: a point mass on a massless C-shaped spring leg,
driven by a geared brushed DC motor at the hip under open-loop voltage
control. The package simulates the hybrid stance/flight dynamics,
scores designs against gait-quality constraints under touchdown-angle
noise, and searches the mixed-discrete design space (motor selection,
geometry, controller coefficients) with a constrained particle swarm.
"""

from .catalog import MotorSpec, load_catalog, load_default_catalog, lookup
from .control import FlightVoltageProfile, StanceVoltageProfile, flight_voltage, stance_voltage
from .evaluation import (
    EvalReport,
    Evaluator,
    MonteCarloStats,
    NoiseSpec,
    design_search_space,
    energy,
    evaluate,
    perturb_touchdown,
    summarize,
    symmetry,
    validate_monte_carlo,
)
from .mdpso import OptimizationResult, SearchSpace, SwarmConfig, optimize, rank
from .model import (
    DesignVector,
    SystemParams,
    build_system,
    leg_stiffness,
    relative_stiffness,
    system_mass,
)
from .sim import PhaseSegment, SimConfig, Trajectory, resample, simulate

__version__ = "0.1.0"
