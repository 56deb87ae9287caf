"""Scoring of simulated designs: objectives, constraints, noise model.

Two single-objective problems share one constraint family:

* case 1 minimizes the stride-to-stride touchdown angle difference
  ``|theta_0 - theta_TD2|``;
* case 2 minimizes the electrical energy drawn over the first full
  stance + flight cycle, with a tighter touchdown-angle-difference
  constraint, a strongly weighted flight-distance constraint, and an
  anti-stall floor on instantaneous input power.

Constraints are expressed as residuals (feasible iff residual <= 0).
Quantities that never materialized because the run died early receive a
fixed large residual on a per-constraint normalized scale, so the
optimizer always sees a finite, ordered infeasibility signal.

Touchdown noise is drawn from counter-indexed generator streams keyed by
``(seed, draw_index)``: parallel evaluation order can never change any
draw, and two designs validated with the same seed see the identical
noise sequence.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .catalog import MotorSpec
from .mdpso import CONTINUOUS, INTEGER, Dimension, SearchSpace
from .model import BOUNDS, VARIABLE_ORDER, DesignVector, SystemParams, build_system
from .sim import FLIGHT, STANCE, PhaseSegment, SimConfig, Trajectory, resample_segment, simulate

__all__ = [
    "NoiseSpec",
    "TrajectorySummary",
    "EvalReport",
    "MonteCarloStats",
    "NOISE_STD_RAD",
    "perturb_touchdown",
    "symmetry",
    "stance_symmetry",
    "energy",
    "summarize",
    "constraints_case1",
    "constraints_case2",
    "objective_case1",
    "objective_case2",
    "evaluate",
    "validate_monte_carlo",
    "Evaluator",
    "CONSTRAINT_NAMES",
]

# Touchdown-angle noise: 1.290 deg standard deviation puts 98% of draws
# within +-3 deg.
NOISE_STD_DEG = 1.290
NOISE_STD_RAD = math.radians(NOISE_STD_DEG)

# Constraint thresholds.
TD_ANGLE_MIN = 0.45  # rad
TD_ANGLE_MAX = 1.48  # rad
TD_DIFF_LIMIT_CASE2 = math.radians(0.859)
MID_HEIGHT_RATIO = 0.85
FLIGHT_DX_MAX_LEGS = 4.0  # flight displacement cap, in units of l_0
STANCE_DX_MIN = 1e-3  # m
YDOT_END_MAX = 5.0  # m/s
SYMMETRY_MAX = 0.3
FLIGHT_ROT_MIN = math.pi
FLIGHT_ROT_MAX = 2.0 * math.pi
PERIOD_MIN = 1.0 / 15.0  # s
PERIOD_MAX = 2.0  # s
MIN_CYCLES = 8
STALL_POWER_FLOOR = -0.001  # W
CASE2_FLIGHT_DX_WEIGHT = 5.0

# Residual assigned (on the normalized scale) to constraints whose
# ingredients are missing because the run terminated early.
MISSING_RESIDUAL = 10.0

OBJECTIVE_SENTINEL = 1e6

ENERGY_RESAMPLE_DT = 5e-5  # trapezoid grid for the power integral [s]

CONSTRAINT_NAMES: dict[str, str] = {
    "g1": "both touchdown angles above 0.45 rad",
    "g2": "touchdown angle difference below the noise scale",
    "g3": "both touchdown angles below 1.48 rad",
    "g4": "stance 1 midpoint height below 0.85x start height",
    "g5": "stance 1 midpoint height below 0.85x end height",
    "g6": "stance 1 ends ahead of the start",
    "g7": "body stays above ground in stance 1",
    "g8": "first flight travels at most 4 leg lengths",
    "g9": "body stays above ground in stance 2",
    "g10": "minimum forward travel per stance",
    "g11": "forward velocity at stance 1 end",
    "g12": "upward velocity at stance 1 end",
    "g13": "stance 1 end vertical velocity below 5 m/s",
    "g14": "stance 1 velocity symmetry below 0.3",
    "g15": "forward velocity at stance 2 end",
    "g16": "upward velocity at stance 2 end",
    "g17": "stance 2 end vertical velocity below 5 m/s",
    "g18": "stance 2 velocity symmetry below 0.3",
    "g19": "first flight rotates at least half a turn",
    "g20": "first flight rotates at most one turn",
    "g21": "first cycle period above 1/15 s",
    "g22": "first cycle period below 2 s",
    "g23": "at least 8 cycles completed",
    "g24": "stance 1 input power above the stall floor",
}


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian touchdown-angle noise: std in radians plus a stream seed."""

    epsilon: float = NOISE_STD_RAD
    seed: int = 0


def perturb_touchdown(theta_0: float, noise: NoiseSpec, draw_index: int) -> float:
    """First touchdown angle: theta_0 plus one seeded Gaussian draw.

    The draw comes from an independent generator stream keyed by
    ``(seed, draw_index)``, so any draw can be reproduced in isolation
    and evaluation order is irrelevant.
    """
    if noise.epsilon == 0.0:
        return theta_0
    rng = np.random.default_rng([int(noise.seed), int(draw_index)])
    return theta_0 + rng.normal(0.0, noise.epsilon)


def symmetry(xd_start: float, xd_end: float, yd_start: float, yd_end: float) -> float:
    """Velocity symmetry of one stance.

    ``S = (1 - xd_E/xd_S)^2 + (1 - |yd_E|/|yd_S|)^2``; the vertical term
    uses magnitudes because the vertical velocity reverses sign over a
    symmetric stance. Returns +inf when a start velocity is zero.
    """
    if xd_start == 0.0 or yd_start == 0.0:
        return math.inf
    return (1.0 - xd_end / xd_start) ** 2 + (1.0 - abs(yd_end) / abs(yd_start)) ** 2


def stance_symmetry(stance: PhaseSegment) -> float:
    """Velocity symmetry between the first and last samples of a stance."""
    if stance.kind != STANCE or len(stance.t) < 2:
        raise ValueError("stance_symmetry needs a stance segment with at least two samples")
    _, _, xd, yd = stance.xy_view()
    return symmetry(float(xd[0]), float(xd[-1]), float(yd[0]), float(yd[-1]))


def _segment_current(seg: PhaseSegment) -> np.ndarray:
    return seg.states[:, 4] if seg.kind == STANCE else seg.states[:, 6]


def _segment_energy(seg: PhaseSegment) -> float:
    """Trapezoidal integral of V * i_a over one segment.

    Integrates on the recorded samples, subdividing any gap wider than
    the resolution floor through the dense interpolant; keeping the
    recorded nodes makes the integral exactly additive across splits at
    sample times.
    """
    if len(seg.t) < 2:
        return 0.0
    gaps = np.diff(seg.t)
    if np.any(gaps > ENERGY_RESAMPLE_DT):
        pieces = [seg.t[:1]]
        for i, gap in enumerate(gaps):
            if gap > ENERGY_RESAMPLE_DT:
                k = int(math.ceil(gap / ENERGY_RESAMPLE_DT))
                pieces.append(np.linspace(seg.t[i], seg.t[i + 1], k + 1)[1:])
            else:
                pieces.append(seg.t[i + 1:i + 2])
        q = np.concatenate(pieces)
        dense = resample_segment(seg, q)
    else:
        dense = seg
    return float(np.trapezoid(dense.V * _segment_current(dense), dense.t))


def _cycle_segments(traj: Trajectory, cycle_index: int) -> tuple[PhaseSegment, PhaseSegment]:
    stances = traj.stance_segments()
    flights = traj.flight_segments()
    if cycle_index >= len(flights) or cycle_index >= len(stances):
        raise IndexError(f"trajectory has no cycle {cycle_index}")
    fl = flights[cycle_index]
    if fl.end_event is None or fl.end_event.kind != "touchdown":
        raise IndexError(f"cycle {cycle_index} did not complete (flight ended in "
                         f"{fl.end_event.kind if fl.end_event else 'nothing'})")
    return stances[cycle_index], fl


def energy(traj: Trajectory, cycle_index: int = 0) -> float:
    """Electrical energy drawn over one complete cycle (0-based index)."""
    st, fl = _cycle_segments(traj, cycle_index)
    return _segment_energy(st) + _segment_energy(fl)


@dataclass
class TrajectorySummary:
    """Per-run quantities the constraints and objectives consume.

    Missing quantities (the run ended before they existed) are NaN.
    All angles in radians, everything SI.
    """

    theta_td1: float = math.nan
    theta_td2: float = math.nan
    y_s1_start: float = math.nan
    y_s1_mid: float = math.nan
    y_s1_end: float = math.nan
    x_s1_end: float = math.nan
    min_y_s1: float = math.nan
    min_y_s2: float = math.nan
    xd_s1_start: float = math.nan
    xd_s1_end: float = math.nan
    yd_s1_start: float = math.nan
    yd_s1_end: float = math.nan
    xd_s2_start: float = math.nan
    xd_s2_end: float = math.nan
    yd_s2_start: float = math.nan
    yd_s2_end: float = math.nan
    sym_s1: float = math.nan
    sym_s2: float = math.nan
    dx_flight1: float = math.nan
    min_dx_stance: float = math.nan
    flight1_rotation: float = math.nan
    period1: float = math.nan
    min_power_s1: float = math.nan
    energy_cycle1: float = math.nan
    n_cycles: int = 0
    termination: str = ""


def _stance_completed(seg: PhaseSegment) -> bool:
    return seg.end_event is not None and seg.end_event.kind == "liftoff"


def _flight_completed(seg: PhaseSegment) -> bool:
    return seg.end_event is not None and seg.end_event.kind == "touchdown"


def summarize(traj: Trajectory, params: SystemParams) -> TrajectorySummary:
    """Extract the constraint/objective ingredients from a trajectory."""
    s = TrajectorySummary(n_cycles=traj.n_cycles, termination=traj.termination)
    stances = traj.stance_segments()
    flights = traj.flight_segments()
    if not stances:
        return s

    s1 = stances[0]
    x1, y1, xd1, yd1 = s1.xy_view()
    s.theta_td1 = float(s1.states[0, 0])
    s.y_s1_start = float(y1[0])
    s.min_y_s1 = float(np.min(y1))
    s.xd_s1_start = float(xd1[0])
    s.yd_s1_start = float(yd1[0])
    if _stance_completed(s1):
        t_mid = 0.5 * (s1.t[0] + s1.t[-1])
        mid = resample_segment(s1, np.array([t_mid]))
        s.y_s1_mid = float(mid.states[0, 2] * math.sin(mid.states[0, 0]))
        s.y_s1_end = float(y1[-1])
        s.x_s1_end = float(x1[-1])
        s.xd_s1_end = float(xd1[-1])
        s.yd_s1_end = float(yd1[-1])
        s.sym_s1 = symmetry(s.xd_s1_start, s.xd_s1_end, s.yd_s1_start, s.yd_s1_end)
        s.min_power_s1 = float(np.min(s1.V * s1.states[:, 4]))

    if flights and _flight_completed(flights[0]):
        f1 = flights[0]
        s.dx_flight1 = float(f1.states[-1, 0] - f1.states[0, 0])
        s.flight1_rotation = float(f1.states[-1, 4] - f1.states[0, 4])
        s.theta_td2 = float(f1.states[-1, 4]) % (2.0 * math.pi)
        s.period1 = float(f1.t[-1] - traj.t_start)
        try:
            s.energy_cycle1 = energy(traj, 0)
        except IndexError:
            pass

    if len(stances) >= 2:
        s2 = stances[1]
        _, y2, xd2, yd2 = s2.xy_view()
        s.min_y_s2 = float(np.min(y2))
        s.xd_s2_start = float(xd2[0])
        s.yd_s2_start = float(yd2[0])
        if _stance_completed(s2):
            s.xd_s2_end = float(xd2[-1])
            s.yd_s2_end = float(yd2[-1])
            s.sym_s2 = symmetry(s.xd_s2_start, s.xd_s2_end, s.yd_s2_start, s.yd_s2_end)
        # forward travel of every stance except the last started one
        dxs = []
        for seg in stances[:-1]:
            xs, _, _, _ = seg.xy_view()
            dxs.append(float(xs[-1] - xs[0]))
        if dxs:
            s.min_dx_stance = min(dxs)

    return s


def _residuals(summary: TrajectorySummary, params: SystemParams, case_id: int) -> dict[str, float]:
    """Constraint residual vector; residual <= 0 means satisfied."""
    td_diff_limit = NOISE_STD_RAD if case_id == 1 else TD_DIFF_LIMIT_CASE2
    l0 = params.l_0
    theta_0 = params.theta_0
    su = summary

    def entry(value: float, scale: float) -> float:
        if math.isnan(value):
            return MISSING_RESIDUAL * scale
        return value

    g: dict[str, float] = {}
    td_pair_min = min(su.theta_td1, su.theta_td2)  # nan propagates
    td_pair_max = max(su.theta_td1, su.theta_td2)
    if math.isnan(su.theta_td1) or math.isnan(su.theta_td2):
        td_pair_min = math.nan
        td_pair_max = math.nan
    g["g1"] = entry(TD_ANGLE_MIN - td_pair_min, TD_ANGLE_MIN)
    g["g2"] = entry(abs(theta_0 - su.theta_td2) - td_diff_limit if not math.isnan(su.theta_td2) else math.nan,
                    td_diff_limit)
    g["g3"] = entry(td_pair_max - TD_ANGLE_MAX, TD_ANGLE_MAX)
    g["g4"] = entry(su.y_s1_mid - MID_HEIGHT_RATIO * su.y_s1_start, 1.0)
    g["g5"] = entry(su.y_s1_mid - MID_HEIGHT_RATIO * su.y_s1_end, 1.0)
    g["g6"] = entry(-su.x_s1_end, 1.0)
    g["g7"] = entry(-su.min_y_s1, 1.0)
    dx_f1 = abs(su.dx_flight1) - FLIGHT_DX_MAX_LEGS * l0 if not math.isnan(su.dx_flight1) else math.nan
    if case_id == 2 and not math.isnan(dx_f1):
        dx_f1 *= CASE2_FLIGHT_DX_WEIGHT
    g["g8"] = entry(dx_f1, FLIGHT_DX_MAX_LEGS * l0)
    g["g9"] = entry(-su.min_y_s2, 1.0)
    g["g10"] = entry(STANCE_DX_MIN - su.min_dx_stance, STANCE_DX_MIN)
    g["g11"] = entry(-su.xd_s1_end, 1.0)
    g["g12"] = entry(-su.yd_s1_end, 1.0)
    g["g13"] = entry(su.yd_s1_end - YDOT_END_MAX, YDOT_END_MAX)
    g["g14"] = entry(su.sym_s1 - SYMMETRY_MAX if not math.isnan(su.sym_s1) else math.nan, SYMMETRY_MAX)
    g["g15"] = entry(-su.xd_s2_end, 1.0)
    g["g16"] = entry(-su.yd_s2_end, 1.0)
    g["g17"] = entry(su.yd_s2_end - YDOT_END_MAX, YDOT_END_MAX)
    g["g18"] = entry(su.sym_s2 - SYMMETRY_MAX if not math.isnan(su.sym_s2) else math.nan, SYMMETRY_MAX)
    g["g19"] = entry(FLIGHT_ROT_MIN - su.flight1_rotation, FLIGHT_ROT_MIN)
    g["g20"] = entry(su.flight1_rotation - FLIGHT_ROT_MAX, FLIGHT_ROT_MAX)
    g["g21"] = entry(PERIOD_MIN - su.period1, PERIOD_MIN)
    g["g22"] = entry(su.period1 - PERIOD_MAX, PERIOD_MAX)
    g["g23"] = entry(float(MIN_CYCLES - su.n_cycles), float(MIN_CYCLES))
    if case_id == 2:
        g["g24"] = entry(STALL_POWER_FLOOR - su.min_power_s1, abs(STALL_POWER_FLOOR))
    return g


def _constraint_scales(params: SystemParams, case_id: int) -> dict[str, float]:
    td_diff_limit = NOISE_STD_RAD if case_id == 1 else TD_DIFF_LIMIT_CASE2
    scales = {
        "g1": TD_ANGLE_MIN, "g2": td_diff_limit, "g3": TD_ANGLE_MAX,
        "g4": 1.0, "g5": 1.0, "g6": 1.0, "g7": 1.0,
        "g8": FLIGHT_DX_MAX_LEGS * params.l_0, "g9": 1.0, "g10": STANCE_DX_MIN,
        "g11": 1.0, "g12": 1.0, "g13": YDOT_END_MAX, "g14": SYMMETRY_MAX,
        "g15": 1.0, "g16": 1.0, "g17": YDOT_END_MAX, "g18": SYMMETRY_MAX,
        "g19": FLIGHT_ROT_MIN, "g20": FLIGHT_ROT_MAX,
        "g21": PERIOD_MIN, "g22": PERIOD_MAX, "g23": float(MIN_CYCLES),
    }
    if case_id == 2:
        scales["g24"] = abs(STALL_POWER_FLOOR)
    return scales


def net_violation(g: dict[str, float], params: SystemParams, case_id: int) -> float:
    """Equally weighted sum of positive raw residuals.

    All constraints carry weight one (the case-2 flight-distance factor
    is already folded into its residual); quantities that went missing
    entered the vector as a large residual on their threshold scale, so
    dead runs always rank behind anything that produced a gait.
    """
    return float(sum(max(0.0, v) for v in g.values()))


def constraints_case1(traj: Trajectory, design: DesignVector, params: SystemParams) -> dict[str, float]:
    """Residual vector g1..g23 for the touchdown-repeatability problem."""
    return _residuals(summarize(traj, params), params, case_id=1)


def constraints_case2(traj: Trajectory, design: DesignVector, params: SystemParams) -> dict[str, float]:
    """Residual vector g1..g24 for the energy problem."""
    return _residuals(summarize(traj, params), params, case_id=2)


def objective_case1(summary: TrajectorySummary, params: SystemParams) -> float:
    """Touchdown angle difference |theta_0 - theta_TD2| in radians."""
    if math.isnan(summary.theta_td2):
        return OBJECTIVE_SENTINEL
    return abs(params.theta_0 - summary.theta_td2)


def objective_case2(summary: TrajectorySummary, params: SystemParams) -> float:
    """First-cycle electrical energy in joules."""
    if math.isnan(summary.energy_cycle1):
        return OBJECTIVE_SENTINEL
    return summary.energy_cycle1


@dataclass
class EvalReport:
    """Everything the optimizer and the reports need about one run."""

    objective: float
    g: dict[str, float]
    feasible: bool
    net_violation: float
    summary: TrajectorySummary
    theta_TD1: float
    theta_TD2: float
    F: float
    n_cycles: int
    case_id: int
    termination: str

    @property
    def theta_diff_deg(self) -> float:
        if math.isnan(self.theta_TD2):
            return math.nan
        return math.degrees(abs(self.theta_TD1 - self.theta_TD2))

    def to_json_dict(self) -> dict:
        def safe(v: float):
            if isinstance(v, float) and not math.isfinite(v):
                return None
            return v

        su = self.summary
        return {
            "case_id": self.case_id,
            "objective": safe(self.objective),
            "feasible": self.feasible,
            "net_violation": safe(self.net_violation),
            "theta_td1_deg": safe(math.degrees(self.theta_TD1)),
            "theta_td2_deg": safe(math.degrees(self.theta_TD2)) if not math.isnan(self.theta_TD2) else None,
            "energy_J": safe(self.F) if not math.isnan(self.F) else None,
            "n_cycles": self.n_cycles,
            "termination": self.termination,
            "g": {k: safe(v) for k, v in self.g.items()},
            "summary": {k: safe(v) for k, v in vars(su).items()},
        }


def evaluate(design: DesignVector, case_id: int, noise: NoiseSpec, draw_index: int,
             catalog: tuple[MotorSpec, ...], sim_config: SimConfig = SimConfig()) -> EvalReport:
    """Simulate one design under one noise draw and score it."""
    if case_id not in (1, 2):
        raise ValueError(f"case_id must be 1 or 2, got {case_id}")
    params = build_system(design, catalog)
    theta_td1 = perturb_touchdown(params.theta_0, noise, draw_index)
    traj = simulate(params, design, theta_td1, sim_config)
    summary = summarize(traj, params)
    g = _residuals(summary, params, case_id)
    feasible = all(v <= 0.0 for v in g.values())
    violation = net_violation(g, params, case_id)
    objective = objective_case1(summary, params) if case_id == 1 else objective_case2(summary, params)
    return EvalReport(
        objective=objective,
        g=g,
        feasible=feasible,
        net_violation=violation,
        summary=summary,
        theta_TD1=theta_td1,
        theta_TD2=summary.theta_td2,
        F=summary.energy_cycle1,
        n_cycles=traj.n_cycles,
        case_id=case_id,
        termination=traj.termination,
    )


def design_search_space() -> SearchSpace:
    """The 17-variable mixed-discrete search space of the co-design problem."""
    dims = []
    for name in VARIABLE_ORDER:
        lo, hi = BOUNDS[name]
        kind = INTEGER if name == "motor_label" else CONTINUOUS
        dims.append(Dimension(name=name, kind=kind, lower=float(lo), upper=float(hi)))
    return SearchSpace(dims=tuple(dims))


@dataclass(frozen=True)
class Evaluator:
    """Picklable candidate evaluator for the swarm optimizer.

    Maps a flat design array plus the (iteration, particle) coordinates
    to an EvalReport. The noise draw index derives deterministically
    from those coordinates so reruns and worker counts cannot change any
    result. Two derivations are supported: ``per_iteration`` re-draws
    every particle's noise each iteration, ``per_particle`` fixes one
    draw per particle slot for the whole run (steadier ranking under
    noise).
    """

    case_id: int
    noise: NoiseSpec
    catalog: tuple[MotorSpec, ...]
    sim_config: SimConfig = SimConfig()
    draw_policy: str = "per_iteration"
    draw_stride: int = 1_000_000

    def __post_init__(self):
        if self.draw_policy not in ("per_iteration", "per_particle"):
            raise ValueError(f"unknown draw_policy {self.draw_policy!r}")

    def __call__(self, x, iteration: int = 0, particle: int = 0) -> EvalReport:
        design = DesignVector.from_array(x).clamped()
        if self.draw_policy == "per_iteration":
            draw_index = int(iteration) * self.draw_stride + int(particle)
        else:
            draw_index = int(particle)
        return evaluate(design, self.case_id, self.noise, draw_index,
                        self.catalog, self.sim_config)


@dataclass
class MonteCarloStats:
    """Per-run results of the noisy validation protocol, plus aggregates."""

    case_id: int
    noise_rad: np.ndarray
    theta_diff_deg: np.ndarray
    n_cycles: np.ndarray
    energy_J: np.ndarray
    feasible: np.ndarray

    @property
    def n(self) -> int:
        return len(self.noise_rad)

    def aggregates(self) -> dict:
        def stats(a: np.ndarray) -> dict:
            finite = a[np.isfinite(a)]
            if len(finite) == 0:
                return {"mean": None, "std": None, "max": None, "count": 0}
            return {"mean": float(np.mean(finite)), "std": float(np.std(finite)),
                    "max": float(np.max(finite)), "count": int(len(finite))}

        return {
            "case_id": self.case_id,
            "n_runs": self.n,
            "theta_diff_deg": stats(self.theta_diff_deg),
            "n_cycles": stats(self.n_cycles.astype(float)),
            "energy_J": stats(self.energy_J),
            "feasible_fraction": float(np.mean(self.feasible)),
        }


def _mc_task(args) -> tuple[int, float, float, int, float, bool]:
    design, case_id, noise, draw, catalog, sim_config = args
    report = evaluate(design, case_id, noise, draw, catalog, sim_config)
    theta_0 = math.radians(design.theta_0)
    theta_diff = (math.degrees(abs(theta_0 - report.summary.theta_td2))
                  if not math.isnan(report.summary.theta_td2) else math.nan)
    return (draw, report.theta_TD1, theta_diff, report.n_cycles,
            report.F if not math.isnan(report.F) else math.nan, report.feasible)


def validate_monte_carlo(design: DesignVector, case_id: int, n: int,
                         noise: NoiseSpec, catalog: tuple[MotorSpec, ...],
                         sim_config: SimConfig = SimConfig(),
                         workers: int = 1) -> MonteCarloStats:
    """Simulate a design ``n`` times with per-run touchdown noise.

    Runs use draw indices 0..n-1, so two designs validated with the same
    seed share the identical noise set.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    params = build_system(design, catalog)
    tasks = [(design, case_id, noise, draw, catalog, sim_config) for draw in range(n)]
    if workers > 1:
        import multiprocessing

        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            results = list(pool.map(_mc_task, tasks, chunksize=max(1, n // (4 * workers))))
    else:
        results = [_mc_task(t) for t in tasks]

    results.sort(key=lambda r: r[0])
    noise_draws = np.array([r[1] - params.theta_0 for r in results])
    return MonteCarloStats(
        case_id=case_id,
        noise_rad=noise_draws,
        theta_diff_deg=np.array([r[2] for r in results]),
        n_cycles=np.array([r[3] for r in results], dtype=int),
        energy_J=np.array([r[4] for r in results]),
        feasible=np.array([r[5] for r in results], dtype=bool),
    )
