"""Mixed-discrete particle swarm optimization with feasibility ranking.

Problem-agnostic: the evaluator maps a position vector (plus iteration
and particle indices, so it can derive deterministic per-evaluation
noise) to any object exposing ``objective``, ``net_violation`` and
``feasible``. Integer dimensions are kept continuous inside the swarm
and rounded to the nearest integer at evaluation time.

Ranking is feasibility-first: any feasible candidate beats any
infeasible one, feasible candidates compare by objective, infeasible
ones by net constraint violation. The run stops when the population's
best net violation stalls for ``stall_infeasible`` iterations before any
feasible point exists, when the best feasible objective stalls for
``stall_feasible`` iterations, or at the iteration cap.

Population evaluation is embarrassingly parallel; the swarm update is a
serial barrier per iteration, so results are independent of worker
count and completion order.
"""

from __future__ import annotations

import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

__all__ = [
    "Dimension",
    "SearchSpace",
    "SwarmConfig",
    "IterationStats",
    "OptimizationResult",
    "FailedFitness",
    "is_better",
    "rank",
    "optimize",
]

CONTINUOUS = "continuous"
INTEGER = "integer"


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str  # continuous | integer
    lower: float
    upper: float
    init: str = "uniform"  # uniform | log: initial sampling distribution

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, INTEGER):
            raise ValueError(f"unknown dimension kind {self.kind!r}")
        if not self.lower < self.upper:
            raise ValueError(f"dimension {self.name}: lower must be < upper")
        if self.kind == INTEGER and (self.lower != int(self.lower) or self.upper != int(self.upper)):
            raise ValueError(f"integer dimension {self.name} needs integer bounds")
        if self.init not in ("uniform", "log"):
            raise ValueError(f"unknown init distribution {self.init!r}")
        if self.init == "log" and self.lower <= 0:
            raise ValueError(f"log-initialized dimension {self.name} needs positive bounds")


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple[Dimension, ...]

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lower for d in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.upper for d in self.dims])

    @property
    def is_integer(self) -> np.ndarray:
        return np.array([d.kind == INTEGER for d in self.dims])

    def evaluation_point(self, x: np.ndarray) -> np.ndarray:
        """Clamp to bounds and round integer dimensions."""
        out = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        ints = self.is_integer
        out[ints] = np.clip(np.rint(out[ints]), self.lower[ints], self.upper[ints])
        return out


@dataclass(frozen=True)
class SwarmConfig:
    population: int = 128
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    velocity_clamp: float = 0.5  # max |v| as a fraction of each dimension's range
    max_iterations: int = 200
    stall_infeasible: int = 15
    stall_feasible: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if min(self.inertia, self.cognitive, self.social, self.velocity_clamp) <= 0:
            raise ValueError("swarm coefficients must be positive")


@dataclass(frozen=True)
class FailedFitness:
    """Stand-in fitness for evaluator crashes: maximally infeasible."""

    objective: float = math.inf
    net_violation: float = math.inf
    feasible: bool = False
    error: str = ""


@dataclass
class IterationStats:
    iteration: int
    best_feasible_objective: float  # running best; NaN until a feasible point exists
    min_net_violation: float  # running minimum over all evaluations so far
    n_feasible: int  # feasible candidates in this iteration


@dataclass
class OptimizationResult:
    best_position: np.ndarray  # evaluation point (integers rounded)
    best_fitness: object
    history: list[IterationStats]
    iterations: int
    termination_reason: str

    @property
    def feasible(self) -> bool:
        return bool(self.best_fitness is not None and self.best_fitness.feasible)


def _key(c, index: int) -> tuple:
    obj = c.objective if math.isfinite(getattr(c, "objective", math.inf)) else math.inf
    vio = c.net_violation if math.isfinite(getattr(c, "net_violation", math.inf)) else math.inf
    if c.feasible:
        return (0, obj, index)
    return (1, vio, index)


def rank(candidates) -> list[int]:
    """Indices of candidates from best to worst, feasibility first."""
    if not candidates:
        raise ValueError("rank requires at least one candidate")
    return sorted(range(len(candidates)), key=lambda i: _key(candidates[i], i))


def is_better(a, b) -> bool:
    """True if fitness ``a`` strictly dominates ``b`` in the swarm ordering."""
    if a.feasible and not b.feasible:
        return True
    if b.feasible and not a.feasible:
        return False
    if a.feasible:
        return a.objective < b.objective
    av = a.net_violation if math.isfinite(a.net_violation) else math.inf
    bv = b.net_violation if math.isfinite(b.net_violation) else math.inf
    return av < bv


def _eval_one(evaluator, task):
    x, iteration, particle = task
    try:
        return evaluator(x, iteration, particle)
    except Exception as exc:  # candidate must never abort the run
        return FailedFitness(error=repr(exc))


def optimize(space: SearchSpace, evaluator, config: SwarmConfig = SwarmConfig(),
             workers: int = 1, on_iteration=None) -> OptimizationResult:
    """Run the swarm until a stall rule or the iteration cap fires.

    ``evaluator(x, iteration, particle)`` must be deterministic in its
    arguments (any stochastic evaluation derives its randomness from the
    indices). With ``workers > 1`` it must be picklable.
    """
    rng = np.random.default_rng(config.seed)
    n = space.n
    lower = space.lower
    upper = space.upper
    span = upper - lower
    v_max = config.velocity_clamp * span

    pos = lower + rng.random((config.population, n)) * span
    for j, dim in enumerate(space.dims):
        if dim.init == "log":
            u = rng.random(config.population)
            pos[:, j] = np.exp(math.log(dim.lower) + u * (math.log(dim.upper) - math.log(dim.lower)))
    vel = (rng.random((config.population, n)) * 2.0 - 1.0) * 0.1 * span

    pbest_pos = pos.copy()
    pbest_fit: list = [None] * config.population
    gbest_pos: np.ndarray | None = None
    gbest_eval_x: np.ndarray | None = None
    gbest_fit = None

    pool = None
    if workers > 1:
        ctx = multiprocessing.get_context("fork")
        pool = ProcessPoolExecutor(max_workers=workers, mp_context=ctx)

    history: list[IterationStats] = []
    run_min_violation = math.inf
    prev_pop_min_violation = math.inf
    best_feasible_objective = math.nan
    stall_inf = 0
    stall_fea = 0
    termination = "max_iterations"
    iteration = 0

    try:
        for iteration in range(1, config.max_iterations + 1):
            eval_points = [space.evaluation_point(pos[i]) for i in range(config.population)]
            tasks = [(eval_points[i], iteration - 1, i) for i in range(config.population)]
            if pool is not None:
                fits = list(pool.map(partial(_eval_one, evaluator), tasks,
                                     chunksize=max(1, config.population // (4 * workers))))
            else:
                fits = [_eval_one(evaluator, t) for t in tasks]

            n_feasible = 0
            pop_min_violation = math.inf
            for i, fit in enumerate(fits):
                if fit.feasible:
                    n_feasible += 1
                vio = fit.net_violation if math.isfinite(fit.net_violation) else math.inf
                if vio < run_min_violation:
                    run_min_violation = vio
                if vio < pop_min_violation:
                    pop_min_violation = vio
                if pbest_fit[i] is None or is_better(fit, pbest_fit[i]):
                    pbest_fit[i] = fit
                    pbest_pos[i] = pos[i].copy()
                if gbest_fit is None or is_better(fit, gbest_fit):
                    gbest_fit = fit
                    gbest_pos = pos[i].copy()
                    gbest_eval_x = eval_points[i]

            improved_feasible = False
            if gbest_fit is not None and gbest_fit.feasible:
                if math.isnan(best_feasible_objective) or gbest_fit.objective < best_feasible_objective:
                    best_feasible_objective = gbest_fit.objective
                    improved_feasible = True

            history.append(IterationStats(
                iteration=iteration,
                best_feasible_objective=best_feasible_objective,
                min_net_violation=run_min_violation if math.isfinite(run_min_violation) else math.inf,
                n_feasible=n_feasible,
            ))
            if on_iteration is not None:
                on_iteration(history[-1])

            # stall-based termination: while everything is infeasible,
            # compare consecutive population-minimum violations; once a
            # feasible point exists, watch the (monotone) best feasible
            # objective.
            if gbest_fit is not None and gbest_fit.feasible:
                stall_fea = 0 if improved_feasible else stall_fea + 1
                if stall_fea >= config.stall_feasible:
                    termination = "stalled_feasible"
                    break
            else:
                stall_inf = 0 if pop_min_violation < prev_pop_min_violation else stall_inf + 1
                if stall_inf >= config.stall_infeasible:
                    termination = "stalled_infeasible"
                    break
            prev_pop_min_violation = pop_min_violation

            # swarm update (serial barrier)
            r1 = rng.random((config.population, n))
            r2 = rng.random((config.population, n))
            vel = (config.inertia * vel
                   + config.cognitive * r1 * (pbest_pos - pos)
                   + config.social * r2 * (gbest_pos - pos))
            np.clip(vel, -v_max, v_max, out=vel)
            raw = pos + vel
            pos = np.clip(raw, lower, upper)
            # kill velocity into a bound so particles do not pile up on it
            vel[raw != pos] = 0.0
    finally:
        if pool is not None:
            pool.shutdown()

    return OptimizationResult(
        best_position=gbest_eval_x if gbest_eval_x is not None else space.evaluation_point(pos[0]),
        best_fitness=gbest_fit,
        history=history,
        iterations=iteration,
        termination_reason=termination,
    )
