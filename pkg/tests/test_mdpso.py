import math
from dataclasses import dataclass

import numpy as np
import pytest

from tdslip.mdpso import (
    CONTINUOUS,
    INTEGER,
    Dimension,
    FailedFitness,
    OptimizationResult,
    SearchSpace,
    SwarmConfig,
    is_better,
    optimize,
    rank,
)


@dataclass(frozen=True)
class Fit:
    objective: float
    net_violation: float
    feasible: bool


def box(n, lo=-5.0, hi=5.0, n_int=0):
    dims = [Dimension(f"x{i}", INTEGER if i < n_int else CONTINUOUS, lo, hi)
            for i in range(n)]
    return SearchSpace(dims=tuple(dims))


def sphere(x, iteration=0, particle=0):
    return Fit(objective=float(np.sum(np.square(x))), net_violation=0.0, feasible=True)


def constrained_1d(x, iteration=0, particle=0):
    # minimize x^2 subject to 1 - x <= 0; optimum x* = 1
    g = 1.0 - x[0]
    return Fit(objective=float(x[0] ** 2), net_violation=max(0.0, g), feasible=g <= 0)


class TestRank:
    def test_feasible_beats_infeasible(self):
        c = [Fit(2.0, 0.0, True), Fit(-10.0, 0.1, False)]
        assert rank(c) == [0, 1]

    def test_feasibles_by_objective(self):
        c = [Fit(3.0, 0.0, True), Fit(1.0, 0.0, True)]
        assert rank(c) == [1, 0]

    def test_infeasibles_by_violation(self):
        c = [Fit(0.0, 0.5, False), Fit(0.0, 0.2, False)]
        assert rank(c) == [1, 0]

    def test_stable_tie_break_by_index(self):
        c = [Fit(1.0, 0.0, True), Fit(1.0, 0.0, True), Fit(0.3, 0.3, False), Fit(0.9, 0.3, False)]
        assert rank(c) == [0, 1, 2, 3]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rank([])

    def test_is_better_matrix(self):
        feas_good = Fit(1.0, 0.0, True)
        feas_bad = Fit(2.0, 0.0, True)
        infeas_close = Fit(0.0, 0.1, False)
        infeas_far = Fit(0.0, 0.9, False)
        assert is_better(feas_good, feas_bad)
        assert is_better(feas_bad, infeas_close)
        assert is_better(infeas_close, infeas_far)
        assert not is_better(infeas_close, feas_bad)


class TestSearchSpace:
    def test_evaluation_point_rounds_and_clamps(self):
        space = box(3, n_int=1)
        x = space.evaluation_point(np.array([2.6, 7.0, -9.0]))
        assert x[0] == 3.0
        assert x[1] == 5.0
        assert x[2] == -5.0

    def test_invalid_dimensions_rejected(self):
        with pytest.raises(ValueError):
            Dimension("a", "weird", 0, 1)
        with pytest.raises(ValueError):
            Dimension("a", CONTINUOUS, 1, 1)
        with pytest.raises(ValueError):
            Dimension("a", INTEGER, 0.5, 2)
        with pytest.raises(ValueError):
            Dimension("a", CONTINUOUS, -1, 1, init="log")


class TestOptimize:
    def test_mixed_sphere_reaches_optimum(self):
        space = box(4, n_int=1)
        finals = []
        for seed in range(20):
            cfg = SwarmConfig(population=32, max_iterations=200, seed=seed,
                              stall_feasible=50, stall_infeasible=50)
            res = optimize(space, sphere, cfg)
            finals.append(res.best_fitness.objective)
        assert np.median(finals) < 1e-3

    def test_constrained_boundary_optimum(self):
        space = SearchSpace(dims=(Dimension("x", CONTINUOUS, -4.0, 4.0),))
        cfg = SwarmConfig(population=24, max_iterations=200, seed=3,
                          stall_feasible=40, stall_infeasible=40)
        res = optimize(space, constrained_1d, cfg)
        assert res.feasible
        assert res.best_position[0] == pytest.approx(1.0, abs=1e-3)
        assert res.best_fitness.objective == pytest.approx(1.0, abs=2e-3)

    def test_deterministic_history(self):
        space = box(3)
        cfg = SwarmConfig(population=16, max_iterations=30, seed=11,
                          stall_feasible=50, stall_infeasible=50)
        a = optimize(space, sphere, cfg)
        b = optimize(space, sphere, cfg)
        assert a.iterations == b.iterations
        assert np.array_equal(a.best_position, b.best_position)
        for ha, hb in zip(a.history, b.history):
            assert ha == hb

    def test_bounds_respected_under_adversarial_velocities(self):
        space = SearchSpace(dims=(
            Dimension("i", INTEGER, -3, 3),
            Dimension("c", CONTINUOUS, 0.0, 1e-3),
            Dimension("w", CONTINUOUS, -1e6, 1e6),
        ))
        seen = []

        def recorder(x, iteration=0, particle=0):
            seen.append(np.array(x))
            return sphere(x)

        cfg = SwarmConfig(population=8, max_iterations=25, seed=2, velocity_clamp=5.0,
                          stall_feasible=100, stall_infeasible=100)
        optimize(space, recorder, cfg)
        lo, hi = space.lower, space.upper
        for x in seen:
            assert np.all(x >= lo) and np.all(x <= hi)
            assert x[0] == round(x[0])

    def test_history_monotonicity(self):
        space = box(4, n_int=1)
        cfg = SwarmConfig(population=16, max_iterations=60, seed=9,
                          stall_feasible=100, stall_infeasible=100)
        res = optimize(space, sphere, cfg)
        objs = [h.best_feasible_objective for h in res.history]
        vios = [h.min_net_violation for h in res.history]
        assert all(b <= a + 1e-15 for a, b in zip(objs, objs[1:]))
        assert all(b <= a for a, b in zip(vios, vios[1:]))
        assert len(res.history) == res.iterations

    def test_feasible_stall_terminates(self):
        space = box(2)
        cfg = SwarmConfig(population=8, max_iterations=500, seed=1,
                          stall_feasible=5, stall_infeasible=15)
        res = optimize(space, sphere, cfg)
        assert res.termination_reason in ("stalled_feasible", "max_iterations")
        assert res.iterations < 500

    def test_infeasible_stall_terminates(self):
        def hopeless(x, iteration=0, particle=0):
            return Fit(objective=0.0, net_violation=1.0, feasible=False)

        space = box(2)
        cfg = SwarmConfig(population=8, max_iterations=500, seed=1)
        res = optimize(space, hopeless, cfg)
        assert res.termination_reason == "stalled_infeasible"
        assert res.iterations <= 20
        assert not res.feasible

    def test_evaluator_crash_becomes_failed_fitness(self):
        calls = {"n": 0}

        def flaky(x, iteration=0, particle=0):
            calls["n"] += 1
            if particle == 0:
                raise RuntimeError("boom")
            return sphere(x)

        space = box(2)
        cfg = SwarmConfig(population=6, max_iterations=10, seed=4,
                          stall_feasible=50, stall_infeasible=50)
        res = optimize(space, flaky, cfg)
        assert res.feasible  # other particles carried the run
        assert calls["n"] == 6 * res.iterations

    def test_noise_draw_coordinates_passed_through(self):
        got = set()

        def spy(x, iteration=0, particle=0):
            got.add((iteration, particle))
            return sphere(x)

        space = box(2)
        cfg = SwarmConfig(population=4, max_iterations=3, seed=0,
                          stall_feasible=50, stall_infeasible=50)
        res = optimize(space, spy, cfg)
        assert (0, 0) in got and (res.iterations - 1, 3) in got

    def test_workers_do_not_change_results(self):
        space = box(3, n_int=1)
        cfg = SwarmConfig(population=8, max_iterations=15, seed=21,
                          stall_feasible=50, stall_infeasible=50)
        a = optimize(space, sphere, cfg, workers=1)
        b = optimize(space, sphere, cfg, workers=2)
        assert np.array_equal(a.best_position, b.best_position)
        assert a.history == b.history


class TestConfigValidation:
    def test_population_minimum(self):
        with pytest.raises(ValueError):
            SwarmConfig(population=1)

    def test_positive_coefficients(self):
        with pytest.raises(ValueError):
            SwarmConfig(inertia=0.0)
