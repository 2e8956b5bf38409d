"""Derivative-free tuning of gate parameters and grid sweeps.

The physics layers expose smooth but noisy objectives (resonance finding
inside every evaluation), so the maximizer is a seeded Nelder-Mead
simplex with a strict evaluation budget and a full trace for
reproducibility.  Sweeps evaluate a pipeline over a grid, optionally on a
thread pool, and keep rows in grid order.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .ensemble import EnsembleSpec, RandomUniform

_PENALTY = 1e6


class Objective(enum.Enum):
    UNCONDITIONAL = "unconditional"
    CONDITIONAL = "conditional"


class OptimizationFailed(RuntimeError):
    """No finite objective value was found; carries the evaluation trace."""

    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class OptSpec:
    """What to maximize, over which parameters, from which seed."""

    objective: Objective
    free_params: tuple[str, ...]
    bounds: dict[str, tuple[float, float]]
    seed_point: dict[str, float]
    budget: int = 100

    def __post_init__(self):
        if self.budget < 20:
            raise ValueError("evaluation budget must be at least 20")
        if not self.free_params:
            raise ValueError("need at least one free parameter")
        for name in self.free_params:
            if name not in self.bounds:
                raise ValueError(f"missing bounds for {name!r}")
            if name not in self.seed_point:
                raise ValueError(f"missing seed value for {name!r}")
            lo, hi = self.bounds[name]
            if not lo < hi:
                raise ValueError(f"empty bounds for {name!r}")
            if not lo <= self.seed_point[name] <= hi:
                raise ValueError(f"seed for {name!r} lies outside its bounds")


@dataclass(frozen=True)
class OptResult:
    best_point: dict[str, float]
    best_value: float
    trace: tuple[tuple[dict[str, float], float], ...]


def _objective_value(opt: OptSpec, outcome) -> float:
    if hasattr(outcome, "f_cj_cond"):
        if opt.objective is Objective.CONDITIONAL:
            return float(outcome.f_cj_cond)
        return float(outcome.f_cj)
    return float(outcome)


def maximize(opt: OptSpec, evaluate) -> OptResult:
    """Nelder-Mead maximization of `evaluate` over opt.free_params.

    `evaluate` receives a point mapping and returns either a bare value or
    an object with f_cj/f_cj_cond attributes (selected per the objective).
    Deterministic for a fixed spec; never returns a point worse than the
    seed because the seed is the first simplex vertex.
    """
    names = list(opt.free_params)
    x0 = np.array([opt.seed_point[n] for n in names], dtype=float)
    lows = np.array([opt.bounds[n][0] for n in names])
    highs = np.array([opt.bounds[n][1] for n in names])
    spans = highs - lows
    trace: list[tuple[dict[str, float], float]] = []

    def negated(x: np.ndarray) -> float:
        overshoot = np.maximum(lows - x, 0.0) + np.maximum(x - highs, 0.0)
        if np.any(overshoot > 0):
            return _PENALTY * (1.0 + float(overshoot.sum()))
        point = {n: float(v) for n, v in zip(names, x)}
        try:
            value = _objective_value(opt, evaluate(point))
        except (ArithmeticError, ValueError, RuntimeError):
            value = float("nan")
        trace.append((point, value))
        if not np.isfinite(value):
            return _PENALTY
        return -value

    simplex = [x0]
    for i in range(len(names)):
        step = np.zeros_like(x0)
        step[i] = 0.1 * spans[i]
        vertex = np.minimum(x0 + step, highs)
        if np.allclose(vertex, x0):
            vertex = x0 - step
        simplex.append(vertex)
    minimize(
        negated,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": np.array(simplex),
            "maxfev": opt.budget,
            "fatol": 1e-6,
            "xatol": 1e-4 * float(spans.max()),
        },
    )
    finite = [(p, v) for p, v in trace if np.isfinite(v)]
    if not finite:
        raise OptimizationFailed("objective returned no finite value", tuple(trace))
    best_point, best_value = max(finite, key=lambda item: item[1])
    return OptResult(best_point=dict(best_point), best_value=best_value, trace=tuple(trace))


def _as_row(outcome) -> dict:
    if isinstance(outcome, dict):
        return dict(outcome)
    return {"value": float(outcome)}


def sweep(param: str, grid, fixed: dict, evaluate, threads: int = 1) -> list[dict]:
    """Evaluate a pipeline over a grid; rows keep grid order.

    Each row carries the inputs, the outputs (mapping or a single value
    under "value"), and an "error" entry that is None on success and the
    failure message otherwise.
    """
    points = [dict(fixed, **{param: value}) for value in grid]

    def one(point: dict) -> dict:
        row = dict(point)
        try:
            row.update(_as_row(evaluate(dict(point))))
            row["error"] = None
        except Exception as exc:  # per-point capture is the contract
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    if threads <= 1:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, points))


def random_placement_average(
    base_spec: EnsembleSpec,
    evaluate,
    n_realizations: int = 100,
    seed0: int = 0,
    threads: int = 1,
) -> tuple[float, np.ndarray]:
    """Mean of `evaluate` over seeded random-placement realizations."""
    spacing = base_spec.spacing
    specs = [
        replace(base_spec, placement=RandomUniform(seed=seed0 + i, spacing=spacing))
        for i in range(n_realizations)
    ]
    if threads <= 1:
        values = [float(evaluate(s)) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = [float(v) for v in pool.map(evaluate, specs)]
    values = np.array(values)
    return float(values.mean()), values
