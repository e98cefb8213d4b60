"""Derivative-free minimizers for the variational loops.

SPSA uses the standard decaying gain schedules with Bernoulli perturbations;
Nelder-Mead is delegated to scipy behind the same configuration surface.
Both are seed-deterministic and report a best-so-far trace per iteration.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as scipy_minimize

METHODS = ("spsa", "nelder-mead")


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "spsa"
    iterations: int = 200
    seed: int = 0
    restarts: int = 1
    # SPSA gain schedule
    a: float = 0.6
    c: float = 0.15
    alpha: float = 0.602
    gamma: float = 0.101
    # Nelder-Mead initial simplex scale
    simplex_step: float = 0.5

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class OptimizeOutcome:
    x: np.ndarray
    value: float
    trace: list[float]


def _spsa(fn, x0: np.ndarray, config: OptimizerConfig, rng: np.random.Generator) -> OptimizeOutcome:
    x = np.asarray(x0, dtype=float).copy()
    best_x = x.copy()
    best_f = fn(x)
    stability = 0.1 * config.iterations
    trace = [best_f]
    for k in range(config.iterations):
        a_k = config.a / (k + 1 + stability) ** config.alpha
        c_k = config.c / (k + 1) ** config.gamma
        delta = rng.choice((-1.0, 1.0), size=x.size)
        diff = fn(x + c_k * delta) - fn(x - c_k * delta)
        x = x - a_k * (diff / (2.0 * c_k)) * delta
        f_x = fn(x)
        if f_x < best_f:
            best_f = f_x
            best_x = x.copy()
        trace.append(best_f)
    return OptimizeOutcome(x=best_x, value=best_f, trace=trace)


def _nelder_mead(fn, x0: np.ndarray, config: OptimizerConfig) -> OptimizeOutcome:
    x0 = np.asarray(x0, dtype=float)
    simplex = np.vstack([x0] + [x0 + config.simplex_step * np.eye(x0.size)[i]
                                for i in range(x0.size)])
    best = {"f": fn(x0), "x": x0.copy()}
    trace = [best["f"]]

    def wrapped(params):
        value = fn(params)
        if value < best["f"]:
            best["f"] = value
            best["x"] = np.array(params, dtype=float)
        return value

    scipy_minimize(wrapped, x0, method="Nelder-Mead",
                   callback=lambda xk: trace.append(best["f"]),
                   options={"maxiter": config.iterations, "initial_simplex": simplex,
                            "xatol": 1e-10, "fatol": 1e-12})
    trace.append(best["f"])
    return OptimizeOutcome(x=best["x"], value=best["f"], trace=trace)


def minimize(fn, x0, config: OptimizerConfig,
             rng: np.random.Generator | None = None) -> OptimizeOutcome:
    """Run one optimization from x0 under the configured method."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if config.method == "spsa":
        return _spsa(fn, np.asarray(x0, dtype=float), config, rng)
    return _nelder_mead(fn, np.asarray(x0, dtype=float), config)
