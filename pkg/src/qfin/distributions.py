"""Discretize probability distributions and load them into qubit registers."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .simulator import Circuit, GateOp, ry, x


@dataclass(frozen=True)
class DiscretizedDistribution:
    """Probabilities on a 2^n grid with an affine index-to-value map z_i = slope*i + intercept."""

    n_qubits: int
    probabilities: np.ndarray
    slope: float
    intercept: float

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.size != 1 << self.n_qubits:
            raise ValueError("probabilities length must be 2**n_qubits")
        if np.any(p < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")

    @property
    def grid(self) -> np.ndarray:
        return self.slope * np.arange(1 << self.n_qubits) + self.intercept


def discretize_normal(mean: float, stddev: float, n_qubits: int,
                      low: float, high: float) -> DiscretizedDistribution:
    """Equally spaced grid on [low, high]; probabilities proportional to the density."""
    if stddev <= 0.0:
        raise ValueError("stddev must be positive")
    if not low < high:
        raise ValueError("low must be less than high")
    n_points = 1 << n_qubits
    grid = np.linspace(low, high, n_points)
    weights = norm.pdf(grid, loc=mean, scale=stddev)
    probs = weights / weights.sum()
    slope = (high - low) / (n_points - 1) if n_points > 1 else 0.0
    return DiscretizedDistribution(n_qubits, probs, slope=slope, intercept=low)


def loader_ops(dist: DiscretizedDistribution) -> tuple[GateOp, ...]:
    """Exact conditional-rotation tree preparing sum_i sqrt(p_i)|i>.

    Qubit j is rotated by the conditional probability of its bit given the
    already-prepared lower bits; controls on a zero bit are wrapped in X.
    Amplitudes come out real and nonnegative. Gate count is exponential in n,
    which is fine at desk scale.
    """
    p = np.asarray(dist.probabilities, dtype=float)
    n = dist.n_qubits
    ops: list[GateOp] = []
    idx = np.arange(p.size)
    for j in range(n):
        block = 1 << j
        angles = np.zeros(block)
        for prefix in range(block):
            members = p[(idx & (block - 1)) == prefix]
            mass = members.sum()
            if mass <= 0.0:
                continue
            mass_one = p[(idx & ((block << 1) - 1)) == prefix + block].sum()
            ratio = min(1.0, max(0.0, mass_one / mass))
            angles[prefix] = 2.0 * math.asin(math.sqrt(ratio))
        if j == 0:
            ops.append(ry(angles[0], 0))
            continue
        if np.allclose(angles, angles[0], atol=1e-15):
            ops.append(ry(angles[0], j))
            continue
        lower = tuple(range(j))
        for prefix in range(block):
            if angles[prefix] == 0.0:
                continue
            flips = [x(q) for q in lower if not (prefix >> q) & 1]
            ops.extend(flips)
            ops.append(ry(angles[prefix], j, controls=lower))
            ops.extend(flips)
    return tuple(ops)


def loader_circuit(dist: DiscretizedDistribution) -> Circuit:
    return Circuit(dist.n_qubits, loader_ops(dist))
