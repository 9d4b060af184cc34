"""
Semi-interquartile ranges of sigma_x and sigma_y for pure qubit states.

States are written in the sigma_x eigenbasis,
|psi> = sqrt(p) |-x> + e^{i theta} sqrt(1 - p) |+x>, with
|+-y> = (|0> +- i|1>)/sqrt(2), which gives
P(sigma_y = +-1) = [1 +- 2 sqrt(p (1 - p)) sin(theta)] / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import discrete_quantile

__all__ = [
    "QubitState",
    "TwoPointDist",
    "QubitTheoremReport",
    "pauli_distribution",
    "pauli_siqr",
    "siqr_grid",
    "verify_qubit_theorem",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QubitState:
    """Weight p on |-x> and relative phase theta (reduced to [0, 2 pi))."""

    p: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", math.fmod(self.theta, _TWO_PI) % _TWO_PI)

    def vector(self) -> np.ndarray:
        """Amplitudes in the computational basis (|0>, |1>)."""
        minus_x = np.array([1.0, -1.0]) / math.sqrt(2)
        plus_x = np.array([1.0, 1.0]) / math.sqrt(2)
        return math.sqrt(self.p) * minus_x + np.exp(1j * self.theta) * math.sqrt(1 - self.p) * plus_x


@dataclass(frozen=True)
class TwoPointDist:
    """Probabilities of the outcomes -1 and +1."""

    prob_minus: float
    prob_plus: float

    def __post_init__(self):
        if self.prob_minus < 0 or self.prob_plus < 0 or abs(self.prob_minus + self.prob_plus - 1) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")

    def outcomes(self):
        return [(-1.0, self.prob_minus), (1.0, self.prob_plus)]


def pauli_distribution(s: QubitState, axis: str) -> TwoPointDist:
    if axis == "x":
        return TwoPointDist(s.p, 1.0 - s.p)
    if axis == "y":
        r = 2.0 * math.sqrt(s.p * (1.0 - s.p)) * math.sin(s.theta)
        return TwoPointDist(0.5 * (1.0 - r), 0.5 * (1.0 + r))
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def pauli_siqr(dist: TwoPointDist) -> float:
    """
    (Q3 - Q1) / 2 for a +-1 observable: 0 if one outcome has probability
    above 3/4, else 1.

    Q3 = inf{a : F(a) > 3/4}; Q1 = inf{a : F(a) >= 1/4}, its mirror image,
    so the outcomes -1 and +1 are treated alike at the 3/4 boundary.
    """
    outcomes = dist.outcomes()
    q1 = discrete_quantile(outcomes, 0.25, inclusive=True)
    q3 = discrete_quantile(outcomes, 0.75)
    return 0.5 * (q3 - q1)


def siqr_grid(prob_minus: np.ndarray) -> np.ndarray:
    """Vectorised :func:`pauli_siqr` for arrays of P(-1)."""
    pm = np.asarray(prob_minus, dtype=float)
    return np.where(np.maximum(pm, 1.0 - pm) > 0.75, 0, 1)


@dataclass(frozen=True)
class QubitTheoremReport:
    passed: bool
    points: int
    counterexample_count: int
    min_sum: float
    counterexamples: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "points": self.points,
            "counterexample_count": self.counterexample_count,
            "min_sum": self.min_sum,
            "counterexamples": [
                {"p": p, "theta": t, "siqr_x": sx, "siqr_y": sy} for p, t, sx, sy in self.counterexamples
            ],
        }


def verify_qubit_theorem(grid_p: int = 1001, grid_theta: int = 1001, keep: int = 20) -> QubitTheoremReport:
    """
    Check SIQR(sigma_x)^2 + SIQR(sigma_y)^2 >= 1 on a (p, theta) grid.

    p runs over linspace(0, 1, grid_p) and theta over grid_theta points of
    [0, 2 pi); p = 1/4, 3/4 and theta = pi/2, 3 pi/2 are always included.
    Up to ``keep`` counterexamples are returned, smallest p first.
    """
    if grid_p < 2 or grid_theta < 2:
        raise ValueError("grid sizes must be at least 2")
    ps = np.union1d(np.linspace(0.0, 1.0, grid_p), [0.25, 0.75])
    thetas = np.union1d(np.linspace(0.0, _TWO_PI, grid_theta, endpoint=False), [0.5 * math.pi, 1.5 * math.pi])
    P, T = np.meshgrid(ps, thetas, indexing="ij")
    sx = siqr_grid(P)
    r = 2.0 * np.sqrt(P * (1.0 - P)) * np.sin(T)
    sy = siqr_grid(0.5 * (1.0 - r))
    total = sx ** 2 + sy ** 2
    bad = np.argwhere(total < 1)
    examples = [
        (float(ps[i]), float(thetas[j]), float(sx[i, j]), float(sy[i, j])) for i, j in bad[:keep]
    ]
    return QubitTheoremReport(
        passed=bad.shape[0] == 0,
        points=int(total.size),
        counterexample_count=int(bad.shape[0]),
        min_sum=float(total.min()),
        counterexamples=examples,
    )
