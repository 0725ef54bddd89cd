"""Conservation law plus Malus law as a sampler for singlet pairs.

The electron is read first along ``a`` and gives +1 or -1 with equal odds.
Angular-momentum conservation fixes the positron's value along ``a`` to the
opposite sign; the positron is then read along ``b``, and Malus' law says the
reading agrees with that inherited value with probability cos^2(theta/2).
The resulting average product is -cos(theta), the singlet correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError
from .montecarlo import CorrelationEstimate, SeedLike, run_chunks
from .state import UnitVector3


def canonical_angle(theta: float) -> float:
    """Fold any angle into [0, pi]."""
    if not math.isfinite(theta):
        raise ValidationError(f"angle must be finite, got {theta!r}")
    t = math.fmod(abs(theta), 2 * math.pi)
    return 2 * math.pi - t if t > math.pi else t


@dataclass(frozen=True)
class MalusParams:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", canonical_angle(self.theta))

    @classmethod
    def between(cls, a: UnitVector3, b: UnitVector3) -> "MalusParams":
        return cls(a.angle_to(b))


def malus_same_reading_prob(theta: float) -> float:
    """Probability that two successive spin readings at relative angle theta agree."""
    c = math.cos(canonical_angle(theta) / 2)
    return c * c


def malus_product_average(theta: float) -> float:
    """Average product of two successive readings, 2 cos^2(theta/2) - 1."""
    return 2.0 * malus_same_reading_prob(theta) - 1.0


def sequential_correlation_closed_form(theta: float) -> float:
    """Electron-positron average product: the Malus average with its sign reversed."""
    return -malus_product_average(theta)


@dataclass(frozen=True)
class PairSample:
    s_e: int
    s_p: int

    def __post_init__(self):
        if self.s_e not in (-1, 1) or self.s_p not in (-1, 1):
            raise ValidationError("pair outcomes must be -1 or +1")

    @property
    def product(self) -> int:
        return self.s_e * self.s_p


def _outcomes_from_uniforms(u: np.ndarray, p_keep: float):
    return kernels.pair_outcomes(np.ascontiguousarray(u[:, 0]), np.ascontiguousarray(u[:, 1]), p_keep)


def simulate_pairs(a: UnitVector3, b: UnitVector3, rng: np.random.Generator, size: int):
    """``size`` pairs as two int8 arrays; same draws as ``size`` calls of ``simulate_pair``."""
    u = rng.random((size, 2))
    return _outcomes_from_uniforms(u, malus_same_reading_prob(a.angle_to(b)))


def simulate_pair(a: UnitVector3, b: UnitVector3, rng: np.random.Generator) -> PairSample:
    """One pair; consumes two uniforms, first for the electron, then for Malus."""
    se, sp = simulate_pairs(a, b, rng, 1)
    return PairSample(int(se[0]), int(sp[0]))


def sequential_correlation_mc(
    a: UnitVector3, b: UnitVector3, n: int, seed: SeedLike, workers: int = 1
) -> CorrelationEstimate:
    """Monte Carlo average of s_e * s_p over ``n`` simulated pairs."""
    if n < 2:
        raise ValidationError("n must be at least 2")

    def chunk(rng, size):
        se, sp = simulate_pairs(a, b, rng, size)
        return int(np.dot(se.astype(np.int64), sp.astype(np.int64)))

    total = sum(run_chunks(chunk, n, seed, workers))
    return CorrelationEstimate.from_integer_sums(total, n, n)


def pair_marginals(
    a: UnitVector3, b: UnitVector3, n: int, seed: SeedLike
) -> tuple[CorrelationEstimate, CorrelationEstimate]:
    """Mean electron and positron readings (both should vanish)."""

    def chunk(rng, size):
        se, sp = simulate_pairs(a, b, rng, size)
        return np.array([se.sum(dtype=np.int64), sp.sum(dtype=np.int64)])

    total = sum(run_chunks(chunk, n, seed))
    return (
        CorrelationEstimate.from_integer_sums(total[0], n, n),
        CorrelationEstimate.from_integer_sums(total[1], n, n),
    )
