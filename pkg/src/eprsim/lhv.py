"""Local hidden-variable models, Bell's three-axis inequality and CHSH.

A model draws a batch of hidden parameters and answers, for each parameter
and each measurement axis, with a deterministic +1/-1 for the electron and
for the positron. The correlation of a model is the average product of the
two answers. Monte Carlo evaluations of several correlations at once share
one batch of hidden parameters, so the empirical distribution is itself a
valid hidden-parameter density and the LHV bounds hold draw by draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import ModelContractError, ValidationError
from .montecarlo import CorrelationEstimate, SeedLike, as_substream, map_ordered, run_chunks
from .state import UnitVector3

MIN_SAMPLES = 100
CLOSED_FORM_TOL = 1e-9


@dataclass(frozen=True)
class CorrelationFn:
    evaluate: Callable[[UnitVector3, UnitVector3], float]
    name: str = ""

    def __call__(self, a: UnitVector3, b: UnitVector3) -> float:
        return self.evaluate(a, b)


@dataclass(frozen=True)
class HiddenVariableModel:
    """Hidden-parameter sampler plus per-particle response functions.

    ``sample_lambda(rng, n)`` returns a batch of ``n`` opaque parameters;
    ``response_e(axis, lams)`` and ``response_p(axis, lams)`` return int8
    arrays of +/-1. ``electron_signs``, when given, is a batched fast path
    returning a (k, n) array of electron responses for k axes.
    """

    name: str
    sample_lambda: Callable[[np.random.Generator, int], Any]
    response_e: Callable[[UnitVector3, Any], np.ndarray]
    response_p: Callable[[UnitVector3, Any], np.ndarray]
    exact_correlation: Optional[Callable[[UnitVector3, UnitVector3], float]] = None
    electron_signs: Optional[Callable[[Any, np.ndarray], np.ndarray]] = None
    electron_gram: Optional[Callable[[Any, np.ndarray], np.ndarray]] = None
    anticorrelated: bool = False

    def correlation_fn(self) -> CorrelationFn:
        if self.exact_correlation is None:
            raise ValidationError(f"model {self.name!r} has no closed-form correlation")
        return CorrelationFn(self.exact_correlation, f"{self.name}-exact")


@dataclass(frozen=True)
class BellTestResult:
    lhs: float
    rhs: float
    holds: bool
    margin: float
    stderr: float = 0.0


@dataclass(frozen=True)
class BellScanRow:
    theta1: float  # degrees
    theta2: float
    result: BellTestResult


@dataclass(frozen=True)
class BellScan:
    rows: list[BellScanRow]
    worst: BellScanRow

    @property
    def violations(self) -> list[BellScanRow]:
        return [r for r in self.rows if not r.result.holds]


@dataclass(frozen=True)
class ChshEstimate:
    value: float
    stderr: float
    n: int


@dataclass(frozen=True)
class IdentityCheck:
    rhs: CorrelationEstimate  # MC average of s_e(a) s_e(b) [s_e(b) s_e(c) - 1]
    lhs_exact: float  # P(a,b) - P(a,c) from the closed form
    residual: float
    stderr: float
    paired_residual: float  # RHS minus LHS evaluated on the same draws
    paired_max_abs: float

    def within(self, k: float = 3.0) -> bool:
        return abs(self.residual) <= k * self.stderr


def _as_array(axes: Sequence[UnitVector3]) -> np.ndarray:
    return np.ascontiguousarray([ax.as_array() for ax in axes], dtype=float)


def _checked(resp: Any, n: int, who: str) -> np.ndarray:
    arr = np.asarray(resp)
    if arr.shape != (n,) or not np.all((arr == 1) | (arr == -1)):
        raise ModelContractError(f"{who} must return {n} values in {{-1, +1}}")
    return arr.astype(np.int8)


def responses(model: HiddenVariableModel, lams: Any, axes: Sequence[UnitVector3], n: int):
    """Electron and positron responses, each (len(axes), n) int8."""
    if model.electron_signs is not None and model.anticorrelated:
        e = model.electron_signs(lams, _as_array(axes))
        return e, -e
    e = np.stack([_checked(model.response_e(ax, lams), n, "response_e") for ax in axes])
    p = np.stack([_checked(model.response_p(ax, lams), n, "response_p") for ax in axes])
    return e, p


def cross_sums(model: HiddenVariableModel, lams: Any, axes: Sequence[UnitVector3], n: int) -> np.ndarray:
    """C[i, j] = sum over draws of s_e(axes[i]) * s_p(axes[j]), exact int64."""
    if model.electron_gram is not None and model.anticorrelated:
        return -np.asarray(model.electron_gram(lams, _as_array(axes)), dtype=np.int64)
    e, p = responses(model, lams, axes, n)
    return e.astype(np.int64) @ p.astype(np.int64).T


# -- built-in correlations and models ---------------------------------------


def qm_correlation() -> CorrelationFn:
    """Singlet prediction: average product is minus the dot product of the axes."""
    return CorrelationFn(lambda a, b: -a.cos_angle(b), "qm")


def _sphere_sample(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, 3))
    return np.ascontiguousarray(g / np.linalg.norm(g, axis=1)[:, None])


def _sign_e(axis: UnitVector3, lams: np.ndarray) -> np.ndarray:
    return kernels.axis_signs(lams, axis.as_array()[None, :])[0]


def sign_model_correlation(a: UnitVector3, b: UnitVector3) -> float:
    return -1.0 + 2.0 * a.angle_to(b) / math.pi


def builtin_sign_model() -> HiddenVariableModel:
    """lambda uniform on the sphere; electron answers sign(a.lambda), positron the opposite.

    A zero dot product counts as +1.
    """
    return HiddenVariableModel(
        name="sign",
        sample_lambda=_sphere_sample,
        response_e=_sign_e,
        response_p=lambda axis, lams: -_sign_e(axis, lams),
        exact_correlation=sign_model_correlation,
        electron_signs=kernels.axis_signs,
        electron_gram=kernels.sign_gram,
        anticorrelated=True,
    )


MODELS: dict[str, Callable[[], HiddenVariableModel]] = {"sign": builtin_sign_model}


def get_model(name: str) -> HiddenVariableModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValidationError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None


# -- Monte Carlo estimators --------------------------------------------------


def _check_n(n: int) -> None:
    if n < MIN_SAMPLES:
        raise ValidationError(f"need at least {MIN_SAMPLES} samples, got {n}")


def cross_sums_mc(
    model: HiddenVariableModel, axes: Sequence[UnitVector3], n: int, seed: SeedLike, workers: int = 1
) -> np.ndarray:
    """Integer matrix of summed products s_e(axes[i]) s_p(axes[j]) over ``n`` shared draws."""
    _check_n(n)

    def chunk(rng, size):
        return cross_sums(model, model.sample_lambda(rng, size), axes, size)

    return sum(run_chunks(chunk, n, seed, workers))


def correlation_matrix_mc(
    model: HiddenVariableModel, axes: Sequence[UnitVector3], n: int, seed: SeedLike, workers: int = 1
) -> list[list[CorrelationEstimate]]:
    """Estimates of P(axes[i], axes[j]) for all pairs from one shared batch of draws."""
    total = cross_sums_mc(model, axes, n, seed, workers)
    k = len(axes)
    return [[CorrelationEstimate.from_integer_sums(total[i, j], n, n) for j in range(k)] for i in range(k)]


def lhv_correlation_mc(
    model: HiddenVariableModel, a: UnitVector3, b: UnitVector3, n: int, seed: SeedLike, workers: int = 1
) -> CorrelationEstimate:
    return correlation_matrix_mc(model, [a, b], n, seed, workers)[0][1]


def check_anticorrelation(model: HiddenVariableModel, n: int, seed: SeedLike) -> int:
    """Number of (lambda, random axis) draws where s_e + s_p != 0."""
    rng = as_substream(seed).generator()
    lams = model.sample_lambda(rng, n)
    bad = 0
    axes = [UnitVector3.random(rng) for _ in range(16)]
    which = rng.integers(0, len(axes), size=n)
    for i, ax in enumerate(axes):
        e = _checked(model.response_e(ax, lams), n, "response_e")
        p = _checked(model.response_p(ax, lams), n, "response_p")
        mask = which == i
        bad += int(np.count_nonzero((e + p)[mask]))
    return bad


# -- Bell inequality ---------------------------------------------------------


def _bell(p_bc: float, p_ab: float, p_ac: float, tolerance: float, stderr: float = 0.0) -> BellTestResult:
    lhs = 1.0 + p_bc
    rhs = abs(p_ab - p_ac)
    margin = lhs - rhs
    return BellTestResult(lhs, rhs, margin >= -tolerance, margin, stderr)


def bell_test(
    P: CorrelationFn, a: UnitVector3, b: UnitVector3, c: UnitVector3, tolerance: float = CLOSED_FORM_TOL
) -> BellTestResult:
    """Evaluate 1 + P(b,c) >= |P(a,b) - P(a,c)|."""
    if tolerance < 0:
        raise ValidationError("tolerance must be non-negative")
    return _bell(P(b, c), P(a, b), P(a, c), tolerance)


def bell_test_mc(
    model: HiddenVariableModel,
    a: UnitVector3,
    b: UnitVector3,
    c: UnitVector3,
    n: int,
    seed: SeedLike,
    k_sigma: float = 3.0,
    workers: int = 1,
) -> BellTestResult:
    """Bell test on Monte Carlo correlations; tolerance is ``k_sigma`` combined standard errors."""
    sums = cross_sums_mc(model, [a, b, c], n, seed, workers)
    s_ab, s_ac, s_bc = int(sums[0, 1]), int(sums[0, 2]), int(sums[1, 2])
    ab, ac, bc = (CorrelationEstimate.from_integer_sums(s, n, n) for s in (s_ab, s_ac, s_bc))
    combined = math.sqrt(ab.stderr**2 + ac.stderr**2 + bc.stderr**2)
    # margin from the integer sums so its sign is not blurred by rounding
    margin = (n + s_bc - abs(s_ab - s_ac)) / n
    tol = k_sigma * combined
    return BellTestResult(1.0 + bc.mean, abs(ab.mean - ac.mean), margin >= -tol, margin, combined)


def angle_grid(step_degrees: float = 10.0, stop_degrees: float = 180.0) -> list[tuple[float, float]]:
    if step_degrees <= 0:
        raise ValidationError("grid step must be positive")
    count = int(round(stop_degrees / step_degrees))
    ticks = [i * float(step_degrees) for i in range(count + 1)]
    return [(t1, t2) for t1 in ticks for t2 in ticks]


def _scan(rows: list[BellScanRow]) -> BellScan:
    if not rows:
        raise ValidationError("grid must not be empty")
    return BellScan(rows, min(rows, key=lambda r: r.result.margin))


def bell_scan(
    P: CorrelationFn, grid: Iterable[tuple[float, float]], tolerance: float = CLOSED_FORM_TOL
) -> BellScan:
    """Coplanar scan: a at 0 degrees, b at theta1, c at theta2."""
    a = UnitVector3.from_degrees(0.0)
    rows = [
        BellScanRow(t1, t2, bell_test(P, a, UnitVector3.from_degrees(t1), UnitVector3.from_degrees(t2), tolerance))
        for t1, t2 in grid
    ]
    return _scan(rows)


def bell_scan_mc(
    model: HiddenVariableModel,
    grid: Iterable[tuple[float, float]],
    n: int,
    seed: SeedLike,
    k_sigma: float = 3.0,
    workers: int = 1,
) -> BellScan:
    """Monte Carlo scan; grid point ``i`` uses child stream ``i``."""
    grid = list(grid)
    stream = as_substream(seed)
    a = UnitVector3.from_degrees(0.0)

    def row(item):
        i, (t1, t2) = item
        b, c = UnitVector3.from_degrees(t1), UnitVector3.from_degrees(t2)
        return BellScanRow(t1, t2, bell_test_mc(model, a, b, c, n, stream.child(i), k_sigma))

    return _scan(map_ordered(row, list(enumerate(grid)), workers))


# -- CHSH --------------------------------------------------------------------


def chsh_value(
    P: CorrelationFn, a: UnitVector3, a2: UnitVector3, b: UnitVector3, b2: UnitVector3
) -> float:
    return abs(P(a, b) - P(a, b2) + P(a2, b) + P(a2, b2))


def chsh_mc(
    model: HiddenVariableModel,
    a: UnitVector3,
    a2: UnitVector3,
    b: UnitVector3,
    b2: UnitVector3,
    n: int,
    seed: SeedLike,
    workers: int = 1,
) -> ChshEstimate:
    """CHSH combination averaged draw by draw over one batch of hidden parameters."""
    _check_n(n)
    axes = [a, a2, b, b2]

    def chunk(rng, size):
        e, p = responses(model, model.sample_lambda(rng, size), axes, size)
        e = e.astype(np.int64)
        p = p.astype(np.int64)
        s = e[0] * p[2] - e[0] * p[3] + e[1] * p[2] + e[1] * p[3]
        return np.array([s.sum(), (s * s).sum()], dtype=np.int64)

    total, total_sq = sum(run_chunks(chunk, n, seed, workers))
    est = CorrelationEstimate.from_integer_sums(total, total_sq, n)
    return ChshEstimate(abs(est.mean), est.stderr, n)


# -- identity decomposition --------------------------------------------------


def verify_identity_decomposition(
    model: HiddenVariableModel,
    a: UnitVector3,
    b: UnitVector3,
    c: UnitVector3,
    n: int,
    seed: SeedLike,
    workers: int = 1,
) -> IdentityCheck:
    """Check P(a,b) - P(a,c) = E[s_e(a) s_e(b) (s_e(b) s_e(c) - 1)].

    The right side is sampled; the left side comes from the model's closed
    form (``residual``) and from the same draws (``paired_residual``).
    """
    _check_n(n)
    if model.exact_correlation is None:
        raise ValidationError(f"model {model.name!r} has no closed-form correlation")
    axes = [a, b, c]

    def chunk(rng, size):
        e, p = responses(model, model.sample_lambda(rng, size), axes, size)
        e = e.astype(np.int64)
        p = p.astype(np.int64)
        rhs = e[0] * e[1] * (e[1] * e[2] - 1)
        lhs = e[0] * p[1] - e[0] * p[2]
        diff = rhs - lhs
        return np.array([rhs.sum(), (rhs * rhs).sum(), diff.sum(), np.abs(diff).max()], dtype=np.int64)

    parts = run_chunks(chunk, n, seed, workers)
    rhs_sum = sum(int(x[0]) for x in parts)
    rhs_sq = sum(int(x[1]) for x in parts)
    diff_sum = sum(int(x[2]) for x in parts)
    diff_max = max(int(x[3]) for x in parts)
    rhs = CorrelationEstimate.from_integer_sums(rhs_sum, rhs_sq, n)
    lhs_exact = model.exact_correlation(a, b) - model.exact_correlation(a, c)
    return IdentityCheck(
        rhs=rhs,
        lhs_exact=lhs_exact,
        residual=rhs.mean - lhs_exact,
        stderr=rhs.stderr,
        paired_residual=diff_sum / n,
        paired_max_abs=float(diff_max),
    )
