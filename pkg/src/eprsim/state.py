"""Exact state-vector algebra for one to three spin-1/2 particles.

Basis convention, used everywhere in the package: particle 1 is the most
significant bit and the spin-up ket ``|+>`` maps to bit 0, so the two-particle
basis is ordered ``(++, +-, -+, --)``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConsistencyError, UnsupportedObservableError, ValidationError

ALGEBRA_TOL = 1e-12
EIGEN_TOL = 1e-10

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


_SQRT3_2 = math.sqrt(3.0) / 2.0
# cos, sin at multiples of 30 degrees within one quadrant
_EXACT_TRIG = {0: (1.0, 0.0), 30: (_SQRT3_2, 0.5), 60: (0.5, _SQRT3_2)}


def _cos_sin_degrees(degrees: float) -> tuple[float, float]:
    d = math.fmod(degrees, 360.0)
    if d < 0:
        d += 360.0
    quadrant, rest = divmod(d, 90.0)
    if rest in _EXACT_TRIG:
        c, s = _EXACT_TRIG[int(rest)]
        for _ in range(int(quadrant)):
            c, s = -s, c
        return c + 0.0, s + 0.0
    r = math.radians(degrees)
    return math.cos(r), math.sin(r)


@dataclass(frozen=True)
class UnitVector3:
    """A measurement direction (Stern-Gerlach axis)."""

    x: float
    y: float
    z: float
    # angle in degrees from +z towards +x when built by from_degrees
    degrees: Optional[float] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        norm2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(norm2) or abs(norm2 - 1.0) > ALGEBRA_TOL:
            raise ValidationError(f"axis ({self.x}, {self.y}, {self.z}) is not a unit vector")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "UnitVector3":
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0 or not math.isfinite(n):
            raise ValidationError("cannot normalize a zero or non-finite vector")
        return cls(x / n, y / n, z / n)

    @classmethod
    def in_xz_plane(cls, theta: float) -> "UnitVector3":
        """Axis at angle ``theta`` (radians) from +z towards +x."""
        return cls(math.sin(theta), 0.0, math.cos(theta))

    @classmethod
    def from_degrees(cls, degrees: float) -> "UnitVector3":
        """Axis in the x-z plane; multiples of 30 degrees get exactly rounded components."""
        c, s = _cos_sin_degrees(degrees)
        return cls(s, 0.0, c, float(degrees))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "UnitVector3":
        while True:
            v = rng.standard_normal(3)
            n = float(np.linalg.norm(v))
            if n > 1e-9:
                return cls.normalized(*(float(c) for c in v))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def dot(self, other: "UnitVector3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def angle_to(self, other: "UnitVector3") -> float:
        """Angle in [0, pi]; atan2 form stays accurate near 0 and pi."""
        cx = self.y * other.z - self.z * other.y
        cy = self.z * other.x - self.x * other.z
        cz = self.x * other.y - self.y * other.x
        return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), self.dot(other))

    def cos_angle(self, other: "UnitVector3") -> float:
        """Cosine of the angle to ``other``; exact at special angles when both carry degrees."""
        if self.degrees is not None and other.degrees is not None:
            return _cos_sin_degrees(self.degrees - other.degrees)[0]
        return self.dot(other)

    def __neg__(self) -> "UnitVector3":
        flipped = None if self.degrees is None else self.degrees + 180.0
        return UnitVector3(-self.x, -self.y, -self.z, flipped)


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    n_particles: int = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        size = amps.shape[0]
        if size not in (2, 4, 8):
            raise ValidationError(f"amplitude vector length {size} is not 2, 4 or 8")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ALGEBRA_TOL:
            raise ValidationError(f"state is not normalized (norm {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "n_particles", size.bit_length() - 1)

    @classmethod
    def basis(cls, label: str) -> "PureState":
        """Product basis state from a string such as ``"+-"``."""
        if not 1 <= len(label) <= 3 or set(label) - {"+", "-"}:
            raise ValidationError(f"bad basis label {label!r}")
        index = int(label.replace("+", "0").replace("-", "1"), 2)
        amps = np.zeros(2 ** len(label), dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        """``|<self|other>|``, insensitive to global phase."""
        if other.dim != self.dim:
            raise ValidationError("dimension mismatch")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_particles": self.n_particles,
                "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        data = json.loads(text)
        return cls(np.array([complex(re, im) for re, im in data["amplitudes"]]))


@dataclass(frozen=True)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4, 8):
            raise ValidationError(f"operator shape {m.shape} is not 2x2, 4x4 or 8x8")
        if np.max(np.abs(m - m.conj().T)) > ALGEBRA_TOL:
            raise ValidationError("operator is not Hermitian")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: "HermitianOperator") -> "HermitianOperator":
        # only valid for commuting factors; the constructor rejects the rest
        if other.dim != self.dim:
            raise ValidationError("dimension mismatch")
        return HermitianOperator(self.entries @ other.entries)

    def commutes_with(self, other: "HermitianOperator", tol: float = ALGEBRA_TOL) -> bool:
        a, b = self.entries, other.entries
        return bool(np.max(np.abs(a @ b - b @ a)) <= tol)

    def is_involution(self, tol: float = ALGEBRA_TOL) -> bool:
        return bool(np.max(np.abs(self.entries @ self.entries - np.eye(self.dim))) <= tol)

    def apply(self, state: PureState) -> np.ndarray:
        _check_dims(state, self)
        return self.entries @ state.amplitudes

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "entries": [[[float(v.real), float(v.imag)] for v in row] for row in self.entries],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "HermitianOperator":
        data = json.loads(text)
        return cls(np.array([[complex(re, im) for re, im in row] for row in data["entries"]]))


@dataclass(frozen=True)
class MeasurementResult:
    outcome: float
    post_state: PureState


def _check_dims(state: PureState, op: HermitianOperator) -> None:
    if state.dim != op.dim:
        raise ValidationError(f"state dimension {state.dim} != operator dimension {op.dim}")


def singlet_state() -> PureState:
    """(|+-> - |-+>)/sqrt(2)."""
    s = 1.0 / math.sqrt(2.0)
    return PureState(np.array([0.0, s, -s, 0.0], dtype=complex))


def ghz_state() -> PureState:
    """(|+++> - |--->)/sqrt(2)."""
    s = 1.0 / math.sqrt(2.0)
    amps = np.zeros(8, dtype=complex)
    amps[0], amps[7] = s, -s
    return PureState(amps)


def spin_operator(axis: UnitVector3) -> HermitianOperator:
    """``a . sigma`` for a unit axis ``a``."""
    if not isinstance(axis, UnitVector3):
        axis = UnitVector3(*axis)
    return HermitianOperator(axis.x * SIGMA_X + axis.y * SIGMA_Y + axis.z * SIGMA_Z)


def pauli(name: str) -> HermitianOperator:
    return HermitianOperator({"i": SIGMA_I, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}[name.lower()])


def embed(op: HermitianOperator, slot: int, n_particles: int) -> HermitianOperator:
    """Act with the 2x2 ``op`` on particle ``slot`` (1-based), identity elsewhere."""
    if op.dim != 2:
        raise ValidationError("only single-particle (2x2) operators can be embedded")
    if not 1 <= n_particles <= 3 or not 1 <= slot <= n_particles:
        raise ValidationError(f"slot {slot} out of range for {n_particles} particles")
    out = np.ones((1, 1), dtype=complex)
    for k in range(1, n_particles + 1):
        out = np.kron(out, op.entries if k == slot else SIGMA_I)
    return HermitianOperator(out)


def tensor(*ops: HermitianOperator) -> HermitianOperator:
    """Tensor product of single-particle operators, particle 1 first."""
    if not 1 <= len(ops) <= 3:
        raise ValidationError("between one and three factors are supported")
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        if op.dim != 2:
            raise ValidationError("tensor factors must be 2x2")
        out = np.kron(out, op.entries)
    return HermitianOperator(out)


def ghz_observables() -> dict[str, HermitianOperator]:
    """The four triple products whose joint eigenvector is the GHZ state."""
    return {word: tensor(*(pauli(c) for c in word)) for word in ("xyy", "yxy", "yyx", "xxx")}


def expectation(state: PureState, op: HermitianOperator) -> float:
    _check_dims(state, op)
    value = np.vdot(state.amplitudes, op.entries @ state.amplitudes)
    if abs(value.imag) > ALGEBRA_TOL:
        raise ConsistencyError(f"expectation of a Hermitian operator has imaginary part {value.imag!r}")
    return float(value.real)


def _projector(op: HermitianOperator, sign: int) -> np.ndarray:
    return 0.5 * (np.eye(op.dim) + sign * op.entries)


def measure(state: PureState, op: HermitianOperator, rng: np.random.Generator) -> MeasurementResult:
    """Projective measurement of a +/-1 observable, followed by wave-packet reduction.

    Draws exactly one uniform variate from ``rng``.
    """
    _check_dims(state, op)
    if not op.is_involution():
        raise UnsupportedObservableError("only observables with spectrum {+1, -1} can be measured")
    plus = _projector(op, +1) @ state.amplitudes
    p_plus = min(max(float(np.vdot(plus, plus).real), 0.0), 1.0)
    u = rng.random()
    if u < p_plus:
        outcome, projected = 1, plus
    else:
        outcome, projected = -1, _projector(op, -1) @ state.amplitudes
    norm = float(np.linalg.norm(projected))
    if norm < 1e-300:
        raise ConsistencyError("sampled an outcome of zero probability")
    return MeasurementResult(float(outcome), PureState(projected / norm))


def is_eigenvector(state: PureState, op: HermitianOperator, tol: float = EIGEN_TOL) -> Optional[float]:
    """Eigenvalue of ``op`` for ``state`` if the residual is within ``tol``, else None."""
    if tol <= 0:
        raise ValidationError("tol must be positive")
    _check_dims(state, op)
    applied = op.entries @ state.amplitudes
    lam = float(np.vdot(state.amplitudes, applied).real)
    residual = float(np.linalg.norm(applied - lam * state.amplitudes))
    return lam if residual <= tol else None


def eigen_residual(state: PureState, op: HermitianOperator, eigenvalue: float) -> float:
    _check_dims(state, op)
    return float(np.linalg.norm(op.entries @ state.amplitudes - eigenvalue * state.amplitudes))


def rotation(axis: UnitVector3, angle: float) -> np.ndarray:
    """SU(2) element exp(-i angle/2 n.sigma)."""
    return math.cos(angle / 2) * SIGMA_I - 1j * math.sin(angle / 2) * spin_operator(axis).entries


def rotate_both(state: PureState, rot: np.ndarray) -> PureState:
    """Apply the same rotation ``rot`` to both particles of a two-particle state."""
    if state.n_particles != 2:
        raise ValidationError("rotate_both needs a two-particle state")
    u = np.asarray(rot, dtype=complex)
    if u.shape != (2, 2):
        raise ValidationError("rotation must be 2x2")
    if np.max(np.abs(u.conj().T @ u - SIGMA_I)) > ALGEBRA_TOL or abs(np.linalg.det(u) - 1) > ALGEBRA_TOL:
        raise ValidationError("rotation must be special unitary")
    return PureState(np.kron(u, u) @ state.amplitudes)


def joint_outcome_probabilities(
    state: PureState, ops: Sequence[tuple[HermitianOperator, int]]
) -> dict[tuple[int, ...], float]:
    """Born probabilities for simultaneous +/-1 measurements on distinct particles.

    ``ops`` pairs each single-particle involution with its 1-based slot.
    """
    slots = [slot for _, slot in ops]
    if len(set(slots)) != len(slots):
        raise ValidationError("each particle can be measured at most once")
    projectors = {}
    for op, slot in ops:
        if op.dim != 2 or not op.is_involution():
            raise UnsupportedObservableError("joint outcomes need 2x2 involutions")
        for s in (1, -1):
            projectors[slot, s] = embed(HermitianOperator(_projector(op, s)), slot, state.n_particles).entries
    probs = {}
    for signs in itertools.product((1, -1), repeat=len(ops)):
        vec = state.amplitudes
        for slot, s in zip(slots, signs):
            vec = projectors[slot, s] @ vec
        probs[signs] = float(np.vdot(vec, vec).real)
    return probs


def sample_joint_outcomes(
    state: PureState,
    ops: Sequence[tuple[HermitianOperator, int]],
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """``size`` joint outcome rows (int8, one column per op), one uniform per row."""
    probs = joint_outcome_probabilities(state, ops)
    keys = list(probs)
    cdf = np.cumsum([probs[k] for k in keys])
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.array(keys, dtype=np.int8)[idx]
