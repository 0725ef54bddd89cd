"""Exhaustive check that no pre-assignment of GHZ spin values can exist.

Six values ``sx(k), sy(k)`` in {-1, +1} would have to satisfy the three
triple products ``sx sy sy = +1`` (cyclic) and ``sx sx sx = -1`` at once.
With only 64 tables, enumeration is the whole proof.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ValidationError
from .state import eigen_residual, ghz_observables, ghz_state, is_eigenvector

Triple = tuple[int, int, int]

# eigenvalue of the GHZ state for each observable word, particle 1 first
GHZ_SIGNS = {"xyy": 1, "yxy": 1, "yyx": 1, "xxx": -1}


@dataclass(frozen=True)
class AssignmentTable:
    sx: Triple
    sy: Triple

    def __post_init__(self):
        for v in self.sx + self.sy:
            if v not in (-1, 1):
                raise ValidationError(f"assignment entries must be -1 or +1, got {v!r}")
        if len(self.sx) != 3 or len(self.sy) != 3:
            raise ValidationError("assignment needs three sx and three sy values")


@dataclass(frozen=True)
class ConstraintReport:
    eplus: tuple[bool, bool, bool]
    eminus: bool

    @property
    def all_satisfied(self) -> bool:
        return all(self.eplus) and self.eminus


def eplus_products(t: AssignmentTable) -> Triple:
    sx, sy = t.sx, t.sy
    return (sx[0] * sy[1] * sy[2], sy[0] * sx[1] * sy[2], sy[0] * sy[1] * sx[2])


def x_product(t: AssignmentTable) -> int:
    return t.sx[0] * t.sx[1] * t.sx[2]


def enumerate_assignments() -> list[AssignmentTable]:
    """All 64 tables, lexicographic over (sx, sy) with -1 before +1."""
    return [AssignmentTable(v[:3], v[3:]) for v in itertools.product((-1, 1), repeat=6)]


def check_constraints(t: AssignmentTable) -> ConstraintReport:
    p = eplus_products(t)
    return ConstraintReport(eplus=tuple(x == 1 for x in p), eminus=x_product(t) == -1)


def count_satisfying(
    eplus: bool = True, eminus: bool = True, tables: Optional[Iterable[AssignmentTable]] = None
) -> int:
    """Count tables meeting the selected constraint families."""
    n = 0
    for t in tables if tables is not None else enumerate_assignments():
        r = check_constraints(t)
        if (not eplus or all(r.eplus)) and (not eminus or r.eminus):
            n += 1
    return n


def count_satisfying_all() -> int:
    return count_satisfying(eplus=True, eminus=True)


@dataclass(frozen=True)
class YBranch:
    sx: Triple
    first_site: int  # 1-based particle whose y spin is measured first
    first_value: int
    forced_sy: Triple
    violated: str  # observable word of the constraint that fails


@dataclass(frozen=True)
class ParityReport:
    # every sy triple admits no completing sx triple
    completions_per_sy: dict[Triple, int]
    # every branch from a consistent sx triple ends in a contradiction
    y_branches: tuple[YBranch, ...]
    # sx triples with product +1 fail E(-) before any y reasoning
    sx_failing_eminus_directly: tuple[Triple, ...]

    @property
    def no_sx_completion(self) -> bool:
        return len(self.completions_per_sy) == 8 and all(c == 0 for c in self.completions_per_sy.values())

    @property
    def every_y_branch_fails(self) -> bool:
        return len(self.y_branches) == 4 * 3 * 2 and all(b.violated for b in self.y_branches)


def _propagate(sx: Triple, site: int, value: int) -> tuple[Triple, str]:
    """Force the other two y values from the E(+) products that involve ``sy(site)``.

    Returns the forced sy triple and the word of the E(+) constraint left
    violated (empty string if none).
    """
    j = site - 1
    sy = [0, 0, 0]
    sy[j] = value
    # for each k != j, the E(+) product with sx at slot m (m != j, m != k) pins sy(k)
    for k in range(3):
        if k == j:
            continue
        m = 3 - j - k
        # sy(j) * sx(m) * sy(k) = +1
        sy[k] = sy[j] * sx[m]
    table = AssignmentTable(tuple(sx), tuple(sy))
    words = ("xyy", "yxy", "yyx")
    for word, ok in zip(words, check_constraints(table).eplus):
        if not ok:
            return tuple(sy), word
    return tuple(sy), ""


def lemma_checks() -> ParityReport:
    tables = enumerate_assignments()
    completions = {}
    for sy in itertools.product((-1, 1), repeat=3):
        completions[sy] = count_satisfying(tables=[t for t in tables if t.sy == sy])

    branches = []
    direct = []
    for sx in itertools.product((-1, 1), repeat=3):
        if sx[0] * sx[1] * sx[2] == 1:
            direct.append(sx)
            continue
        for site in (1, 2, 3):
            for value in (-1, 1):
                forced, violated = _propagate(sx, site, value)
                branches.append(YBranch(sx, site, value, forced, violated))
    return ParityReport(completions, tuple(branches), tuple(direct))


@dataclass(frozen=True)
class EigenCheck:
    word: str
    expected: int
    eigenvalue: Optional[float]
    residual: float

    @property
    def ok(self) -> bool:
        return self.eigenvalue is not None and round(self.eigenvalue) == self.expected


def eigen_checks(tol: float = 1e-10) -> list[EigenCheck]:
    """Verify the GHZ state against the four triple-product observables."""
    psi = ghz_state()
    out = []
    for word, op in ghz_observables().items():
        lam = is_eigenvector(psi, op, tol)
        out.append(EigenCheck(word, GHZ_SIGNS[word], lam, eigen_residual(psi, op, GHZ_SIGNS[word])))
    return out
