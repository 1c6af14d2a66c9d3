"""Partitioned Runge-Kutta coefficient pairs and their algebraic checks.

A pair ``(A, b; A_hat, b_hat)`` advances positions with ``(A, b)`` and momenta
with ``(A_hat, b_hat)``.  All families built here are symplectic for every
fixed ``alpha``; all but the W-transform negative control also impose
``a_1j = 0`` and ``a_sj = b_j`` so that the first and last stage positions
coincide with the step endpoints, which is what lets the holonomic
constraints be imposed exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateWeights, ParameterOutOfDomain

DEFAULT_ALPHA_CAP = 0.4
WEIGHT_FLOOR = 1e-6
ORDER_TOL = 1e-12


class FamilyId(str, enum.Enum):
    RATTLE_ALPHA = "rattle_alpha"
    LOBATTO3_IIIA_IIIB = "lobatto3_iiia_iiib"
    ALPHA_PRK3_A = "alpha_prk3_a"
    ALPHA_PRK3_B = "alpha_prk3_b"
    WTRANSFORM2_NEGCONTROL = "wtransform2_negcontrol"

    @property
    def constraint_preserving(self) -> bool:
        return self is not FamilyId.WTRANSFORM2_NEGCONTROL

    @property
    def parametrized(self) -> bool:
        return self is not FamilyId.LOBATTO3_IIIA_IIIB


# Names accepted on the command line and in config files.
FAMILY_ALIASES = {
    "alpha-rattle": FamilyId.RATTLE_ALPHA,
    "rattle": FamilyId.RATTLE_ALPHA,
    "lobatto3": FamilyId.LOBATTO3_IIIA_IIIB,
    "lobatto3-iiia-iiib": FamilyId.LOBATTO3_IIIA_IIIB,
    "lobatto3-a": FamilyId.ALPHA_PRK3_A,
    "alpha-prk3a": FamilyId.ALPHA_PRK3_A,
    "lobatto3-b": FamilyId.ALPHA_PRK3_B,
    "alpha-prk3b": FamilyId.ALPHA_PRK3_B,
    "wtransform2": FamilyId.WTRANSFORM2_NEGCONTROL,
}


def parse_family(name) -> FamilyId:
    if isinstance(name, FamilyId):
        return name
    key = str(name).strip().lower()
    if key in FAMILY_ALIASES:
        return FAMILY_ALIASES[key]
    try:
        return FamilyId(key.replace("-", "_"))
    except ValueError:
        raise ParameterOutOfDomain(f"unknown tableau family {name!r}") from None


@dataclass(frozen=True, eq=False)
class TableauPair:
    A: np.ndarray
    b: np.ndarray
    A_hat: np.ndarray
    b_hat: np.ndarray
    family: FamilyId
    alpha: float = 0.0
    c: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        A_hat = np.asarray(self.A_hat, dtype=float)
        b_hat = np.asarray(self.b_hat, dtype=float)
        s = b.size
        if s < 2 or A.shape != (s, s) or A_hat.shape != (s, s) or b_hat.shape != (s,):
            raise ValueError("inconsistent tableau shapes")
        for name, arr in (("A", A), ("b", b), ("A_hat", A_hat), ("b_hat", b_hat)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        c = A.sum(axis=1)
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def s(self) -> int:
        return self.b.size

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "alpha": self.alpha,
            "s": self.s,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "A_hat": self.A_hat.tolist(),
            "b_hat": self.b_hat.tolist(),
            "c": self.c.tolist(),
        }


def _check_alpha(alpha, cap):
    alpha = float(alpha)
    if not np.isfinite(alpha) or abs(alpha) > cap:
        raise ParameterOutOfDomain(f"|alpha| = {abs(alpha):g} exceeds the cap {cap:g}")
    return alpha


def conjugate_tableau(A, b) -> np.ndarray:
    """Momentum coefficients making ``(A, b; A_hat, b)`` symplectic.

    Returns ``A_hat`` with ``A_hat[i, j] = b[j] * (1 - A[j, i] / b[i])``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(np.abs(b) < 1e-12):
        raise DegenerateWeights("conjugate tableau needs all weights nonzero")
    return b[None, :] * (1.0 - A.T / b[:, None])


def build_alpha_rattle(alpha: float, cap: float = DEFAULT_ALPHA_CAP) -> TableauPair:
    """Two-stage alpha-Rattle pair; ``alpha = 0`` is the Shake-Rattle scheme."""
    alpha = _check_alpha(alpha, cap)
    b1, b2 = 0.5 + alpha, 0.5 - alpha
    if min(abs(b1), abs(b2)) < WEIGHT_FLOOR:
        raise ParameterOutOfDomain("alpha-Rattle weights degenerate")
    b = np.array([b1, b2])
    A = np.array([[0.0, 0.0], [b1, b2]])
    A_hat = np.array([[b1, 0.0], [b1, 0.0]])
    return TableauPair(A, b, A_hat, b.copy(), FamilyId.RATTLE_ALPHA, alpha)


_LOBATTO3_B = np.array([1 / 6, 2 / 3, 1 / 6])


def build_lobatto3(
    alpha_variant: str = "iiia_hat", alpha: float = 0.0, cap: float = DEFAULT_ALPHA_CAP
) -> TableauPair:
    """Three-stage alpha-Lobatto pair.

    ``alpha_variant`` selects which parametrization of the middle row of ``A``
    is used: ``"iiia_hat"`` or ``"iiib_hat"``.  Both reduce to the classical
    Lobatto IIIA-IIIB pair at ``alpha = 0`` and keep ``b`` fixed.
    """
    alpha = _check_alpha(alpha, cap)
    if alpha_variant == "iiia_hat":
        row2 = [5 / 24 - alpha, 1 / 3 - alpha, 2 * alpha - 1 / 24]
        # middle entry 1/3 + alpha is forced by b_i a^_ij + b_j a_ji = b_i b_j
        mid = [4 * alpha - 1 / 6, 1 / 3 + alpha, 5 / 6 - 8 * alpha]
        family = FamilyId.ALPHA_PRK3_A
    elif alpha_variant == "iiib_hat":
        row2 = [5 / 24 - alpha / 2, 1 / 3 + alpha, -1 / 24 - alpha / 2]
        mid = [2 * alpha - 1 / 6, 1 / 3 - alpha, 5 / 6 + 2 * alpha]
        family = FamilyId.ALPHA_PRK3_B
    else:
        raise ValueError(f"unknown Lobatto variant {alpha_variant!r}")
    b = _LOBATTO3_B.copy()
    A = np.array([[0.0, 0.0, 0.0], row2, b])
    A_hat = np.column_stack([np.full(3, 1 / 6), mid, np.zeros(3)])
    return TableauPair(A, b, A_hat, b.copy(), family, alpha)


def build_lobatto3_classical() -> TableauPair:
    """The classical three-stage Lobatto IIIA-IIIB pair (no parameter)."""
    t = build_lobatto3("iiia_hat", 0.0)
    return TableauPair(t.A, t.b, t.A_hat, t.b_hat, FamilyId.LOBATTO3_IIIA_IIIB, 0.0)


def build_wtransform2(alpha: float) -> TableauPair:
    """Two-stage W-transform parametrization of Lobatto IIIA-IIIB.

    Symplectic for every ``alpha`` but breaks ``a_1j = 0`` as soon as
    ``alpha != 0``; kept only as a negative control.
    """
    alpha = float(alpha)
    a = alpha / 6
    A = np.array([[a, -a], [0.5 - a, 0.5 + a]])
    A_hat = np.array([[0.5 - a, a], [0.5 + a, -a]])
    b = np.array([0.5, 0.5])
    return TableauPair(A, b, A_hat, b.copy(), FamilyId.WTRANSFORM2_NEGCONTROL, alpha)


def singular_alphas(family) -> tuple[float, ...]:
    """Parameter values where some weight vanishes and the step degenerates."""
    return (-0.5, 0.5) if parse_family(family) is FamilyId.RATTLE_ALPHA else ()


def default_search_domain(family) -> tuple[float, float]:
    """Default energy-search interval for a family.

    alpha-Rattle occasionally needs ``|alpha*|`` slightly above 1/2, where
    one weight changes sign, so its interval reaches well past the singular points.
    """
    if parse_family(family) is FamilyId.RATTLE_ALPHA:
        return (-5.0, 5.0)
    return (-DEFAULT_ALPHA_CAP, DEFAULT_ALPHA_CAP)


def build_tableau(family, alpha: float = 0.0, cap: float = DEFAULT_ALPHA_CAP) -> TableauPair:
    family = parse_family(family)
    if family is FamilyId.RATTLE_ALPHA:
        return build_alpha_rattle(alpha, cap)
    if family is FamilyId.ALPHA_PRK3_A:
        return build_lobatto3("iiia_hat", alpha, cap)
    if family is FamilyId.ALPHA_PRK3_B:
        return build_lobatto3("iiib_hat", alpha, cap)
    if family is FamilyId.LOBATTO3_IIIA_IIIB:
        if alpha != 0:
            raise ParameterOutOfDomain("the classical Lobatto IIIA-IIIB pair has no alpha parameter")
        return build_lobatto3_classical()
    return build_wtransform2(alpha)


@dataclass
class ConditionReport:
    sum_b: float
    b_bhat: float
    symplectic: float
    first_row: float
    last_row: float
    B: int
    C: int
    D: int

    @property
    def stiff_accuracy(self) -> float:
        return max(self.first_row, self.last_row)

    def to_dict(self) -> dict:
        return {
            "sum_b_residual": self.sum_b,
            "b_bhat_residual": self.b_bhat,
            "symplectic_residual": self.symplectic,
            "first_row_residual": self.first_row,
            "last_row_residual": self.last_row,
            "stiff_accuracy_residual": self.stiff_accuracy,
            "B": self.B,
            "C": self.C,
            "D": self.D,
        }


def _largest_order(residual_for, max_order, tol):
    k = 0
    while k < max_order and residual_for(k + 1) <= tol:
        k += 1
    return k


def check_conditions(t: TableauPair, tol: float = ORDER_TOL) -> ConditionReport:
    A, b, Ah, bh, c = t.A, t.b, t.A_hat, t.b_hat, t.c
    symp = b[:, None] * Ah + bh[None, :] * A.T - b[:, None] * bh[None, :]
    max_order = 2 * t.s

    def B(q):
        return abs(b @ c ** (q - 1) - 1 / q)

    def C(q):
        return np.max(np.abs(A @ c ** (q - 1) - c**q / q))

    def D(q):
        return np.max(np.abs((b * c ** (q - 1)) @ A - b / q * (1 - c**q)))

    return ConditionReport(
        sum_b=float(abs(b.sum() - 1.0)),
        b_bhat=float(np.max(np.abs(b - bh))),
        symplectic=float(np.max(np.abs(symp))),
        first_row=float(np.max(np.abs(A[0]))),
        last_row=float(np.max(np.abs(A[-1] - b))),
        B=_largest_order(B, max_order, tol),
        C=_largest_order(C, max_order, tol),
        D=_largest_order(D, max_order, tol),
    )
