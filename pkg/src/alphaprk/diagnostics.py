"""Invariant summaries, reference solutions and convergence studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alpha_search import AlphaSearchPolicy, integrate, n_steps
from .errors import ConfigInvalid
from .problems import HamiltonianProblem, PhaseState, consistency_residuals
from .tableaus import FamilyId
from .trajectory import TrajectoryLog

__all__ = [
    "TrajectoryLog",
    "ConvergenceReport",
    "ReferenceError",
    "invariant_summary",
    "make_reference",
    "errors_at_T",
    "convergence_study",
    "observed_orders",
]

REFERENCE_FAMILY = FamilyId.LOBATTO3_IIIA_IIIB
REFERENCE_REFINEMENT = 50
REFERENCE_AGREEMENT = 1e-12


class ReferenceError(RuntimeError):
    code = "reference-not-converged"


def invariant_summary(log: TrajectoryLog) -> dict:
    """Maxima of the invariant residuals over a logged run."""
    if log.steps == 0:
        return {
            "steps": 0,
            "max_energy_err": 0.0,
            "max_g": 0.0,
            "max_hidden": 0.0,
            "max_quad_inv_drift": {lab: 0.0 for lab in log.labels},
            "n_flagged": 0,
            "max_abs_alpha": 0.0,
        }
    quad = np.abs(log.quad_inv_errs)
    return {
        "steps": log.steps,
        "max_energy_err": float(np.max(np.abs(log.energy_err))),
        "max_g": float(np.max(log.g_inf)),
        "max_hidden": float(np.max(log.hidden_inf)),
        "max_quad_inv_drift": {lab: float(quad[:, k].max()) for k, lab in enumerate(log.labels)},
        "n_flagged": sum(1 for f in log.flags if f),
        "max_abs_alpha": float(np.max(np.abs(log.alpha[1:]))),
    }


_reference_cache: dict = {}


def make_reference(
    prob: HamiltonianProblem,
    s0: PhaseState,
    T: float,
    h_ref: float,
    validate: bool = True,
) -> PhaseState:
    """High-accuracy state at time ``T``.

    Integrates with the classical 3-stage Lobatto IIIA-IIIB pair at ``h_ref``
    and, when ``validate`` is set, checks agreement with a second run at
    ``h_ref / 2`` to ``1e-12`` before returning.
    """
    if T <= 0:
        return s0
    key = (prob.name, s0.p.tobytes(), s0.q.tobytes(), float(T), float(h_ref), validate)
    if key in _reference_cache:
        return _reference_cache[key]
    policy = AlphaSearchPolicy()
    ref = integrate(prob, REFERENCE_FAMILY, s0, h_ref, T, policy).final
    if validate:
        fine = integrate(prob, REFERENCE_FAMILY, s0, h_ref / 2, T, policy).final
        gap = max(np.max(np.abs(ref.p - fine.p)), np.max(np.abs(ref.q - fine.q)))
        if gap > REFERENCE_AGREEMENT:
            raise ReferenceError(f"reference at h={h_ref:g} and h/2 differ by {gap:.2e}")
    _reference_cache[key] = ref
    return ref


def errors_at_T(
    prob: HamiltonianProblem,
    family,
    policy: AlphaSearchPolicy,
    h: float,
    T: float,
    reference: PhaseState,
    s0: PhaseState,
) -> tuple[float, float]:
    """Max-norm errors ``(e_p, e_q)`` of a run against ``reference`` at ``T``."""
    final = integrate(prob, family, s0, h, T, policy).final
    return float(np.max(np.abs(final.p - reference.p))), float(np.max(np.abs(final.q - reference.q)))


def observed_orders(hs, errs) -> list[float]:
    """Pairwise orders ``log(e_k / e_{k+1}) / log(h_k / h_{k+1})``."""
    return [
        math.log(errs[k] / errs[k + 1]) / math.log(hs[k] / hs[k + 1]) if errs[k] > 0 and errs[k + 1] > 0 else float("nan")
        for k in range(len(hs) - 1)
    ]


@dataclass
class ConvergenceReport:
    h: list[float]
    e_p: list[float]
    e_q: list[float]
    reference: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def order_p(self) -> list[float]:
        return observed_orders(self.h, self.e_p)

    @property
    def order_q(self) -> list[float]:
        return observed_orders(self.h, self.e_q)

    @property
    def rows(self):
        op = [None] + self.order_p
        oq = [None] + self.order_q
        return list(zip(self.h, self.e_p, op, self.e_q, oq))

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "reference": self.reference,
            "rows": [
                {"h": h, "e_p": ep, "order_p": op, "e_q": eq, "order_q": oq}
                for h, ep, op, eq, oq in self.rows
            ],
        }


def convergence_study(
    prob: HamiltonianProblem,
    family,
    policy: AlphaSearchPolicy,
    h0: float,
    levels: int,
    T: float,
    s0: PhaseState,
) -> ConvergenceReport:
    """Errors at ``T`` for ``h0, h0/2, ...`` against a validated reference."""
    if levels < 2:
        raise ConfigInvalid("a convergence study needs at least two levels")
    hs = [h0 / 2**k for k in range(levels)]
    for h in hs:
        if abs(n_steps(T, h) * h - T) > 1e-9 * T:
            raise ConfigInvalid(f"T = {T} is not a multiple of h = {h}")
    h_ref = hs[-1] / REFERENCE_REFINEMENT
    ref = make_reference(prob, s0, T, h_ref)
    g_res, hidden = consistency_residuals(prob, ref)
    e_p, e_q = [], []
    for h in hs:
        ep, eq = errors_at_T(prob, family, policy, h, T, ref, s0)
        e_p.append(ep)
        e_q.append(eq)
    return ConvergenceReport(
        hs,
        e_p,
        e_q,
        reference={
            "method": REFERENCE_FAMILY.value,
            "h_ref": h_ref,
            "validated_against": h_ref / 2,
            "agreement_tol": REFERENCE_AGREEMENT,
            "g_inf": g_res,
            "hidden_inf": hidden,
            "norm": "max",
        },
        meta={"problem": prob.name, "family": getattr(family, "value", str(family)), "T": T, "levels": levels},
    )
