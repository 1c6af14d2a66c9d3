"""Per-step choice of the tableau parameter so that the energy is conserved.

For a parametrized family, every fixed ``alpha`` gives a symplectic,
constraint-preserving step.  At each step we look for ``alpha*`` with

    mu(alpha, h) = H(p1(alpha), q1(alpha)) - H0 = 0

by bracketing around the previous ``alpha*`` and refining with Brent's
method.  ``H0`` is the energy of the initial state of the trajectory, so
per-step residuals do not accumulate.  Quadratic invariants ``q^T D p`` are
conserved for every ``alpha``, hence also along the searched trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import AlphaPRKError, ConfigInvalid, NoBracketFound, StepFailure
from .problems import HamiltonianProblem, PhaseState
from .stepper import DEFAULT_OPTIONS, StepperOptions, StepRecord, prk_step
from .tableaus import DEFAULT_ALPHA_CAP, build_tableau, default_search_domain, parse_family, singular_alphas
from .trajectory import TrajectoryLog

# distance kept from parameter values where a weight vanishes
SINGULAR_GAP = 1e-4


@dataclass(frozen=True)
class AlphaSearchPolicy:
    """How ``alpha*`` is chosen at each step.

    ``domain=None`` uses the family default (``[-0.4, 0.4]``, or ``[-5, 5]``
    for alpha-Rattle).  A fixed ``alpha`` must lie in ``domain`` when one is
    given and within ``0.4`` otherwise.  ``fixed_alpha`` disables the search.  ``failure`` is
    ``"strict"`` (raise when no root is found) or ``"best-effort"`` (take the
    probe with the smallest ``|mu|`` and flag the step).  ``energy_tol=None``
    means ``1e-12 * max(1, |H0|)``.
    """

    domain: tuple[float, float] | None = None
    energy_tol: float | None = None
    min_bracket_step: float = 1e-6
    warm_start: bool = True
    failure: str = "best-effort"
    fixed_alpha: float | None = None
    stepper: StepperOptions = field(default_factory=lambda: DEFAULT_OPTIONS)

    def __post_init__(self):
        if self.domain is not None:
            lo, hi = self.domain
            if not lo < 0 < hi:
                raise ConfigInvalid(f"alpha domain {self.domain} must contain 0 in its interior")
            object.__setattr__(self, "domain", (float(lo), float(hi)))
        if self.energy_tol is not None and not self.energy_tol > 0:
            raise ConfigInvalid("energy tolerance must be positive")
        if self.failure not in ("strict", "best-effort"):
            raise ConfigInvalid(f"unknown failure mode {self.failure!r}")

    def domain_for(self, family) -> tuple[float, float]:
        return self.domain if self.domain is not None else default_search_domain(family)

    def cap_for(self, family) -> float:
        lo, hi = self.domain_for(family)
        return max(-lo, hi)

    def tol_for(self, H0: float) -> float:
        return self.energy_tol if self.energy_tol is not None else 1e-12 * max(1.0, abs(H0))


class EnergyResidualFn:
    """``alpha -> mu(alpha, h)`` for one step, caching every evaluated step."""

    def __init__(self, prob, family, s0, h, policy, warm=None, H_target=None):
        self.prob, self.family, self.s0, self.h, self.policy = prob, family, s0, h, policy
        self.H0 = prob.H(s0.p, s0.q) if H_target is None else float(H_target)
        self.cap = policy.cap_for(family)
        self.records: dict[float, StepRecord] = {}
        self.values: dict[float, float] = {}
        self._warm = warm

    def __call__(self, alpha: float) -> float:
        alpha = float(alpha)
        if alpha not in self.values:
            tab = build_tableau(self.family, alpha, self.cap)
            rec = prk_step(self.prob, tab, self.s0, self.h, warm=self._warm, options=self.policy.stepper)
            self._warm = rec
            self.records[alpha] = rec
            out = rec.state_out
            self.values[alpha] = self.prob.H(out.p, out.q) - self.H0
        return self.values[alpha]

    def best(self) -> float:
        return min(self.values, key=lambda a: (abs(self.values[a]), abs(a)))


class _Converged(Exception):
    def __init__(self, alpha):
        self.alpha = alpha


def _admissible(a, singular):
    for s in singular:
        if abs(a - s) < SINGULAR_GAP:
            return s - SINGULAR_GAP if a < s else s + SINGULAR_GAP
    return a


def find_alpha_star(
    prob: HamiltonianProblem,
    family,
    s0: PhaseState,
    h: float,
    policy: AlphaSearchPolicy = AlphaSearchPolicy(),
    start: float = 0.0,
    warm: StepRecord | None = None,
    H_target: float | None = None,
) -> tuple[float, StepRecord, str]:
    """Energy-conserving parameter for one step.

    ``H_target`` defaults to ``H(s0)``.  Returns ``(alpha_star, record,
    flag)``; ``flag`` is empty on success and ``"no_bracket"`` or
    ``"tol_not_met"`` for best-effort fallbacks.
    """
    family = parse_family(family)
    if not family.constraint_preserving:
        raise ConfigInvalid(f"family {family.value} does not preserve the constraints")
    if not family.parametrized:
        raise ConfigInvalid(f"family {family.value} has no alpha parameter to search")
    lo, hi = policy.domain_for(family)
    singular = singular_alphas(family)
    mu = EnergyResidualFn(prob, family, s0, h, policy, warm, H_target)
    tol = policy.tol_for(mu.H0)

    center = _admissible(min(max(float(start), lo), hi), singular)
    f_c = mu(center)
    if abs(f_c) <= tol:
        return center, mu.records[center], ""

    # A secant probe picks the direction and distance of the first bracket
    # attempt; from there the search doubles outwards, then tries the other side.
    d0 = policy.min_bracket_step
    e = _admissible(center + d0 if center + d0 <= hi else center - d0, singular)
    f_e = mu(e)
    if abs(f_e) <= tol:
        return e, mu.records[e], ""
    bracket = None
    if np.sign(f_e) != np.sign(f_c):
        bracket = (e, f_e)
    else:
        slope = (f_e - f_c) / (e - center)
        direction = -np.sign(f_c * slope) if slope != 0 else 1.0
        first = 1.1 * abs(f_c / slope) if slope != 0 else 2 * d0
        for sgn, dist in ((direction, max(first, 2 * d0)), (-direction, 2 * d0)):
            edge = hi if sgn > 0 else lo
            while bracket is None:
                a = center + sgn * dist
                if (a - edge) * sgn >= 0:
                    a = edge
                a = _admissible(a, singular)
                if a == center:
                    break
                f_a = mu(a)
                if abs(f_a) <= tol:
                    return a, mu.records[a], ""
                if np.sign(f_a) != np.sign(f_c):
                    bracket = (a, f_a)
                elif a == edge:
                    break
                dist *= 2.0
            if bracket is not None:
                break

    if bracket is None:
        if policy.failure == "strict":
            raise NoBracketFound(
                f"no sign change of the energy residual in [{lo}, {hi}] "
                f"(best |mu| = {abs(mu.values[mu.best()]):.3e})"
            )
        a = mu.best()
        return a, mu.records[a], "no_bracket"

    # keep Brent away from parameter values where the stage system is singular
    x0, x1 = sorted((center, bracket[0]))
    f0 = f_c if x0 == center else bracket[1]
    for s in singular:
        if x0 < s < x1:
            left, right = s - SINGULAR_GAP, s + SINGULAR_GAP
            for a in (left, right):
                if abs(mu(a)) <= tol:
                    return a, mu.records[a], ""
            if np.sign(mu(left)) != np.sign(f0):
                x1 = left
            elif np.sign(mu(right)) != np.sign(mu(left)):
                x0, x1 = left, right  # sign flips across the singular point itself
            else:
                x0, f0 = right, mu(right)

    def f(a):
        v = mu(a)
        if abs(v) <= tol:
            raise _Converged(a)
        return v

    try:
        brentq(f, x0, x1, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except _Converged as done:
        return done.alpha, mu.records[done.alpha], ""
    a = mu.best()
    if policy.failure == "strict":
        raise NoBracketFound(f"root refinement stalled at |mu| = {abs(mu.values[a]):.3e} > {tol:.1e}")
    return a, mu.records[a], "tol_not_met"


def n_steps(T: float, h: float) -> int:
    """``ceil(T / h)`` robust to round-off in the quotient."""
    return max(0, math.ceil(T / h - 1e-9))


def integrate(
    prob: HamiltonianProblem,
    family,
    s0: PhaseState,
    h: float,
    T: float,
    policy: AlphaSearchPolicy = AlphaSearchPolicy(),
) -> TrajectoryLog:
    """Run ``ceil(T/h)`` steps, searching ``alpha*`` at each one unless fixed."""
    family = parse_family(family)
    if not T > 0:
        raise ConfigInvalid(f"final time must be positive, got {T!r}")
    if policy.fixed_alpha is not None:
        cap = policy.cap_for(family) if policy.domain is not None else DEFAULT_ALPHA_CAP
        tab = build_tableau(family, policy.fixed_alpha, cap)
    elif not family.parametrized:
        tab = build_tableau(family, 0.0)
    else:
        tab = None

    log = TrajectoryLog.start(prob, s0, meta={
        "problem": prob.name,
        "family": family.value,
        "h": h,
        "T": T,
        "alpha_mode": "search" if tab is None else f"fixed:{tab.alpha!r}",
        "energy_tol": policy.energy_tol,
        "domain": list(policy.domain_for(family)),
        "failure": policy.failure,
    })
    H0 = prob.H(s0.p, s0.q)
    state, rec, alpha = s0, None, 0.0
    for n in range(1, n_steps(T, h) + 1):
        try:
            if tab is not None:
                rec = prk_step(prob, tab, state, h, warm=rec, options=policy.stepper)
                alpha, flag = tab.alpha, ""
            else:
                start = alpha if policy.warm_start else 0.0
                alpha, rec, flag = find_alpha_star(
                    prob, family, state, h, policy, start=start, warm=rec, H_target=H0
                )
        except AlphaPRKError as exc:
            raise StepFailure(n, exc) from exc
        state = rec.state_out
        log.append(state, alpha, rec.newton_iters_stage, rec.newton_iters_proj, flag)
    return log


def alpha_scaling_probe(
    prob: HamiltonianProblem,
    family,
    s0: PhaseState,
    h_list,
    steps: int = 50,
    policy: AlphaSearchPolicy = AlphaSearchPolicy(),
) -> list[tuple[float, float]]:
    """``(h, median |alpha*|)`` over ``steps`` searched steps for each ``h``."""
    rows = []
    for h in h_list:
        log = integrate(prob, family, s0, h, steps * h, policy)
        rows.append((float(h), float(np.median(np.abs(log.alpha[1:])))))
    return rows
