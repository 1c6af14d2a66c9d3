"""One step of a constraint-preserving partitioned Runge-Kutta method.

A step solves two nonlinear systems in turn:

1. the stage system for ``(Q_2..Q_s, P_1..P_s, Lam_1..Lam_{s-1})`` with
   ``Q_1 = q0`` and ``Q_s = q1`` imposed by the tableau structure, and
   ``g(Q_i) = 0`` for ``i >= 2``;
2. the projection system for ``(p1, Lam_s)`` enforcing the hidden
   constraint ``G(q1) H_p(p1, q1) = 0``.

Stage forces are ``l_i = -H_q(P_i, Q_i) - G(Q_i)^T Lam_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InconsistentState,
    InvalidStepSize,
    NewtonDivergence,
    TableauNotConstraintPreserving,
)
from .newton import newton_solve
from .problems import HamiltonianProblem, PhaseState, consistency_residuals
from .tableaus import TableauPair

STRUCTURE_TOL = 1e-13


@dataclass(frozen=True)
class StepperOptions:
    tol: float = 1e-13
    max_iter: int = 50
    h_max: float = 1.0
    # accepted start states may violate the manifold by this multiple of tol
    consistency_factor: float = 10.0


DEFAULT_OPTIONS = StepperOptions()


class StageSystem:
    """Residual map of the stage equations for one step.

    The unknown vector is packed as ``(Q_2..Q_s, P_1..P_s, Lam_1..Lam_{s-1})``
    with every block stored row-major, giving
    ``(s-1) d + s d + (s-1) m`` unknowns and as many equations.
    """

    def __init__(self, prob: HamiltonianProblem, tab: TableauPair, s0: PhaseState, h: float):
        self.prob, self.tab, self.s0, self.h = prob, tab, s0, h
        s, d, m = tab.s, prob.d, prob.m
        self._nq = (s - 1) * d
        self._np = s * d
        self.size = self._nq + self._np + (s - 1) * m

    def unpack(self, z):
        s, d, m = self.tab.s, self.prob.d, self.prob.m
        Q = np.empty((s, d))
        Q[0] = self.s0.q
        Q[1:] = z[: self._nq].reshape(s - 1, d)
        P = z[self._nq : self._nq + self._np].reshape(s, d)
        Lam = np.zeros((s, m))
        Lam[: s - 1] = z[self._nq + self._np :].reshape(s - 1, m)
        return Q, P, Lam

    def pack(self, Q, P, Lam):
        return np.concatenate([np.ravel(Q[1:]), np.ravel(P), np.ravel(Lam[:-1])])

    def forces(self, Q, P, Lam):
        """Stage velocities ``k`` and forces ``l`` (``Lam`` rows used as given)."""
        prob = self.prob
        K = np.array([prob.Hp(P[i], Q[i]) for i in range(len(Q))])
        L = np.array([-prob.Hq(P[i], Q[i]) - prob.G(Q[i]).T @ Lam[i] for i in range(len(Q))])
        return K, L

    def residual(self, z):
        tab, h, s0, prob = self.tab, self.h, self.s0, self.prob
        Q, P, Lam = self.unpack(z)
        K, L = self.forces(Q, P, Lam)
        FQ = Q[1:] - s0.q - h * tab.A[1:] @ K
        FP = P - s0.p - h * tab.A_hat @ L
        Fg = [prob.g(Q[i]) for i in range(1, tab.s)]
        return np.concatenate([FQ.ravel(), FP.ravel(), np.ravel(Fg)])

    def initial_guess(self, warm=None):
        """Trivial guess, or a converged stage solution shifted to this base point."""
        s, d, m = self.tab.s, self.prob.d, self.prob.m
        if warm is None:
            return self.pack(np.tile(self.s0.q, (s, 1)), np.tile(self.s0.p, (s, 1)), np.zeros((s, m)))
        Q = warm.Q - warm.base.q + self.s0.q
        P = warm.P - warm.base.p + self.s0.p
        if Q.shape != (s, d):
            return self.initial_guess(None)
        return self.pack(Q, P, warm.multipliers)


@dataclass
class StepRecord:
    state_out: PhaseState
    alpha: float
    newton_iters_stage: int
    newton_iters_proj: int
    residual_stage: float
    residual_proj: float
    multipliers: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    base: PhaseState

    def rattle_reduced_multipliers(self):
        """``(lambda_1, lambda_2)`` of the reduced two-stage alpha-Rattle system."""
        if self.multipliers.shape[0] != 2:
            raise ValueError("reduced multipliers are defined for two-stage methods only")
        a = self.alpha
        return (0.5 + a) * self.multipliers[0], (0.5 - a) * self.multipliers[1]


def _validate(prob, tab, s0, h, opts, check_state=True):
    if not (h > 0) or h > opts.h_max:
        raise InvalidStepSize(f"step size h = {h!r} outside (0, {opts.h_max}]")
    if check_state:
        g_res, hidden = consistency_residuals(prob, s0)
        lim = opts.consistency_factor * opts.tol
        if g_res > lim or hidden > lim:
            raise InconsistentState(
                f"start state off the manifold: |g| = {g_res:.2e}, |G Hp| = {hidden:.2e} (limit {lim:.1e})"
            )


def _is_constraint_preserving(tab: TableauPair) -> bool:
    A, Ah, b = tab.A, tab.A_hat, tab.b
    return (
        np.max(np.abs(A[0])) <= STRUCTURE_TOL
        and np.max(np.abs(A[-1] - b)) <= STRUCTURE_TOL
        and np.max(np.abs(Ah[:, -1])) <= STRUCTURE_TOL
    )


def prk_step(
    prob: HamiltonianProblem,
    tab: TableauPair,
    s0: PhaseState,
    h: float,
    warm: StepRecord | None = None,
    options: StepperOptions = DEFAULT_OPTIONS,
) -> StepRecord:
    """Advance ``s0`` by one step of size ``h`` staying on the constraint manifold.

    ``warm`` may be any earlier converged record of the same tableau size; its
    stages, shifted to ``s0``, seed the stage Newton iteration.
    """
    if not tab.family.constraint_preserving or not _is_constraint_preserving(tab):
        raise TableauNotConstraintPreserving(
            f"tableau {tab.family.value} (alpha={tab.alpha}) violates a_1j = 0, a_sj = b_j"
        )
    _validate(prob, tab, s0, h, options)

    system = StageSystem(prob, tab, s0, h)
    try:
        z, it_stage, res_stage = newton_solve(
            system.residual, system.initial_guess(warm), options.tol, options.max_iter
        )
    except NewtonDivergence as exc:
        exc.phase = "stage"
        raise
    Q, P, Lam = system.unpack(z)
    q1 = Q[-1].copy()

    # projection: p1 and Lam_s from the hidden constraint
    s, d = tab.s, prob.d
    _, L = system.forces(Q, P, Lam)
    Gq1 = prob.G(q1)
    bh = tab.b_hat
    p_pred = s0.p + h * (bh[:-1] @ L[:-1]) - h * bh[-1] * prob.Hq(P[-1], Q[-1])

    def proj_residual(x):
        p1, lam_s = x[:d], x[d:]
        return np.concatenate([p1 - p_pred + h * bh[-1] * (Gq1.T @ lam_s), Gq1 @ prob.Hp(p1, q1)])

    try:
        x, it_proj, res_proj = newton_solve(
            proj_residual, np.concatenate([p_pred, np.zeros(prob.m)]), options.tol, options.max_iter
        )
    except NewtonDivergence as exc:
        exc.phase = "projection"
        raise
    Lam[-1] = x[d:]
    out = PhaseState(x[:d], q1, s0.t + h)
    return StepRecord(out, tab.alpha, it_stage, it_proj, res_stage, res_proj, Lam, Q, P.copy(), s0)


def prk_step_unconstrained_tableau(
    prob: HamiltonianProblem,
    tab: TableauPair,
    s0: PhaseState,
    h: float,
    options: StepperOptions = DEFAULT_OPTIONS,
) -> StepRecord:
    """Plain PRK step on the Hamiltonian vector field with the constraint force dropped.

    Accepts any tableau, including ones that break ``a_1j = 0``; nothing keeps
    the result on the manifold.
    """
    _validate(prob, tab, s0, h, options, check_state=False)
    s, d = tab.s, prob.d

    def unpack(z):
        return z[: s * d].reshape(s, d), z[s * d :].reshape(s, d)

    def forces(Q, P):
        K = np.array([prob.Hp(P[i], Q[i]) for i in range(s)])
        L = np.array([-prob.Hq(P[i], Q[i]) for i in range(s)])
        return K, L

    def residual(z):
        Q, P = unpack(z)
        K, L = forces(Q, P)
        return np.concatenate([(Q - s0.q - h * tab.A @ K).ravel(), (P - s0.p - h * tab.A_hat @ L).ravel()])

    z0 = np.concatenate([np.tile(s0.q, s), np.tile(s0.p, s)])
    try:
        z, it, res = newton_solve(residual, z0, options.tol, options.max_iter)
    except NewtonDivergence as exc:
        exc.phase = "stage"
        raise
    Q, P = unpack(z)
    K, L = forces(Q, P)
    out = PhaseState(s0.p + h * tab.b_hat @ L, s0.q + h * tab.b @ K, s0.t + h)
    return StepRecord(out, tab.alpha, it, 0, res, 0.0, np.zeros((s, prob.m)), Q, P, s0)
