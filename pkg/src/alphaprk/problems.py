"""Constrained Hamiltonian problems.

A problem bundles the energy ``H(p, q)``, its gradients, the holonomic
constraint ``g(q) = 0`` and its Jacobian ``G(q)``.  The dynamics live on

    M = {(p, q) : g(q) = 0, G(q) H_p(p, q) = 0}

where the second condition is the hidden (velocity-level) constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import InconsistentState, NewtonDivergence


@dataclass(frozen=True)
class QuadraticInvariant:
    """A first integral ``I(p, q) = q^T D p``."""

    D: np.ndarray
    label: str

    def __call__(self, p, q) -> float:
        return float(q @ self.D @ p)

    def check_membership(self, g, q_points, s_values=(-1.0, -0.1, 0.1, 1.0)) -> float:
        """Largest ``|g(exp(sD) q) - g(q)|`` over the sample points."""
        worst = 0.0
        for s in s_values:
            R = expm(s * self.D)
            for q in q_points:
                worst = max(worst, float(np.max(np.abs(g(R @ q) - g(q)))))
        return worst


@dataclass(frozen=True)
class HamiltonianProblem:
    name: str
    d: int
    m: int
    H: Callable[[np.ndarray, np.ndarray], float]
    Hp: Callable[[np.ndarray, np.ndarray], np.ndarray]
    Hq: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    quad_invariants: Sequence[QuadraticInvariant] = field(default_factory=tuple)
    # Optional Hessian blocks; nothing in the package requires them.
    Hpp: Callable | None = None


@dataclass(frozen=True)
class PhaseState:
    p: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p", np.array(self.p, dtype=float))
        object.__setattr__(self, "q", np.array(self.q, dtype=float))
        object.__setattr__(self, "t", float(self.t))


def consistency_residuals(prob: HamiltonianProblem, s: PhaseState) -> tuple[float, float]:
    """``(|g(q)|_inf, |G(q) H_p(p, q)|_inf)``."""
    g_res = float(np.max(np.abs(prob.g(s.q))))
    hidden = float(np.max(np.abs(prob.G(s.q) @ prob.Hp(s.p, s.q))))
    return g_res, hidden


def project_initial(
    prob: HamiltonianProblem, s: PhaseState, tol: float = 1e-12, max_iter: int = 50
) -> PhaseState:
    """Remove the momentum component violating the hidden constraint.

    Solves ``G(q) H_p(p - G(q)^T lam, q) = 0`` for ``lam`` and returns the
    corrected state.  Positions are not touched, so ``g(q)`` must already be
    small.
    """
    from .newton import newton_solve

    g_res, hidden = consistency_residuals(prob, s)
    if g_res > tol:
        raise InconsistentState(f"|g(q)| = {g_res:.3e} exceeds {tol:.1e}; only momenta are projected")
    if hidden <= tol:
        return s
    Gq = prob.G(s.q)

    def residual(lam):
        return Gq @ prob.Hp(s.p - Gq.T @ lam, s.q)

    try:
        lam, _, _ = newton_solve(residual, np.zeros(prob.m), tol=tol, max_iter=max_iter)
    except NewtonDivergence as exc:
        exc.phase = "initial-projection"
        raise
    return PhaseState(s.p - Gq.T @ lam, s.q, s.t)


def _rotation_generator(axis: int) -> np.ndarray:
    """3x3 matrix ``D`` with ``q^T D p`` the ``axis`` component of ``q x p``."""
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    D = np.zeros((3, 3))
    D[i, j] = 1.0
    D[j, i] = -1.0
    return D


def pendulum_problem() -> HamiltonianProblem:
    """Unit spherical pendulum under unit gravity along ``-z``."""
    e3 = np.array([0.0, 0.0, 1.0])

    def H(p, q):
        return 0.5 * float(p @ p) + float(q[2])

    def Hp(p, q):
        return np.array(p, dtype=float)

    def Hq(p, q):
        return e3.copy()

    def g(q):
        return np.array([q @ q - 1.0])

    def G(q):
        return 2.0 * np.asarray(q, dtype=float)[None, :]

    L3 = QuadraticInvariant(_rotation_generator(2), "L3")
    return HamiltonianProblem("pendulum", 3, 1, H, Hp, Hq, g, G, (L3,), Hpp=lambda p, q: np.eye(3))


def pendulum_initial_state() -> PhaseState:
    return PhaseState([0.06, 0.0, 0.0], [0.0, np.sin(0.1), -np.cos(0.1)])


def satellites_problem() -> HamiltonianProblem:
    """Three unit-mass satellites on a closed triangular tether of unit lengths.

    Each body feels the gravity of a unit central mass at the origin.  The
    total angular momentum about the origin is conserved, so all three of its
    components are registered as quadratic invariants.
    """
    pairs = ((0, 1), (1, 2), (2, 0))

    def H(p, q):
        Q = q.reshape(3, 3)
        return 0.5 * float(p @ p) - float(np.sum(1.0 / np.sqrt(np.sum(Q * Q, axis=1))))

    def Hp(p, q):
        return np.array(p, dtype=float)

    def Hq(p, q):
        Q = q.reshape(3, 3)
        r2 = np.sum(Q * Q, axis=1)
        return (Q * r2[:, None] ** -1.5).ravel()

    def g(q):
        Q = q.reshape(3, 3)
        return np.array([(Q[i] - Q[j]) @ (Q[i] - Q[j]) - 1.0 for i, j in pairs])

    def G(q):
        Q = q.reshape(3, 3)
        out = np.zeros((3, 9))
        for k, (i, j) in enumerate(pairs):
            diff = 2.0 * (Q[i] - Q[j])
            out[k, 3 * i : 3 * i + 3] = diff
            out[k, 3 * j : 3 * j + 3] = -diff
        return out

    invariants = tuple(
        QuadraticInvariant(np.kron(np.eye(3), _rotation_generator(axis)), f"L{'xyz'[axis]}")
        for axis in range(3)
    )
    return HamiltonianProblem("satellites", 9, 3, H, Hp, Hq, g, G, invariants, Hpp=lambda p, q: np.eye(9))


def satellites_initial_state(z0: float = 20.0) -> PhaseState:
    """Consistent start with zero total energy; ``v0`` solved from ``H = 0``."""
    q = np.array([0.0, 0.5, z0, 0.0, -0.5, z0, 0.0, 0.0, z0 - np.sqrt(3.0) / 2])
    r = np.linalg.norm(q.reshape(3, 3), axis=1)
    v0 = np.sqrt(2.0 * np.sum(1.0 / r))
    p = np.zeros(9)
    p[6] = v0
    return PhaseState(p, q)


PROBLEMS = {
    "pendulum": (pendulum_problem, pendulum_initial_state),
    "satellites": (satellites_problem, satellites_initial_state),
}


def get_problem(name: str) -> tuple[HamiltonianProblem, PhaseState]:
    """Problem and its default consistent initial state, by name."""
    try:
        make, init = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return make(), init()
