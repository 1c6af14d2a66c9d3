"""Full Newton iteration for square nonlinear systems."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NewtonDivergence, SingularJacobian

_SQRT_EPS = np.sqrt(np.finfo(float).eps)


def fd_jacobian(residual: Callable, z: np.ndarray, f0: np.ndarray | None = None) -> np.ndarray:
    """Forward-difference Jacobian with step ``sqrt(eps) * (1 + |z_i|)``."""
    if f0 is None:
        f0 = residual(z)
    J = np.empty((f0.size, z.size))
    zp = z.copy()
    for i in range(z.size):
        dz = _SQRT_EPS * (1.0 + abs(z[i]))
        zp[i] = z[i] + dz
        # use the representable increment
        dz = zp[i] - z[i]
        J[:, i] = (residual(zp) - f0) / dz
        zp[i] = z[i]
    return J


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    z0,
    tol: float = 1e-13,
    max_iter: int = 50,
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, int, float]:
    """Solve ``residual(z) = 0`` by Newton's method.

    The Jacobian is refreshed every iteration, either from ``jacobian`` or by
    forward differences.  Convergence means ``|residual(z)|_inf <= tol``.

    Returns
    -------
    z, iterations, final residual norm

    Raises
    ------
    NewtonDivergence
        If the tolerance is not met within ``max_iter`` iterations or the
        residual becomes non-finite.  ``exc.best`` holds the best iterate.
    SingularJacobian
        If the linear solve fails.
    """
    z = np.array(z0, dtype=float)
    f = np.asarray(residual(z), dtype=float)
    if f.shape != z.shape:
        raise ValueError(f"residual has shape {f.shape}, unknowns {z.shape}")
    norm = float(np.max(np.abs(f))) if f.size else 0.0
    best, best_norm = z.copy(), norm
    it = 0
    while not norm <= tol:
        if it >= max_iter or not np.isfinite(norm):
            raise NewtonDivergence(
                f"Newton did not converge in {it} iterations (|F| = {best_norm:.3e})",
                best=best,
                residual=best_norm,
            )
        J = jacobian(z) if jacobian is not None else fd_jacobian(residual, z, f)
        try:
            dz = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            raise SingularJacobian(
                "singular Jacobian in Newton iteration", best=best, residual=best_norm
            ) from None
        z = z + dz
        f = np.asarray(residual(z), dtype=float)
        norm = float(np.max(np.abs(f)))
        it += 1
        if norm < best_norm:
            best, best_norm = z.copy(), norm
    return z, it, norm
