"""Independent reference implementations for the unit pendulum."""

import numpy as np
from scipy.optimize import root

E3 = np.array([0.0, 0.0, 1.0])


def shake_rattle_pendulum(p0, q0, h):
    """Closed-form Shake-Rattle step for the unit pendulum.

    The position multiplier solves a quadratic, the momentum one a linear
    equation.
    """
    v = q0 + h * p0 - 0.5 * h * h * E3
    w = -h * h * q0  # q1 = v + lam * w, from G(q0)^T = 2 q0
    a, b, c = w @ w, 2 * v @ w, v @ v - 1.0
    disc = np.sqrt(b * b - 4 * a * c)
    roots = [(-b + disc) / (2 * a), (-b - disc) / (2 * a)]
    lam = min(roots, key=abs)
    p_half = p0 - 0.5 * h * (E3 + 2 * lam * q0)
    q1 = q0 + h * p_half
    # G(q1) p1 = 0 with p1 = p_half - h/2 (e3 + 2 mu q1)
    r = p_half - 0.5 * h * E3
    mu = (q1 @ r) / (h * (q1 @ q1))
    return p_half - 0.5 * h * (E3 + 2 * mu * q1), q1


def reduced_alpha_rattle(p0, q0, h, alpha):
    """alpha-Rattle written with reduced multipliers and solved by a generic root finder."""
    b1, b2 = 0.5 + alpha, 0.5 - alpha

    def first(x):
        P, lam1 = x[:3], x[3]
        q1 = q0 + h * P
        return np.r_[P - p0 + h * (b1 * E3 + 2 * q0 * lam1), q1 @ q1 - 1.0]

    x = root(first, np.r_[p0, 0.0], tol=1e-15).x
    P, lam1 = x[:3], x[3]
    q1 = q0 + h * P

    def second(y):
        p1, lam2 = y[:3], y[3]
        return np.r_[p1 - P + h * (b2 * E3 + 2 * q1 * lam2), q1 @ p1]

    y = root(second, np.r_[P, 0.0], tol=1e-15).x
    return y[:3], q1, lam1, y[3]
