"""Acceptance criteria, one test per criterion.

Runs with ``pytest tests/test_acceptance.py -v``; the satellite error tables
take about a minute because of the fine reference solution.
"""

from functools import lru_cache

import numpy as np
import pytest

from alphaprk import (
    AlphaSearchPolicy,
    alpha_scaling_probe,
    build_tableau,
    check_conditions,
    convergence_study,
    get_problem,
    integrate,
)
from alphaprk.problems import consistency_residuals
from alphaprk.stepper import prk_step_unconstrained_tableau
from alphaprk.tableaus import build_wtransform2

from conftest import cached_run
from oracles import shake_rattle_pendulum

SEARCHED = ["alpha-rattle", "lobatto3-a", "lobatto3-b"]
# Energy checks cover alpha-Rattle and the IIIA-hat variant; the IIIB-hat
# variant has no energy root on the pendulum.
ENERGY_FAMILIES = ["alpha-rattle", "lobatto3-a"]

# Error tables search alpha* to 1e-14 so the search stays active over the
# whole table; see README.
TABLE_POLICY = AlphaSearchPolicy(energy_tol=1e-14, failure="strict")
ROUND_OFF_FLOOR = 1e-11


def search_run(problem, family, h):
    failure = "strict" if family in ENERGY_FAMILIES else "best-effort"
    return cached_run(problem, family, h, 10.0, failure)


@lru_cache(maxsize=None)
def table(problem, family, T):
    prob, s0 = get_problem(problem)
    return convergence_study(prob, family, TABLE_POLICY, 0.25, 5, T, s0)


def report(rep):
    for h, ep, op, eq, oq in rep.rows:
        print(f"  h={h:<9g} e_p={ep:.4e} order={op if op is None else round(op, 4)} "
              f"e_q={eq:.4e} order={oq if oq is None else round(oq, 4)}")


def within_factor(x, target, factor=3.0):
    return target / factor <= x <= target * factor


def test_criterion_01_tableau_algebra():
    rng = np.random.default_rng(20240101)
    for family in ["alpha-rattle", "lobatto3-a", "lobatto3-b", "wtransform2"]:
        for alpha in np.r_[rng.uniform(-0.4, 0.4, 1000), -0.4, 0.4]:
            t = build_tableau(family, alpha)
            rep = check_conditions(t)
            assert rep.symplectic <= 1e-13, (family, alpha)
            assert rep.sum_b <= 1e-13 and np.array_equal(t.b, t.b_hat)
            if t.family.constraint_preserving:
                assert rep.stiff_accuracy <= 1e-13, (family, alpha)
    rattle = build_tableau("alpha-rattle", 0.0)
    assert np.max(np.abs(rattle.A - [[0, 0], [0.5, 0.5]])) <= 1e-15
    assert np.max(np.abs(rattle.A_hat - [[0.5, 0], [0.5, 0]])) <= 1e-15
    iiia = [[0, 0, 0], [5 / 24, 1 / 3, -1 / 24], [1 / 6, 2 / 3, 1 / 6]]
    iiib = [[1 / 6, -1 / 6, 0], [1 / 6, 1 / 3, 0], [1 / 6, 5 / 6, 0]]
    for family in ["lobatto3", "lobatto3-a", "lobatto3-b"]:
        t = build_tableau(family, 0.0)
        assert np.max(np.abs(t.A - iiia)) <= 1e-15
        assert np.max(np.abs(t.A_hat - iiib)) <= 1e-15


def test_criterion_02_classical_reduction():
    prob, s = get_problem("pendulum")
    log = integrate(prob, "alpha-rattle", s, 0.1, 10.0, AlphaSearchPolicy(fixed_alpha=0.0))
    p, q = s.p, s.q
    worst = 0.0
    for n in range(1, 101):
        p, q = shake_rattle_pendulum(p, q, 0.1)
        worst = max(worst, np.max(np.abs(log.p[n] - p)), np.max(np.abs(log.q[n] - q)))
    print(f"  max deviation from Shake-Rattle over 100 steps: {worst:.2e}")
    assert log.steps == 100 and worst <= 1e-11


def test_criterion_03_manifold_preservation():
    for problem in ["pendulum", "satellites"]:
        for family in SEARCHED:
            for h in (0.1, 0.2):
                log = search_run(problem, family, h)
                g, hidden = log.g_inf.max(), log.hidden_inf.max()
                print(f"  {problem:10s} {family:12s} h={h}: |g|={g:.1e} |G Hp|={hidden:.1e}")
                assert g <= 1e-11 and hidden <= 1e-11


def test_criterion_04_energy_conservation():
    for problem in ["pendulum", "satellites"]:
        for family in ENERGY_FAMILIES:
            for h in (0.1, 0.2):
                log = search_run(problem, family, h)
                err = np.max(np.abs(log.energy_err))
                print(f"  {problem:10s} {family:12s} h={h}: max |H - H0| = {err:.2e}")
                assert err <= 1e-11 and not any(log.flags)
    control = cached_run("pendulum", "alpha-rattle", 0.1, 10.0, fixed_alpha=0.0)
    err = np.max(np.abs(control.energy_err))
    print(f"  fixed alpha = 0 control: max |H - H0| = {err:.2e}")
    assert 1e-10 <= err <= 1e-5


def test_criterion_05_angular_momentum():
    runs = {
        "Rattle": cached_run("pendulum", "alpha-rattle", 0.1, 10.0, fixed_alpha=0.0),
        "Lobatto IIIA-IIIB": cached_run("pendulum", "lobatto3", 0.1, 10.0),
        "alpha-Rattle": search_run("pendulum", "alpha-rattle", 0.1),
        "alpha-PRK III": search_run("pendulum", "lobatto3-a", 0.1),
    }
    for name, log in runs.items():
        drift = np.max(np.abs(log.quad_inv_errs[:, 0]))
        print(f"  {name:18s} max L3 drift = {drift:.1e}")
        assert drift <= 1e-11


def test_criterion_06_alpha_rattle_pendulum_orders():
    rep = table("pendulum", "alpha-rattle", 0.5)
    report(rep)
    assert all(abs(o - 2) <= 0.15 for o in rep.order_p + rep.order_q)
    assert within_factor(rep.e_p[0], 3.3643e-4)


def test_criterion_07_prk3_pendulum_orders():
    rep = table("pendulum", "lobatto3-a", 1.0)
    report(rep)
    n = len(rep.h) - 1 if min(rep.e_p[-1], rep.e_q[-1]) < ROUND_OFF_FLOOR else len(rep.h)
    orders = rep.order_p[: n - 1] + rep.order_q[: n - 1]
    bad = [round(o, 3) for o in orders if abs(o - 4) > 0.3]
    assert not bad, f"orders outside 4 +- 0.3: {bad}"
    assert within_factor(rep.e_p[0], 4.0025e-7)


@pytest.mark.slow
def test_criterion_08_satellites_orders():
    rattle = table("satellites", "alpha-rattle", 1.0)
    report(rattle)
    prk3 = table("satellites", "lobatto3-a", 1.0)
    report(prk3)
    assert rattle.reference["g_inf"] <= 1e-12 and rattle.reference["hidden_inf"] <= 1e-12
    assert within_factor(rattle.e_p[0], 1.2290e-3)
    assert within_factor(prk3.e_p[0], 1.2299e-6)
    assert all(abs(o - 2) <= 0.15 for o in rattle.order_p + rattle.order_q)
    bad = [round(o, 3) for o in prk3.order_p + prk3.order_q if abs(o - 4) > 0.3]
    assert not bad, f"alpha-PRK III orders outside 4 +- 0.3: {bad}"


def test_criterion_09_alpha_scaling():
    prob, s = get_problem("pendulum")
    rows = alpha_scaling_probe(prob, "alpha-rattle", s, [0.1, 0.05, 0.025], steps=50)
    ratios = [b / a for (_, a), (_, b) in zip(rows, rows[1:])]
    print(f"  medians {[f'{m:.3e}' for _, m in rows]} ratios {[round(r, 3) for r in ratios]}")
    assert all(0.3 <= r <= 0.7 for r in ratios)


def test_criterion_10_wtransform_leaves_manifold():
    prob, s = get_problem("pendulum")
    tab = build_wtransform2(0.3)
    worst = 0.0
    for n in range(1, 101):
        s = prk_step_unconstrained_tableau(prob, tab, s, 0.1).state_out
        worst = max(worst, consistency_residuals(prob, s)[0])
        if worst > 1e-6:
            break
    print(f"  |g| = {worst:.2e} after {n} steps")
    assert worst > 1e-6
