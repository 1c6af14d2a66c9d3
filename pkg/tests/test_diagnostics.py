"""Invariant summaries, references, error tables and CSV output."""

import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphaprk.alpha_search import AlphaSearchPolicy, integrate
from alphaprk.diagnostics import (
    ReferenceError,
    convergence_study,
    errors_at_T,
    invariant_summary,
    make_reference,
    observed_orders,
)
from alphaprk.errors import ConfigInvalid
from alphaprk.trajectory import TrajectoryLog

from conftest import cached_run


@settings(max_examples=100, deadline=None)
@given(
    C=st.floats(1e-3, 1e3),
    k=st.floats(0.5, 6.0),
    h0=st.floats(0.01, 1.0),
)
def test_orders_exact_on_power_laws(C, k, h0):
    hs = [h0 / 2**j for j in range(5)]
    orders = observed_orders(hs, [C * h**k for h in hs])
    assert np.max(np.abs(np.array(orders) - k)) <= 1e-12


def test_orders_of_zero_errors_are_nan():
    assert np.isnan(observed_orders([1.0, 0.5], [0.0, 0.0])[0])


def test_summary_of_empty_log(pendulum):
    prob, s = pendulum
    summary = invariant_summary(TrajectoryLog.start(prob, s))
    assert summary["steps"] == 0
    assert summary["max_energy_err"] == summary["max_g"] == summary["max_hidden"] == 0.0
    assert summary["max_quad_inv_drift"] == {"L3": 0.0}
    assert summary["n_flagged"] == 0 and summary["max_abs_alpha"] == 0.0


def test_summary_of_searched_run():
    summary = invariant_summary(cached_run("pendulum", "alpha-rattle", 0.1, 10.0))
    assert summary["steps"] == 100
    assert summary["max_quad_inv_drift"]["L3"] <= 1e-12
    assert summary["max_energy_err"] <= 1e-12
    json.dumps(summary)


def test_summary_of_fixed_run():
    summary = invariant_summary(cached_run("pendulum", "alpha-rattle", 0.1, 10.0, fixed_alpha=0.0))
    assert 1e-10 <= summary["max_energy_err"] <= 1e-5


def test_csv_round_trips(pendulum):
    prob, s = pendulum
    log = integrate(prob, "alpha-rattle", s, 0.1, 1.0)
    rows = list(csv.reader(io.StringIO(log.to_csv())))
    assert rows[0] == [
        "step", "t", "alpha", "energy_err", "g_inf", "hidden_inf",
        "quad_inv_err_L3", "newton_stage", "newton_proj", "flag",
    ]
    body = rows[1:]
    assert len(body) == log.steps + 1
    np.testing.assert_array_equal([float(r[2]) for r in body[1:]], log.alpha[1:])
    np.testing.assert_array_equal([float(r[3]) for r in body], log.energy_err)
    np.testing.assert_array_equal([float(r[1]) for r in body], log.t)


def test_reference_at_time_zero(pendulum):
    prob, s = pendulum
    assert make_reference(prob, s, 0.0, 1e-3) is s


def test_reference_self_agreement(pendulum):
    prob, s = pendulum
    ref = make_reference(prob, s, 0.5, 0.015625 / 50)
    policy = AlphaSearchPolicy()
    assert errors_at_T(prob, "lobatto3", policy, 0.015625 / 50, 0.5, ref, s) == (0.0, 0.0)


def test_coarse_reference_is_rejected(pendulum):
    prob, s = pendulum
    with pytest.raises(ReferenceError):
        make_reference(prob, s, 0.5, 0.25)


def test_convergence_study_report(pendulum):
    prob, s = pendulum
    rep = convergence_study(prob, "lobatto3", AlphaSearchPolicy(), 0.25, 3, 0.5, s)
    d = rep.to_dict()
    assert [r["h"] for r in d["rows"]] == [0.25, 0.125, 0.0625]
    assert d["rows"][0]["order_p"] is None
    assert d["reference"]["method"] == "lobatto3_iiia_iiib"
    assert d["reference"]["h_ref"] == pytest.approx(0.0625 / 50)
    assert all(abs(o - 4) < 0.3 for o in rep.order_p)
    json.loads(json.dumps(d))


def test_convergence_study_config_errors(pendulum):
    prob, s = pendulum
    with pytest.raises(ConfigInvalid):
        convergence_study(prob, "lobatto3", AlphaSearchPolicy(), 0.25, 1, 0.5, s)
    with pytest.raises(ConfigInvalid):
        convergence_study(prob, "lobatto3", AlphaSearchPolicy(), 0.3, 2, 0.5, s)
