"""Trajectory log with per-step invariant residuals and its CSV form."""

from __future__ import annotations

import csv
import io

import numpy as np

from .problems import HamiltonianProblem, PhaseState, consistency_residuals


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


class TrajectoryLog:
    """States and invariant residuals, one row per step including the start.

    ``energy_err`` and ``quad_inv_errs`` are signed differences from the
    initial values; ``alpha`` is NaN for the initial row.
    """

    def __init__(self, prob: HamiltonianProblem, meta: dict | None = None):
        self.prob = prob
        self.meta = dict(meta or {})
        self.labels = [inv.label for inv in prob.quad_invariants]
        self._rows = []
        self._H0 = None
        self._I0 = None

    @classmethod
    def start(cls, prob, s0: PhaseState, meta=None) -> "TrajectoryLog":
        log = cls(prob, meta)
        log._H0 = prob.H(s0.p, s0.q)
        log._I0 = [inv(s0.p, s0.q) for inv in prob.quad_invariants]
        log._add(s0, float("nan"), 0, 0, "")
        return log

    def _add(self, s, alpha, it_stage, it_proj, flag):
        prob = self.prob
        g_res, hidden = consistency_residuals(prob, s)
        self._rows.append({
            "t": s.t,
            "p": s.p.copy(),
            "q": s.q.copy(),
            "alpha": float(alpha),
            "energy_err": prob.H(s.p, s.q) - self._H0,
            "g_inf": g_res,
            "hidden_inf": hidden,
            "quad": [inv(s.p, s.q) - i0 for inv, i0 in zip(prob.quad_invariants, self._I0)],
            "newton_stage": int(it_stage),
            "newton_proj": int(it_proj),
            "flag": flag,
        })

    def append(self, s: PhaseState, alpha, it_stage=0, it_proj=0, flag=""):
        if self._H0 is None:
            raise RuntimeError("log has no initial state; use TrajectoryLog.start")
        self._add(s, alpha, it_stage, it_proj, flag)

    def __len__(self):
        return len(self._rows)

    def _col(self, key, dtype=float):
        return np.array([r[key] for r in self._rows], dtype=dtype)

    @property
    def steps(self) -> int:
        return len(self._rows) - 1

    @property
    def t(self):
        return self._col("t")

    @property
    def p(self):
        return np.array([r["p"] for r in self._rows])

    @property
    def q(self):
        return np.array([r["q"] for r in self._rows])

    @property
    def alpha(self):
        return self._col("alpha")

    @property
    def energy_err(self):
        return self._col("energy_err")

    @property
    def g_inf(self):
        return self._col("g_inf")

    @property
    def hidden_inf(self):
        return self._col("hidden_inf")

    @property
    def quad_inv_errs(self):
        return np.array([r["quad"] for r in self._rows], dtype=float).reshape(len(self), len(self.labels))

    @property
    def newton_stage(self):
        return self._col("newton_stage", int)

    @property
    def newton_proj(self):
        return self._col("newton_proj", int)

    @property
    def flags(self):
        return [r["flag"] for r in self._rows]

    @property
    def final(self) -> PhaseState:
        r = self._rows[-1]
        return PhaseState(r["p"], r["q"], r["t"])

    def csv_header(self):
        return (
            ["step", "t", "alpha", "energy_err", "g_inf", "hidden_inf"]
            + [f"quad_inv_err_{lab}" for lab in self.labels]
            + ["newton_stage", "newton_proj", "flag"]
        )

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.csv_header())
        for n, r in enumerate(self._rows):
            w.writerow(
                [n, fmt(r["t"]), fmt(r["alpha"]), fmt(r["energy_err"]), fmt(r["g_inf"]), fmt(r["hidden_inf"])]
                + [fmt(x) for x in r["quad"]]
                + [r["newton_stage"], r["newton_proj"], r["flag"]]
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()
