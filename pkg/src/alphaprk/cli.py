"""Command-line entry point.

Subcommands ``integrate``, ``converge``, ``tableau`` and ``probe-alpha``.
Settings come from flags, optionally on top of a JSON ``--config`` file whose
keys are the long flag names with dashes or underscores.  Flags win.

Exit codes: 0 success, 1 run failure, 2 invalid configuration.  Failures
print a JSON object ``{"error": <code>, "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

from .alpha_search import AlphaSearchPolicy, alpha_scaling_probe, integrate
from .diagnostics import ReferenceError, convergence_study, invariant_summary
from .errors import AlphaPRKError, ConfigInvalid, InconsistentState, InvalidStepSize
from .problems import PROBLEMS, PhaseState, consistency_residuals, get_problem
from .tableaus import DEFAULT_ALPHA_CAP, build_tableau, check_conditions, parse_family

EXIT_OK, EXIT_RUN, EXIT_CONFIG = 0, 1, 2

# Errors that mean the request itself is unusable.
_CONFIG_CODES = {
    "config-invalid",
    "parameter-out-of-domain",
    "degenerate-weights",
    "tableau-not-constraint-preserving",
    "inconsistent-state",
    "invalid-step-size",
}

DEFAULTS = {
    "problem": "pendulum",
    "family": "alpha-rattle",
    "h": 0.1,
    "t_end": 10.0,
    "alpha_mode": "search",
    "alpha_domain": None,
    "energy_tol": None,
    "failure": "warn",
    "levels": 5,
    "alpha": 0.0,
    "h_list": "0.1,0.05,0.025",
    "steps": 50,
    "csv": None,
    "summary": None,
    "out": None,
    "initial_state": None,
}


@dataclass
class RunConfig:
    problem: str
    family: str
    h: float
    t_end: float
    alpha_mode: str = "search"
    alpha_domain: tuple[float, float] | None = None
    energy_tol: float | None = None
    failure: str = "warn"
    csv: str | None = None
    summary: str | None = None
    out: str | None = None
    initial_state: dict | None = None

    @property
    def fixed_alpha(self) -> float | None:
        if self.alpha_mode == "search":
            return None
        return float(self.alpha_mode.split(":", 1)[1])

    def policy(self) -> AlphaSearchPolicy:
        return AlphaSearchPolicy(
            domain=self.alpha_domain,
            energy_tol=self.energy_tol,
            failure="strict" if self.failure == "strict" else "best-effort",
            fixed_alpha=self.fixed_alpha,
        )

    def resolve(self):
        """Problem, start state and policy, validated."""
        if self.problem not in PROBLEMS:
            raise ConfigInvalid(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        family = parse_family(self.family)
        prob, s0 = get_problem(self.problem)
        if self.initial_state is not None:
            try:
                s0 = PhaseState(self.initial_state["p"], self.initial_state["q"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigInvalid(f"initial_state needs numeric 'p' and 'q' arrays: {exc}") from None
            if s0.p.shape != (prob.d,) or s0.q.shape != (prob.d,):
                raise ConfigInvalid(f"initial_state must have {prob.d} components in p and q")
            opts = self.policy().stepper
            if max(consistency_residuals(prob, s0)) > opts.consistency_factor * opts.tol:
                raise InconsistentState("initial_state is not on the constraint manifold")
        policy = self.policy()
        if self.h > policy.stepper.h_max:
            raise InvalidStepSize(f"step size h = {self.h} exceeds {policy.stepper.h_max}")
        if not family.constraint_preserving:
            raise ConfigInvalid(f"family {family.value} cannot be integrated on the manifold")
        if self.fixed_alpha is not None:
            build_tableau(family, self.fixed_alpha, policy.cap_for(family) if self.alpha_domain else DEFAULT_ALPHA_CAP)
        return prob, family, s0, policy


def _float(name, value, positive=False):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(x) or (positive and not x > 0):
        raise ConfigInvalid(f"{name} must be {'positive' if positive else 'finite'}, got {value!r}")
    return x


def _parse_domain(value):
    if value is None:
        return None
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ConfigInvalid(f"alpha domain must be 'lo,hi', got {value!r}")
    return (_float("alpha domain", parts[0]), _float("alpha domain", parts[1]))


def _parse_alpha_mode(value):
    value = str(value)
    if value == "search":
        return value
    if value.startswith("fixed:"):
        _float("fixed alpha", value.split(":", 1)[1])
        return value
    raise ConfigInvalid(f"alpha mode must be 'search' or 'fixed:<x>', got {value!r}")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config file {path!r} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigInvalid("config file must hold a JSON object")
    out = {}
    for key, val in data.items():
        k = key.replace("-", "_")
        if k not in DEFAULTS:
            raise ConfigInvalid(f"unknown config key {key!r}")
        out[k] = val
    return out


def _settings(args) -> dict:
    merged = dict(DEFAULTS)
    merged.update(_load_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _run_config(st) -> RunConfig:
    if st["failure"] not in ("strict", "warn"):
        raise ConfigInvalid(f"failure mode must be 'strict' or 'warn', got {st['failure']!r}")
    tol = None if st["energy_tol"] is None else _float("energy tolerance", st["energy_tol"], positive=True)
    return RunConfig(
        problem=str(st["problem"]),
        family=str(st["family"]),
        h=_float("h", st["h"], positive=True),
        t_end=_float("t-end", st["t_end"], positive=True),
        alpha_mode=_parse_alpha_mode(st["alpha_mode"]),
        alpha_domain=_parse_domain(st["alpha_domain"]),
        energy_tol=tol,
        failure=st["failure"],
        csv=st["csv"],
        summary=st["summary"],
        out=st["out"],
        initial_state=st["initial_state"],
    )


def _dump(obj, path, stream):
    text = json.dumps(obj, indent=2, allow_nan=True) + "\n"
    if path is None:
        stream.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_integrate(st, stdout) -> int:
    cfg = _run_config(st)
    prob, family, s0, policy = cfg.resolve()
    log = integrate(prob, family, s0, cfg.h, cfg.t_end, policy)
    if cfg.csv is not None:
        with open(cfg.csv, "w", newline="") as fh:
            log.write_csv(fh)
    summary = {"run": log.meta, **invariant_summary(log)}
    _dump(summary, cfg.summary, stdout)
    return EXIT_OK


def cmd_converge(st, stdout) -> int:
    cfg = _run_config(st)
    levels = st["levels"]
    if not isinstance(levels, int) or isinstance(levels, bool) or levels < 2:
        raise ConfigInvalid(f"levels must be an integer >= 2, got {levels!r}")
    prob, family, s0, policy = cfg.resolve()
    report = convergence_study(prob, family, policy, cfg.h, levels, cfg.t_end, s0)
    _dump(report.to_dict(), cfg.out, stdout)
    return EXIT_OK


def cmd_tableau(st, stdout) -> int:
    family = parse_family(st["family"])
    alpha = _float("alpha", st["alpha"])
    tab = build_tableau(family, alpha)
    _dump({"tableau": tab.to_dict(), "conditions": check_conditions(tab).to_dict()}, st["out"], stdout)
    return EXIT_OK


def cmd_probe_alpha(st, stdout) -> int:
    cfg = _run_config(st)
    raw = st["h_list"]
    parts = raw.split(",") if isinstance(raw, str) else list(raw)
    h_list = [_float("h-list entry", x, positive=True) for x in parts]
    if len(h_list) < 2 or any(a <= b for a, b in zip(h_list, h_list[1:])):
        raise ConfigInvalid("h-list must hold at least two decreasing step sizes")
    steps = st["steps"]
    if not isinstance(steps, int) or steps < 1:
        raise ConfigInvalid(f"steps must be a positive integer, got {steps!r}")
    prob, family, s0, policy = cfg.resolve()
    if not family.parametrized or policy.fixed_alpha is not None:
        raise ConfigInvalid("probe-alpha needs a parametrized family in search mode")
    rows = alpha_scaling_probe(prob, family, s0, h_list, steps, policy)
    ratios = [b / a if a > 0 else None for (_, a), (_, b) in zip(rows, rows[1:])]
    out = {
        "problem": prob.name,
        "family": family.value,
        "steps": steps,
        "rows": [{"h": h, "median_abs_alpha": m} for h, m in rows],
        "ratios": ratios,
    }
    _dump(out, cfg.out, stdout)
    return EXIT_OK


def _add_run_flags(p, with_outputs=True):
    p.add_argument("--problem", choices=sorted(PROBLEMS))
    p.add_argument("--family", help="alpha-rattle, lobatto3, lobatto3-a, lobatto3-b, ...")
    p.add_argument("--h", type=float, help="step size (first level for converge)")
    p.add_argument("--t-end", dest="t_end", type=float, help="final time")
    p.add_argument("--alpha-mode", dest="alpha_mode", help="'search' or 'fixed:<alpha>'")
    p.add_argument("--alpha-domain", dest="alpha_domain", help="search interval 'lo,hi'")
    p.add_argument("--energy-tol", dest="energy_tol", type=float, help="energy residual tolerance")
    p.add_argument("--failure", choices=["strict", "warn"], help="what to do when no alpha* is found")
    p.add_argument("--config", help="JSON file with default settings")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigInvalid(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alphaprk", description="Energy-conserving symplectic PRK runs on constrained systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("integrate", help="integrate a trajectory")
    _add_run_flags(p)
    p.add_argument("--csv", help="write the trajectory log here")
    p.add_argument("--summary", help="write the invariant summary JSON here (default stdout)")

    p = sub.add_parser("converge", help="errors and observed orders against a reference")
    _add_run_flags(p)
    p.add_argument("--levels", type=int, help="number of step sizes h, h/2, ...")
    p.add_argument("--out", help="write the report JSON here (default stdout)")

    p = sub.add_parser("tableau", help="print a coefficient pair and its condition report")
    p.add_argument("--family")
    p.add_argument("--alpha", type=float)
    p.add_argument("--out")
    p.add_argument("--config")

    p = sub.add_parser("probe-alpha", help="median |alpha*| for a sequence of step sizes")
    _add_run_flags(p)
    p.add_argument("--h-list", dest="h_list", help="comma separated decreasing step sizes")
    p.add_argument("--steps", type=int, help="steps per step size")
    p.add_argument("--out")
    return parser


COMMANDS = {
    "integrate": cmd_integrate,
    "converge": cmd_converge,
    "tableau": cmd_tableau,
    "probe-alpha": cmd_probe_alpha,
}


def _report(exc, stderr) -> int:
    payload = exc.to_dict() if isinstance(exc, AlphaPRKError) else {"error": getattr(exc, "code", "run-failure"), "message": str(exc)}
    code = payload["error"]
    if code in _CONFIG_CODES:
        payload = {"error": "config-invalid", "reason": code, "message": payload["message"]}
        status = EXIT_CONFIG
    else:
        status = EXIT_RUN
    stderr.write(json.dumps(payload) + "\n")
    return status


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](_settings(args), stdout)
    except (AlphaPRKError, ReferenceError) as exc:
        return _report(exc, stderr)
    except OSError as exc:
        return _report(ConfigInvalid(f"cannot write output: {exc}"), stderr)


if __name__ == "__main__":
    sys.exit(main())
