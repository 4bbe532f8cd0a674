"""Full-sample and sub-group analysis of one trial dataset.

``analyze`` runs the four tests and the four hazard-ratio estimators and
collects each result, or the typed error that prevented it, in its own
cell. A failing cell never stops the others.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import adjustment, hazard, survival
from .data import TrialData
from .errors import ConfigError, CovLogRankError

SCHEMA_VERSION = "1.0"
TEST_NAMES = ("T_L", "T_CL", "T_SL", "T_CSL")
ESTIMATOR_NAMES = ("theta_L", "theta_CL", "theta_SL", "theta_CSL")
ADJUSTED = {"T_CL", "T_CSL", "theta_CL", "theta_CSL"}


def _error_cell(exc):
    return {"error": type(exc).__name__, "message": str(exc)}


def _unavailable(reason):
    return {"error": "Unavailable", "message": reason}


def _test_cell(result):
    return {"numerator": result.numerator, "se": result.se,
            "statistic": result.statistic, "p_value": result.p_value}


def _estimate_cell(est):
    return {"theta": est.theta, "se": est.se, "ci_low": est.ci[0], "ci_high": est.ci[1],
            "level": est.level, "iterations": est.iterations}


def _run(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs), None
    except CovLogRankError as exc:
        return None, exc


def summarize(data: TrialData) -> dict:
    strata = {}
    for label in data.strata:
        m = data.stratum == label
        strata[str(int(label))] = {"n": int(m.sum()), "n_arm1": int((data.arm[m] == 1).sum()),
                                   "n_arm0": int((data.arm[m] == 0).sum()),
                                   "events": int(data.event[m].sum())}
    return {"n": data.n, "n_arm1": int(data.arm.sum()), "n_arm0": int(data.n - data.arm.sum()),
            "events": int(data.event.sum()), "covariates": list(data.covariate_names),
            "strata": strata}


def _cells(data, pi, level, which):
    """Tests and estimators named in ``which`` for ``data``."""
    runners = {
        "T_L": (survival.logrank_test, (data,)),
        "T_CL": (adjustment.adjusted_logrank, (data, pi)),
        "T_SL": (survival.stratified_logrank_test, (data,)),
        "T_CSL": (adjustment.adjusted_stratified_logrank, (data, pi)),
        "theta_L": (hazard.solve_theta_unadjusted, (data, level)),
        "theta_CL": (hazard.solve_theta_adjusted, (data, pi, level)),
        "theta_SL": (hazard.solve_theta_stratified, (data, level)),
        "theta_CSL": (hazard.solve_theta_adjusted_stratified, (data, pi, level)),
    }
    out = {}
    for name in which:
        if name in ADJUSTED and data.p == 0:
            out[name] = _unavailable("no covariates were supplied")
            continue
        fn, args = runners[name]
        value, exc = _run(fn, *args)
        if exc is not None:
            out[name] = _error_cell(exc)
        elif name.startswith("T_"):
            out[name] = _test_cell(value)
        else:
            out[name] = _estimate_cell(value)
    return out


@dataclass
class AnalysisReport:
    summary: dict
    tests: dict
    estimates: dict
    options: dict
    subgroups: list = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version, "options": self.options,
                "summary": self.summary, "tests": self.tests, "estimates": self.estimates,
                "subgroups": self.subgroups}

    def to_json(self, indent: Optional[int] = 2) -> str:
        # floats go out through repr, the shortest string that reads back to
        # the same double; nonfinite values become null
        return json.dumps(_finite(self.to_dict()), indent=indent, allow_nan=False)

    def degenerate(self) -> bool:
        """True when no test at all could be computed."""
        return all("error" in self.tests[t] for t in TEST_NAMES)

    def format_table(self) -> str:
        s = self.summary
        lines = [f"n = {s['n']} (arm 1: {s['n_arm1']}, arm 0: {s['n_arm0']}), "
                 f"events = {s['events']}, strata = {len(s['strata'])}"]
        lines += _test_lines("All patients", self.tests, self.estimates, self.options["alpha"])
        for g in self.subgroups:
            lines += _test_lines(f"Sub-group stratum={g['stratum']} (n={g['summary']['n']})",
                                 g["tests"], g["estimates"], self.options["alpha"], adjusted=True)
        return "\n".join(lines)


def _finite(obj):
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _test_lines(title, tests, estimates, alpha, adjusted=False):
    head = f"{'test':<7}{'sqrt(n)U':>12}{'se':>10}{'stat':>10}{'p':>10}"
    if adjusted:
        head += f"{'p_bonf':>10}"
    head += f"  {'theta':>9}{'se':>9}"
    lines = ["", title, head]
    for t, e in zip(TEST_NAMES, ESTIMATOR_NAMES):
        if t not in tests:
            continue
        cell = tests[t]
        if "error" in cell:
            row = f"{t:<7}  {cell['error']}: {cell['message']}"
        else:
            row = (f"{t:<7}{cell['numerator']:>12.4f}{cell['se']:>10.4f}"
                   f"{cell['statistic']:>10.4f}{cell['p_value']:>10.4g}")
            if adjusted:
                row += f"{cell['p_adjusted']:>10.4g}"
            row += " *" if cell.get("p_adjusted", cell["p_value"]) < alpha else "  "
            est = estimates.get(e, {})
            if "theta" in est:
                row += f"{est['theta']:>9.4f}{est['se']:>9.4f}"
            elif "error" in est:
                row += f"  ({est['error']})"
        lines.append(row)
    return lines


def analyze(data: TrialData, pi: Optional[float] = None, subgroups: bool = False,
            alpha: float = 0.05, level: float = 0.95) -> AnalysisReport:
    """Run the four tests and estimators, optionally also within each stratum.

    ``pi`` is the target allocation probability; ``None`` uses the observed
    fraction in arm 1 (of the sub-group, for sub-group analyses). Sub-group
    analyses run only the unstratified tests, since within one stratum the
    stratified versions coincide with them, and report Bonferroni-adjusted
    p-values ``min(1, m p)`` for ``m`` sub-groups.
    """
    if not 0.0 < alpha <= 1.0:
        raise ConfigError("alpha must lie in (0, 1]")
    if pi is not None and not 0.0 < pi < 1.0:
        raise ConfigError("pi must lie in (0, 1)")
    cells = _cells(data, pi, level, TEST_NAMES + ESTIMATOR_NAMES)
    options = {"pi": pi, "alpha": alpha, "level": level, "subgroups": subgroups}
    report = AnalysisReport(summarize(data), {k: cells[k] for k in TEST_NAMES},
                            {k: cells[k] for k in ESTIMATOR_NAMES}, options)
    if subgroups:
        m = data.n_strata
        for label in data.strata:
            sub = data.stratum == label
            try:
                part = data.subset(sub)
            except CovLogRankError as exc:
                report.subgroups.append({"stratum": int(label), "summary": {"n": int(sub.sum())},
                                         "error": type(exc).__name__, "message": str(exc),
                                         "tests": {}, "estimates": {}})
                continue
            got = _cells(part, pi, level, ("T_L", "T_CL", "theta_L", "theta_CL"))
            tests = {k: got[k] for k in ("T_L", "T_CL")}
            for cell in tests.values():
                if "p_value" in cell:
                    cell["p_adjusted"] = min(1.0, m * cell["p_value"])
            report.subgroups.append({"stratum": int(label), "summary": summarize(part), "m": m,
                                     "tests": tests,
                                     "estimates": {k: got[k] for k in ("theta_L", "theta_CL")}})
    return report

