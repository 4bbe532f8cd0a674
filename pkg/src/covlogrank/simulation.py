"""Monte Carlo type-I-error and power experiments.

Scenarios (theta is the treatment effect, W ~ N(0, I_3)):

* Case I: hazard ``log(2) exp(-theta*j + eta'W)``, censoring U(10, 40).
* Case II: Case I failures; censoring ``(3 - 3j) + Exp(1)``.
* Case III: ``T = exp(-theta*j + eta'W) + Exp(1)``, censoring U(10, 40).
* Case IV: Case III failures, Case II censoring.
* CR: Case III failures; censoring hazard ``log(1.1) exp(psi*j + eta_C'W)``,
  so ``psi > 0`` censors arm 1 faster and breaks non-informative censoring.

Z is (W1 cut at ``z_cuts[0]``, W2 cut at ``z_cuts[1]``); its joint levels are
the strata. T_CL adjusts for the stratum indicators and W3, T_CSL for W3.
"""

from __future__ import annotations

import csv
import math
import os
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from statistics import NormalDist

import numpy as np

from .adjustment import VAR_FLOOR, adjust_pass
from .data import TrialData
from .errors import ConfigError, DegenerateError
from .randomization import SchemeConfig, assign_all
from .rng import stream
from .survival import score_pass

TESTS = ("T_L", "T_CL", "T_SL", "T_CSL")
CASES = ("I", "II", "III", "IV", "CR")
TERCILE = 0.4307
CSV_HEADER = ("case", "scheme", "test", "theta", "reps", "rejections", "rate", "mc_se", "degenerate")


@dataclass(frozen=True)
class ScenarioConfig:
    case: str = "I"
    theta: float = 0.0
    n: int = 500
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    replications: int = 10_000
    seed: int = 20240501
    alpha: float = 0.05
    z_cuts: tuple = ((0.0,), (-TERCILE, TERCILE))
    psi: float = 0.0
    eta: tuple = (0.5, 0.5, 0.5)
    eta_c: tuple = (0.2, 0.2, 0.2)

    def __post_init__(self):
        case = str(self.case).upper()
        object.__setattr__(self, "case", case)
        object.__setattr__(self, "z_cuts", tuple(tuple(float(c) for c in cuts) for cuts in self.z_cuts))
        object.__setattr__(self, "eta", tuple(float(v) for v in self.eta))
        object.__setattr__(self, "eta_c", tuple(float(v) for v in self.eta_c))
        if case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1]")
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if len(self.z_cuts) != 2:
            raise ConfigError("z_cuts needs cut points for W1 and W2")
        if len(self.eta) != 3 or len(self.eta_c) != 3:
            raise ConfigError("eta and eta_c need three coefficients")
        if self.scheme.kind == "minimization" and self.scheme.margins != self.margins:
            object.__setattr__(self, "scheme", replace(self.scheme, margins=self.margins))

    @property
    def margins(self) -> tuple:
        return tuple(len(c) + 1 for c in self.z_cuts)

    @property
    def label(self) -> str:
        return f"CR(psi={self.psi:g})" if self.case == "CR" else self.case

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = asdict(self.scheme)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        scheme = d.pop("scheme", {})
        if isinstance(scheme, str):
            scheme = {"kind": scheme}
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(scheme=SchemeConfig(**scheme), **d)


def simulate_arrays(config: ScenarioConfig, replication: int = 0) -> dict:
    """Draw one trial; returns the raw arrays (W, Z, stratum, arm, T, C, time, event)."""
    n, seed = config.n, config.seed
    W = stream(seed, replication, "covariates").standard_normal((n, 3))
    Z = np.column_stack([np.digitize(W[:, k], config.z_cuts[k]) for k in range(2)])
    stratum = Z[:, 0] * config.margins[1] + Z[:, 1]

    block_z = stratum if config.scheme.kind == "permuted_block" else Z
    arm = assign_all(config.scheme, block_z, seed=seed, replication=replication, n=n)

    lin = W @ np.asarray(config.eta)
    fail = stream(seed, replication, "failure").standard_exponential(n)
    if config.case in ("I", "II"):
        T = fail / (math.log(2.0) * np.exp(-config.theta * arm + lin))
    else:
        T = np.exp(-config.theta * arm + lin) + fail

    cens = stream(seed, replication, "censoring")
    if config.case in ("I", "III"):
        C = cens.uniform(10.0, 40.0, n)
    elif config.case in ("II", "IV"):
        C = (3.0 - 3.0 * arm) + cens.standard_exponential(n)
    else:
        rate = math.log(1.1) * np.exp(config.psi * arm + W @ np.asarray(config.eta_c))
        C = cens.standard_exponential(n) / rate

    return {"W": W, "Z": Z, "stratum": stratum, "arm": arm, "T": T, "C": C,
            "time": np.minimum(T, C), "event": T <= C}


def generate_trial(config: ScenarioConfig, replication: int = 0) -> TrialData:
    """One simulated trial with X = W3 (add stratum dummies for T_CL)."""
    a = simulate_arrays(config, replication)
    return TrialData(a["time"], a["event"], a["arm"], a["stratum"], a["W"][:, 2:3], ("w3",))


def replicate_statistics(config: ScenarioConfig, replication: int) -> np.ndarray:
    """The four statistics of one replication; NaN where a test is degenerate."""
    a = simulate_arrays(config, replication)
    data = TrialData(a["time"], a["event"], a["arm"], a["stratum"], a["W"][:, 2:3], ("w3",))
    pi = config.scheme.pi
    out = np.full(4, np.nan)
    for col, stratified in ((0, False), (2, True)):
        try:
            score, info, outcomes = score_pass(data, stratified=stratified)
        except DegenerateError:
            continue
        if info > 0.0:
            out[col] = score / math.sqrt(info)
        x = data
        if not stratified and data.n_strata > 1:
            x = data.with_covariates(np.hstack([data.stratum_dummies(), data.covariates]))
        try:
            U, var, _ = adjust_pass(x, score, info, outcomes, pi, stratified)
        except DegenerateError:
            continue
        if var >= VAR_FLOOR:
            out[col + 1] = math.sqrt(data.n) * U / math.sqrt(var)
    return out


def _count_chunk(args):
    config, start, stop = args
    crit = NormalDist().inv_cdf(1.0 - config.alpha / 2.0)
    rejections = np.zeros(4, dtype=np.int64)
    valid = np.zeros(4, dtype=np.int64)
    for r in range(start, stop):
        stats = replicate_statistics(config, r)
        ok = ~np.isnan(stats)
        valid += ok
        rejections += ok & (np.abs(np.where(ok, stats, 0.0)) > crit)
    return rejections, valid


@dataclass
class MonteCarloReport:
    config: ScenarioConfig
    rejections: np.ndarray
    valid: np.ndarray
    runtime: float

    @property
    def degenerate(self) -> np.ndarray:
        return self.config.replications - self.valid

    @property
    def rates(self) -> np.ndarray:
        return self.rejections / np.maximum(self.valid, 1)

    @property
    def mc_se(self) -> np.ndarray:
        r = self.rates
        return np.sqrt(r * (1.0 - r) / np.maximum(self.valid, 1))

    def rate(self, test: str) -> float:
        return float(self.rates[TESTS.index(test)])

    def se(self, test: str) -> float:
        return float(self.mc_se[TESTS.index(test)])

    def rows(self) -> list:
        c = self.config
        return [
            {"case": c.label, "scheme": c.scheme.kind, "test": t, "theta": c.theta,
             "reps": c.replications, "rejections": int(self.rejections[k]),
             "rate": float(self.rates[k]), "mc_se": float(self.mc_se[k]),
             "degenerate": int(self.degenerate[k])}
            for k, t in enumerate(TESTS)
        ]


def run_scenario(config: ScenarioConfig, workers: int = 1) -> MonteCarloReport:
    """Run all replications; the result does not depend on ``workers``."""
    t0 = _time.perf_counter()
    reps = config.replications
    workers = max(1, min(int(workers), reps))
    if workers == 1:
        rejections, valid = _count_chunk((config, 0, reps))
    else:
        bounds = np.linspace(0, reps, 4 * workers + 1).astype(int)
        chunks = [(config, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        rejections = np.zeros(4, dtype=np.int64)
        valid = np.zeros(4, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rj, vd in pool.map(_count_chunk, chunks):
                rejections += rj
                valid += vd
    return MonteCarloReport(config, rejections, valid, _time.perf_counter() - t0)


def run_type1(config: ScenarioConfig, workers: int = 1) -> MonteCarloReport:
    if config.theta != 0.0:
        raise ConfigError("type I error runs need theta = 0")
    return run_scenario(config, workers)


def run_power_curve(config: ScenarioConfig, theta_grid, workers: int = 1) -> list:
    """One report per theta; each theta reuses the scenario seed."""
    grid = list(theta_grid)
    if not grid:
        raise ConfigError("theta grid is empty")
    return [run_scenario(replace(config, theta=float(th)), workers) for th in grid]


def write_csv(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        w.writeheader()
        for rep in reports:
            for row in rep.rows():
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def default_workers() -> int:
    return os.cpu_count() or 1
