"""Counting-process summaries and the (stratified) log-rank test.

All sums are computed on integer risk-set counts; division by ``n`` happens
last. At-risk means ``time >= t`` and tied events share one risk set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .data import TrialData
from .errors import EmptyData, NoEvents, ZeroVariance


@dataclass(frozen=True, eq=False)
class RiskSetSeries:
    """Per-arm at-risk and event counts at each distinct event time."""

    times: np.ndarray
    atrisk1: np.ndarray
    atrisk0: np.ndarray
    events1: np.ndarray
    events0: np.ndarray

    def __len__(self):
        return self.times.shape[0]

    @property
    def atrisk(self):
        return self.atrisk1 + self.atrisk0

    @property
    def events(self):
        return self.events1 + self.events0


@dataclass(frozen=True, eq=False)
class DerivedOutcomes:
    """Per-subject derived outcome, evaluated for the arm each subject received."""

    values: np.ndarray
    stratified: bool = False
    theta: float = 0.0

    def signed_mean(self, arm) -> float:
        """``(1/n) sum{I_i O_i1 - (1 - I_i) O_i0}``."""
        return float(np.sum(np.where(np.asarray(arm) == 1, self.values, -self.values))) / self.values.shape[0]


@dataclass(frozen=True)
class TestResult:
    numerator: float  # sqrt(n) * U
    se: float
    statistic: float
    p_value: float
    method: str
    n: int

    __test__ = False  # not a pytest class

    @classmethod
    def from_components(cls, U: float, var: float, n: int, method: str) -> "TestResult":
        if not var > 0.0:
            raise ZeroVariance(f"{method}: variance estimate is {var!r}")
        se = math.sqrt(var)
        num = math.sqrt(n) * U
        stat = num / se
        return cls(num, se, stat, two_sided_p(stat), method, n)


def two_sided_p(statistic: float) -> float:
    return math.erfc(abs(statistic) / math.sqrt(2.0))


def build_risk_sets(data: TrialData, stratum_filter: Optional[int] = None) -> RiskSetSeries:
    if stratum_filter is None:
        mask = slice(None)
    else:
        mask = data.stratum == stratum_filter
        if not np.any(mask):
            raise EmptyData(f"no subjects in stratum {stratum_filter}")
    t = data.time[mask]
    ev = data.event[mask]
    a = data.arm[mask]
    times = np.unique(t[ev])
    t1 = np.sort(t[a == 1])
    t0 = np.sort(t[a == 0])
    k = np.searchsorted(times, t[ev])
    m = times.shape[0]
    return RiskSetSeries(
        times=times,
        atrisk1=t1.shape[0] - np.searchsorted(t1, times, side="left"),
        atrisk0=t0.shape[0] - np.searchsorted(t0, times, side="left"),
        events1=np.bincount(k[a[ev] == 1], minlength=m),
        events0=np.bincount(k[a[ev] == 0], minlength=m),
    )


def score_pass(data: TrialData, theta: float = 0.0, stratified: bool = False):
    """Return ``(score_sum, info_sum, outcomes)``; sums are not yet divided by n."""
    if not np.any(data.event):
        raise NoEvents("no observed events")
    if stratified:
        codes, n_strata = data.stratum_codes, data.n_strata
    else:
        codes, n_strata = np.zeros(data.n, dtype=np.int64), 1
    return kernels.score_pass(data.time, data.event, data.arm, codes, n_strata, theta)


def logrank_components(data: TrialData):
    """``(U_L, sigma2_L)`` of the unstratified log-rank statistic."""
    score, info, _ = score_pass(data)
    return score / data.n, info / data.n


def stratified_logrank_components(data: TrialData):
    score, info, _ = score_pass(data, stratified=True)
    return score / data.n, info / data.n


def derived_outcomes(data: TrialData) -> DerivedOutcomes:
    return DerivedOutcomes(score_pass(data)[2])


def stratified_derived_outcomes(data: TrialData) -> DerivedOutcomes:
    return DerivedOutcomes(score_pass(data, stratified=True)[2], stratified=True)


def logrank_test(data: TrialData) -> TestResult:
    U, var = logrank_components(data)
    return TestResult.from_components(U, var, data.n, "logrank")


def stratified_logrank_test(data: TrialData) -> TestResult:
    U, var = stratified_logrank_components(data)
    return TestResult.from_components(U, var, data.n, "stratified_logrank")
