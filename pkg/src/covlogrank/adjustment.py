"""Regression adjustment of the log-rank numerator by baseline covariates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import TrialData
from .errors import NonpositiveVariance, RankDeficient
from .survival import DerivedOutcomes, TestResult, score_pass

RANK_RTOL = 1e-10
VAR_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class AdjustmentFit:
    beta1: np.ndarray
    beta0: np.ndarray
    sigmaX: np.ndarray
    xbar: np.ndarray  # (p,) overall mean, or (L, p) stratum means
    mode: str  # "unstratified" | "stratified"

    @property
    def coef_sum(self):
        return self.beta1 + self.beta0

    def quadratic(self) -> float:
        b = self.coef_sum
        return float(b @ self.sigmaX @ b)

    @classmethod
    def zero(cls, data: TrialData, stratified=False) -> "AdjustmentFit":
        p = data.p
        xbar = _stratum_means(data) if stratified else data.covariates.mean(axis=0)
        return cls(np.zeros(p), np.zeros(p), np.zeros((p, p)), xbar,
                   "stratified" if stratified else "unstratified")


def _solve_centered(xc, y, what, **where):
    """Least squares on an already-centred design, refusing rank deficiency."""
    p = xc.shape[1]
    if p == 0:
        return np.zeros(0)
    if xc.shape[0] < p:
        raise RankDeficient(f"{what}: {xc.shape[0]} rows for {p} covariates", **where)
    u, s, vt = np.linalg.svd(xc, full_matrices=False)
    if s[0] == 0.0 or s[-1] < RANK_RTOL * s[0]:
        raise RankDeficient(f"{what}: covariate matrix is rank deficient "
                            f"(singular values {s[-1]:.3g} / {s[0]:.3g})", **where)
    return vt.T @ ((u.T @ y) / s)


def _stratum_means(data):
    L, p = data.n_strata, data.p
    sums = np.zeros((L, p))
    np.add.at(sums, data.stratum_codes, data.covariates)
    return sums / np.bincount(data.stratum_codes, minlength=L)[:, None]


def fit_beta(data: TrialData, outcomes: DerivedOutcomes) -> AdjustmentFit:
    """Per-arm least-squares slope of the derived outcomes on X."""
    X = data.covariates
    O = outcomes.values
    betas = []
    for j in (1, 0):
        m = data.arm == j
        Xj = X[m]
        betas.append(_solve_centered(Xj - Xj.mean(axis=0), O[m], f"arm {j}", arm=j))
    sigmaX = np.atleast_2d(np.cov(X, rowvar=False, ddof=1)) if data.p else np.zeros((0, 0))
    return AdjustmentFit(betas[0], betas[1], sigmaX, X.mean(axis=0), "unstratified")


def fit_gamma(data: TrialData, outcomes: DerivedOutcomes) -> AdjustmentFit:
    """Pooled within-stratum slopes; X is centred at stratum-by-arm means."""
    X = data.covariates
    O = outcomes.values
    codes, L, p = data.stratum_codes, data.n_strata, data.p
    counts = np.zeros((L, 2), dtype=np.int64)
    np.add.at(counts, (codes, data.arm), 1)
    for z in np.flatnonzero(counts.min(axis=1) == 0):
        arm = int(np.argmin(counts[z]))
        raise RankDeficient(f"stratum {data.strata[z]} has no subjects in arm {arm}",
                            arm=arm, stratum=int(data.strata[z]))
    cell = codes * 2 + data.arm
    sums = np.zeros((2 * L, p))
    np.add.at(sums, cell, X)
    cell_means = sums / counts.reshape(-1)[:, None]
    Xc = X - cell_means[cell]
    gammas = []
    for j in (1, 0):
        m = data.arm == j
        gammas.append(_solve_centered(Xc[m], O[m], f"arm {j} (within strata)", arm=j))

    zmeans = _stratum_means(data)
    Xz = X - zmeans[codes]
    nz = counts.sum(axis=1)
    # sum_z (n_z/n) S_{X|z}, each S_{X|z} with divisor n_z - 1
    w = (nz / data.n) / (nz - 1)
    pooled = (Xz * w[codes][:, None]).T @ Xz
    return AdjustmentFit(gammas[0], gammas[1], pooled, zmeans, "stratified")


def augmentation(data: TrialData, fit: AdjustmentFit) -> float:
    """``(1/n) sum{I_i (X_i - c_i)'b1 - (1 - I_i)(X_i - c_i)'b0}``."""
    if data.p == 0:
        return 0.0
    centre = fit.xbar[data.stratum_codes] if fit.mode == "stratified" else fit.xbar
    Xc = data.covariates - centre
    terms = np.where(data.arm == 1, Xc @ fit.beta1, -(Xc @ fit.beta0))
    return float(np.sum(terms)) / data.n


def resolve_pi(data: TrialData, pi: Optional[float]) -> float:
    if pi is None:
        return float(np.mean(data.arm))
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie in (0, 1), got {pi}")
    return float(pi)


def adjusted_components(data: TrialData, pi=None, stratified=False, fit=None):
    """``(U, sigma2, fit)`` of the covariate-adjusted (stratified) numerator."""
    score, info, outcomes = score_pass(data, stratified=stratified)
    return adjust_pass(data, score, info, outcomes, pi, stratified, fit)


def adjust_pass(data, score, info, outcomes, pi=None, stratified=False, fit=None):
    """Adjust an already computed score pass (see ``survival.score_pass``)."""
    if fit is None:
        d = DerivedOutcomes(outcomes, stratified=stratified)
        fit = fit_gamma(data, d) if stratified else fit_beta(data, d)
    pi = resolve_pi(data, pi)
    U = score / data.n - augmentation(data, fit)
    var = info / data.n - pi * (1.0 - pi) * fit.quadratic()
    return U, var, fit


def _test(data, pi, stratified, fit, method):
    U, var, _ = adjusted_components(data, pi, stratified, fit)
    if var < VAR_FLOOR:
        raise NonpositiveVariance(f"{method}: adjusted variance {var:.3g} is not positive")
    return TestResult.from_components(U, var, data.n, method)


def adjusted_logrank(data: TrialData, pi=None, fit=None) -> TestResult:
    return _test(data, pi, False, fit, "adjusted_logrank")


def adjusted_stratified_logrank(data: TrialData, pi=None, fit=None) -> TestResult:
    return _test(data, pi, True, fit, "adjusted_stratified_logrank")


def with_stratum_dummies(data: TrialData) -> TrialData:
    """Append indicators of the non-reference stratum levels to X."""
    if data.n_strata == 1:
        return data
    dummies = data.stratum_dummies()
    names = data.covariate_names + tuple(f"stratum=={s}" for s in data.strata[1:])
    return data.with_covariates(np.hstack([data.covariates, dummies]), names)
