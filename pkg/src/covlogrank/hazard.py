"""Log hazard ratio estimation from (covariate-adjusted) partial-likelihood scores."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

from .adjustment import VAR_FLOOR, augmentation, fit_beta, fit_gamma, resolve_pi
from .data import TrialData
from .errors import NonpositiveVariance, NoRoot
from .survival import DerivedOutcomes, score_pass

SCORE_TOL = 1e-10
MAX_ITER = 200
BRACKET_START = 2.0
BRACKET_CAP = 50.0


@dataclass(frozen=True)
class HazardEstimate:
    theta: float
    se: float
    ci: tuple
    iterations: int
    score_residual: float
    method: str = ""
    level: float = 0.95


class ScoreProfile:
    """Score ``U(theta) - offset`` and information ``g(theta)`` for one dataset.

    ``offset`` is the (frozen) augmentation term of the adjusted score; the
    information does not depend on it.
    """

    def __init__(self, data: TrialData, stratified: bool = False, offset: float = 0.0):
        self.data = data
        self.stratified = stratified
        self.offset = offset

    def evaluate(self, theta: float):
        score, info, _ = score_pass(self.data, theta, self.stratified)
        n = self.data.n
        return score / n - self.offset, info / n

    def score(self, theta: float) -> float:
        return self.evaluate(theta)[0]

    def info(self, theta: float) -> float:
        return self.evaluate(theta)[1]

    def outcomes(self, theta: float) -> DerivedOutcomes:
        return DerivedOutcomes(score_pass(self.data, theta, self.stratified)[2],
                               stratified=self.stratified, theta=theta)


def score_unadjusted(data: TrialData, theta: float, stratified: bool = False) -> float:
    return ScoreProfile(data, stratified).score(theta)


def score_derivative(data: TrialData, theta: float, stratified: bool = False) -> float:
    """``g(theta)``, the negative derivative of the score."""
    return ScoreProfile(data, stratified).info(theta)


def derived_outcomes_at(data: TrialData, theta: float, stratified: bool = False) -> DerivedOutcomes:
    return ScoreProfile(data, stratified).outcomes(theta)


def find_root(fg, tol=SCORE_TOL, max_iter=MAX_ITER):
    """Root of a nonincreasing function by bracketed Newton with bisection fallback.

    ``fg(x)`` returns ``(f(x), -f'(x))``. Returns ``(root, f(root), -f'(root), iterations)``.
    """
    lo, hi = -BRACKET_START, BRACKET_START
    flo, _ = fg(lo)
    fhi, _ = fg(hi)
    while flo < 0.0 and lo > -BRACKET_CAP:
        hi, fhi = lo, flo
        lo = max(2.0 * lo, -BRACKET_CAP)
        flo, _ = fg(lo)
    while fhi > 0.0 and hi < BRACKET_CAP:
        lo, flo = hi, fhi
        hi = min(2.0 * hi, BRACKET_CAP)
        fhi, _ = fg(hi)
    if flo < 0.0 or fhi > 0.0 or (flo == 0.0 and fhi == 0.0):
        raise NoRoot(f"score does not change sign on [{lo:g}, {hi:g}]")
    # a score that only underflows to zero at the cap has no finite root
    # (monotone likelihood, e.g. every event in one arm)
    if (hi >= BRACKET_CAP and fhi >= 0.0) or (lo <= -BRACKET_CAP and flo <= 0.0):
        raise NoRoot(f"score does not cross zero inside [-{BRACKET_CAP:g}, {BRACKET_CAP:g}]")

    x = min(max(0.0, lo), hi)
    for it in range(1, max_iter + 1):
        fx, gx = fg(x)
        if abs(fx) < tol:
            if not gx > 0.0:
                raise NoRoot("score is flat at the root (no information)")
            return x, fx, gx, it
        if fx > 0.0:
            lo = x
        else:
            hi = x
        step = x + fx / gx if gx > 0.0 else math.nan
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(1.0, abs(x)):
            break
    raise NoRoot(f"root finder did not reach |score| < {tol:g} in {max_iter} iterations")


def _estimate(theta, var_over_n, it, resid, method, level):
    se = math.sqrt(var_over_n)
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    return HazardEstimate(theta, se, (theta - z * se, theta + z * se), it, resid, method, level)


def solve_theta_unadjusted(data: TrialData, level: float = 0.95,
                           stratified: bool = False) -> HazardEstimate:
    prof = ScoreProfile(data, stratified)
    theta, resid, g, it = find_root(prof.evaluate)
    method = "stratified_logrank" if stratified else "logrank"
    return _estimate(theta, 1.0 / (data.n * g), it, resid, method, level)


def solve_theta_adjusted(data: TrialData, pi=None, level: float = 0.95,
                         stratified: bool = False) -> HazardEstimate:
    """Adjusted estimator; coefficients are frozen at the unadjusted root."""
    base = ScoreProfile(data, stratified)
    theta0, _, _, _ = find_root(base.evaluate)
    outcomes = base.outcomes(theta0)
    fit = fit_gamma(data, outcomes) if stratified else fit_beta(data, outcomes)
    prof = ScoreProfile(data, stratified, offset=augmentation(data, fit))
    theta, resid, g, it = find_root(prof.evaluate)
    pi = resolve_pi(data, pi)
    var = g - pi * (1.0 - pi) * fit.quadratic()
    method = "adjusted_stratified_logrank" if stratified else "adjusted_logrank"
    if var < VAR_FLOOR:
        raise NonpositiveVariance(f"{method}: variance {var:.3g} at theta={theta:.4g}")
    return _estimate(theta, var / (data.n * g * g), it, resid, method, level)


def solve_theta_stratified(data: TrialData, level: float = 0.95) -> HazardEstimate:
    return solve_theta_unadjusted(data, level, stratified=True)


def solve_theta_adjusted_stratified(data: TrialData, pi=None, level: float = 0.95) -> HazardEstimate:
    return solve_theta_adjusted(data, pi, level, stratified=True)
