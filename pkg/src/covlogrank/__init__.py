"""Covariate-adjusted log-rank tests for covariate-adaptive randomized trials.

Quick tour::

    from covlogrank import TrialData, logrank_test, adjusted_logrank
    data = TrialData(time, event, arm, stratum, covariates)
    logrank_test(data).p_value
    adjusted_logrank(data, pi=0.5).statistic
"""

from .adjustment import (
    AdjustmentFit,
    adjusted_components,
    adjusted_logrank,
    adjusted_stratified_logrank,
    fit_beta,
    fit_gamma,
    with_stratum_dummies,
)
from .data import SubjectRecord, TrialData
from .dataio import parse_trial_csv, write_trial_csv
from .errors import (
    BadArmValue,
    ConfigError,
    CovLogRankError,
    DataError,
    DegenerateError,
    EmptyArm,
    EmptyData,
    InvalidMarginVector,
    MissingColumn,
    NegativeTime,
    NoEvents,
    NonNumeric,
    NonpositiveVariance,
    NoRoot,
    RankDeficient,
    ZeroVariance,
)
from .hazard import (
    HazardEstimate,
    solve_theta_adjusted,
    solve_theta_adjusted_stratified,
    solve_theta_stratified,
    solve_theta_unadjusted,
)
from .kernels import BACKEND
from .randomization import AssignmentState, SchemeConfig, assign_all
from .report import AnalysisReport, analyze
from .simulation import MonteCarloReport, ScenarioConfig, run_power_curve, run_scenario, run_type1
from .survival import (
    DerivedOutcomes,
    RiskSetSeries,
    TestResult,
    build_risk_sets,
    derived_outcomes,
    logrank_components,
    logrank_test,
    stratified_derived_outcomes,
    stratified_logrank_components,
    stratified_logrank_test,
)

__version__ = "0.1.0"
