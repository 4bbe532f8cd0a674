"""Acceptance criteria.

Each test checks one criterion, prints one ``[PASS]``/``[FAIL]`` line (plus
detail lines) and fails on ``[FAIL]``. The lines are repeated in the pytest
terminal summary. ``[FLAG]`` lines report convention-sensitive comparisons
that are never hard failures; ``[SKIP]`` marks criteria whose inputs are
unavailable.
"""

import math
import time

import numpy as np
import pytest

import oracles
from conftest import random_trial
from covlogrank import (
    DegenerateError,
    SchemeConfig,
    ScenarioConfig,
    TrialData,
    adjusted_logrank,
    adjusted_stratified_logrank,
    analyze,
    assign_all,
    derived_outcomes,
    logrank_components,
    logrank_test,
    parse_trial_csv,
    run_power_curve,
    run_type1,
    stratified_derived_outcomes,
    stratified_logrank_components,
    stratified_logrank_test,
)
from covlogrank.hazard import score_derivative, score_unadjusted
from covlogrank.rng import stream
from covlogrank.simulation import default_workers

RESULTS = []
WORKERS = default_workers()


def _detail(text):
    print(f"    {text}")
    RESULTS.append(f"    {text}")


def _verdict(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    print(line)
    RESULTS.append(line)
    assert ok, line


def _pct(x):
    return f"{100 * x:.2f}%"


def _report_rates(rep):
    rates = "  ".join(f"{t}={_pct(rep.rate(t))}" for t in ("T_L", "T_CL", "T_SL", "T_CSL"))
    _detail(f"Case {rep.config.label:<4} {rep.config.scheme.kind:<15} reps={rep.config.replications}"
            f"  {rates}  (MC-SE {100 * rep.se('T_CL'):.2f}pp)")


# identity suite ------------------------------------------------------------

def test_identity_suite():
    rng = np.random.default_rng(20240501)
    t0 = time.perf_counter()
    worst = dict(identity=0.0, oracle=0.0, reduction=0.0, fd=0.0)
    collapse_ok = True
    variance_ok = True
    fits = 0
    for k in range(200):
        d = random_trial(rng, n=int(rng.integers(10, 51)), n_strata=int(rng.integers(1, 4)),
                         p=int(rng.integers(1, 4)), ties=bool(k % 2))
        U, var = logrank_components(d)
        Us, vars_ = stratified_logrank_components(d)
        # (a) derived-outcome identity, unstratified and stratified
        worst["identity"] = max(worst["identity"], abs(U - derived_outcomes(d).signed_mean(d.arm)),
                                abs(Us - stratified_derived_outcomes(d).signed_mean(d.arm)))
        # (b) classical log-rank oracle (hypergeometric variance when untied)
        oe, v = (oracles.binomial_logrank if k % 2 else oracles.hypergeometric_logrank)(
            d.time, d.event, d.arm)
        oes, vs = oracles.binomial_logrank(d.time, d.event, d.arm, d.stratum)
        worst["oracle"] = max(worst["oracle"], abs(U * d.n - oe), abs(var * d.n - v),
                              abs(Us * d.n - oes), abs(vars_ * d.n - vs))
        # (c) single-stratum collapse
        one = TrialData(d.time, d.event, d.arm, None, d.covariates)
        collapse_ok &= stratified_logrank_components(one) == logrank_components(one)
        collapse_ok &= np.array_equal(stratified_derived_outcomes(one).values,
                                      derived_outcomes(one).values)
        # (d) adjusted variances never exceed unadjusted ones
        try:
            variance_ok &= adjusted_logrank(d).se <= logrank_test(d).se
            variance_ok &= adjusted_stratified_logrank(d).se <= stratified_logrank_test(d).se
            fits += 1
        except DegenerateError:
            pass
        # (e) score and information at theta = 0
        worst["reduction"] = max(worst["reduction"], abs(score_unadjusted(d, 0.0) - U),
                                 abs(score_derivative(d, 0.0) - var))
        # (f) information vs central differences of the score
        theta, h = float(rng.uniform(-1, 1)), 1e-5
        fd = (score_unadjusted(d, theta + h) - score_unadjusted(d, theta - h)) / (2 * h)
        g = score_derivative(d, theta)
        worst["fd"] = max(worst["fd"], abs(g + fd) / g)
    elapsed = time.perf_counter() - t0

    checks = [
        ("(a) identity", worst["identity"] < 1e-12, f"max |diff| {worst['identity']:.1e} < 1e-12"),
        ("(b) classical oracle", worst["oracle"] < 1e-10, f"max |diff| {worst['oracle']:.1e} < 1e-10"),
        ("(c) single-stratum collapse", collapse_ok, "exact"),
        ("(d) sigma_CL <= sigma_L, sigma_CSL <= sigma_SL", variance_ok, f"{fits} successful fits"),
        ("(e) U(0) = U_L, g(0) = sigma2_L", worst["reduction"] < 1e-14,
         f"max |diff| {worst['reduction']:.1e} < 1e-14"),
        ("(f) g vs central differences", worst["fd"] < 1e-5, f"max rel err {worst['fd']:.1e} < 1e-5"),
        ("runtime", elapsed < 10.0, f"{elapsed:.2f}s < 10s"),
    ]
    for label, ok, info in checks:
        _detail(f"{'ok  ' if ok else 'BAD '}{label}: {info}")
    _verdict("Identity suite (200 datasets)", all(ok for _, ok, _ in checks), f"{elapsed:.2f}s")


# hand fixture ---------------------------------------------------------------

def test_hand_fixture(two_subjects):
    res = logrank_test(two_subjects)
    outcomes = derived_outcomes(two_subjects).values.tolist()
    ok = abs(res.statistic - 1.0) < 1e-15 and outcomes == [0.25, -0.25]
    _verdict("Hand-computed 2-subject fixture", ok, f"T_L={res.statistic!r}, O={outcomes}")


# Table 1 --------------------------------------------------------------------

def _table1(reps, tol, check_conservative):
    ok = True
    for case in ("I", "III"):
        for scheme in ("simple", "permuted_block"):
            rep = run_type1(ScenarioConfig(case=case, scheme=SchemeConfig(scheme), replications=reps),
                            WORKERS)
            _report_rates(rep)
            for t in ("T_CL", "T_CSL"):
                if abs(rep.rate(t) - 0.05) > tol:
                    ok = False
                    _detail(f"BAD  Case {case} {scheme} {t} = {_pct(rep.rate(t))} outside 5% +/- {100 * tol:.1f}pp")
            if check_conservative and scheme == "permuted_block" and not rep.rate("T_L") < 0.042:
                ok = False
                _detail(f"BAD  Case {case} permuted block T_L = {_pct(rep.rate('T_L'))} not below 4.2%")
    return ok


@pytest.mark.slow
def test_table1_reproduction():
    _verdict("Table 1 (10,000 reps): T_CL/T_CSL within 5% +/- 0.7pp, T_L(permuted block) < 4.2%",
             _table1(10_000, 0.007, True))


def test_table1_smoke():
    _verdict("Table 1 smoke (2,000 reps): T_CL/T_CSL within 5% +/- 1.5pp", _table1(2_000, 0.015, False))


TABLE1_MINIMIZATION = {"I": (0.0340, 0.0543, 0.0502, 0.0523), "III": (0.0288, 0.0543, 0.0523, 0.0552)}


@pytest.mark.slow
def test_table1_minimization_rows_reported():
    flagged = 0
    for case, published in TABLE1_MINIMIZATION.items():
        rep = run_type1(ScenarioConfig(case=case, scheme=SchemeConfig("minimization"),
                                       replications=10_000), WORKERS)
        _report_rates(rep)
        for t, ref in zip(("T_L", "T_CL", "T_SL", "T_CSL"), published):
            tag = "[FLAG]" if abs(rep.rate(t) - ref) > 3 * rep.se(t) else "ok    "
            flagged += tag == "[FLAG]"
            _detail(f"{tag} Case {case} minimization {t}: {_pct(rep.rate(t))} vs published {_pct(ref)}")
    line = f"[INFO] Table 1 minimization rows reported; {flagged} cell(s) flagged (> 3 MC-SE from published)"
    print(line)
    RESULTS.append(line)


# power ordering -------------------------------------------------------------

def test_power_ordering():
    ok = True
    cfg = ScenarioConfig(case="I", scheme=SchemeConfig("permuted_block"), replications=2_000)
    for rep in run_power_curve(cfg, [0.2, 0.4], WORKERS):
        pl, pcl, psl, pcsl = (rep.rate(t) for t in ("T_L", "T_CL", "T_SL", "T_CSL"))
        slack = 2 * math.hypot(rep.se("T_SL"), rep.se("T_CSL"))
        good = pcl >= pl + 0.02 and pcsl >= psl - slack
        ok &= good
        _detail(f"{'ok  ' if good else 'BAD '}theta={rep.config.theta}: T_L={_pct(pl)} T_CL={_pct(pcl)} "
                f"T_SL={_pct(psl)} T_CSL={_pct(pcsl)}")
    _verdict("Power ordering (Case I, permuted block, 2,000 reps)", ok,
             "power(T_CL) >= power(T_L) + 2pp, power(T_CSL) >= power(T_SL) - 2 MC-SE")


# Table 2 --------------------------------------------------------------------

TABLE2_ALL = {
    "T_L": (-1.223, 0.265), "T_CL": (-1.273, 0.257), "T_SL": (-1.228, 0.264), "T_CSL": (-1.284, 0.258),
    "theta_L": (-0.528, 0.116), "theta_CL": (-0.550, 0.113), "theta_SL": (-0.531, 0.116),
    "theta_CSL": (-0.556, 0.113),
}
TABLE2_SUBGROUPS = {
    1: {"n": 461, "T_L": (-0.542, 0.235), "T_CL": (-0.553, 0.230),
        "theta_L": (-0.455, 0.199), "theta_CL": (-0.464, 0.195)},
    3: {"n": 434, "T_L": (-1.292, 0.290), "T_CL": (-1.382, 0.282),
        "theta_L": (-0.740, 0.171), "theta_CL": (-0.793, 0.166)},
}


def _compare(cells, expected, where):
    ok = True
    for name, (a, b) in expected.items():
        if name == "n":
            continue
        cell = cells[name]
        got = (cell["numerator"], cell["se"]) if name.startswith("T_") else (cell["theta"], cell["se"])
        good = abs(got[0] - a) <= 0.005 and abs(got[1] - b) <= 0.005
        ok &= good
        _detail(f"{'ok  ' if good else 'BAD '}{where} {name}: ({got[0]:.4f}, {got[1]:.4f}) vs ({a}, {b})")
    return ok


def test_table2_reproduction(request):
    try:
        path = request.getfixturevalue("actg_path")
    except pytest.skip.Exception:
        line = "[SKIP] Table 2 reproduction: ACTG 175 data not available"
        print(line)
        RESULTS.append(line)
        raise
    data = parse_trial_csv(path, covariates=["cd40", "preanti"])
    rep = analyze(data, pi=0.5, subgroups=True)
    ok = data.n == 1093
    _detail(f"{'ok  ' if ok else 'BAD '}n = {data.n} (1,093 expected)")
    ok &= _compare({**rep.tests, **rep.estimates}, TABLE2_ALL, "all")
    for g in rep.subgroups:
        if g["stratum"] in TABLE2_SUBGROUPS:
            exp = TABLE2_SUBGROUPS[g["stratum"]]
            ok &= g["summary"]["n"] == exp["n"]
            ok &= _compare({**g["tests"], **g["estimates"]}, exp, f"Z={g['stratum']}")
    _verdict("Table 2 reproduction (ACTG 175) within +/- 0.005", ok)


# randomization laws ---------------------------------------------------------

def test_randomization_laws():
    ok = True
    n = 100_000
    z = stream(11, 0, "covariates").integers(0, 3, n)
    for strata in (np.zeros(n, dtype=int), z):
        arms = assign_all(SchemeConfig("permuted_block"), strata, seed=11)
        for s in np.unique(strata):
            diff = np.cumsum(2 * arms[strata == s] - 1)
            ok &= bool(np.abs(diff).max() <= 2 and np.all(diff[3::4] == 0))
    _detail(f"{'ok  ' if ok else 'BAD '}permuted block: |n1 - n0| <= 2 on every prefix, 0 at block ends (10^5)")

    cfg = SchemeConfig("minimization", margins=(2, 3))
    worst = 0.0
    for seed in range(200):
        r = stream(seed, 0, "covariates")
        zz = np.column_stack([r.integers(0, 2, 500), r.integers(0, 3, 500)])
        arms = assign_all(cfg, zz, seed=seed)
        for k, m in enumerate(cfg.margins):
            for level in range(m):
                worst = max(worst, abs(arms[zz[:, k] == level].mean() - 0.5))
    good = worst < 0.05
    ok &= good
    _detail(f"{'ok  ' if good else 'BAD '}minimization: worst margin-level |fraction - 0.5| = {worst:.4f} < 0.05")

    frac = assign_all(SchemeConfig("simple"), None, seed=11, n=n).mean()
    bound = 3 * math.sqrt(0.25 / n)
    good = abs(frac - 0.5) <= bound
    ok &= good
    _detail(f"{'ok  ' if good else 'BAD '}simple: fraction {frac:.5f}, |diff| <= 3 sigma = {bound:.5f}")
    _verdict("Randomization law checks", ok)


# CR violation ---------------------------------------------------------------

@pytest.mark.slow
def test_cr_violation_trend():
    reps = {}
    for psi in (0.0, 1.0):
        reps[psi] = run_type1(ScenarioConfig(case="CR", psi=psi, replications=5_000), WORKERS)
        _report_rates(reps[psi])
    rise = reps[1.0].rate("T_L") - reps[0.0].rate("T_L")
    csl = reps[1.0].rate("T_CSL")
    _verdict("CR-violation trend (Case III-CR, simple, 5,000 reps)", rise >= 0.03 and csl < 0.08,
             f"T_L rise {100 * rise:.2f}pp >= 3pp, T_CSL(psi=1) {_pct(csl)} < 8%")
