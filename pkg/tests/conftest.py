import os
import sys
from pathlib import Path

import numpy as np
import pytest

from covlogrank import SubjectRecord, TrialData

FIXTURES = Path(__file__).parent / "fixtures"
ACTG_ENV = "COVLOGRANK_ACTG175"


def random_trial(rng, n=None, n_strata=None, p=None, ties=False, censor=0.3):
    """A small random trial with both arms present in every stratum."""
    n = n or int(rng.integers(12, 51))
    n_strata = n_strata or int(rng.integers(1, 4))
    p = int(rng.integers(1, 4)) if p is None else p
    stratum = np.arange(n) % n_strata
    rng.shuffle(stratum)
    arm = np.zeros(n, dtype=int)
    for s in range(n_strata):
        idx = np.flatnonzero(stratum == s)
        arm[idx] = rng.permutation(np.arange(idx.size) % 2)
    time = rng.exponential(1.0, n)
    if ties:
        time = np.ceil(time * 4) / 4
    event = rng.random(n) > censor
    event[rng.integers(n)] = True
    X = rng.normal(size=(n, p))
    return TrialData(time, event, arm, stratum, X)


@pytest.fixture
def two_subjects():
    return TrialData.from_records([SubjectRecord(1.0, True, 1), SubjectRecord(2.0, False, 0)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def actg_path():
    candidates = [os.environ.get(ACTG_ENV), Path(__file__).parents[1] / "data" / "actg175.csv"]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    pytest.skip(f"ACTG 175 data not found; run scripts/convert_actg175.py or set {ACTG_ENV}")


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
