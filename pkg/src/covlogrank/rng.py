"""Reproducible random streams.

Every stream is a Philox4x64-10 generator keyed by ``(seed, replication,
purpose)`` through numpy's ``SeedSequence``, so a replication's draws do
not depend on which worker runs it or in what order.
"""

import numpy as np

PURPOSES = {
    "covariates": 0,
    "assignment": 1,
    "failure": 2,
    "censoring": 3,
}


def stream(seed: int, replication: int = 0, purpose: str = "assignment") -> np.random.Generator:
    key = PURPOSES[purpose] if isinstance(purpose, str) else int(purpose)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replication), key))
    return np.random.Generator(np.random.Philox(ss))
