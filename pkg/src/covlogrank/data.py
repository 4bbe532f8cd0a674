"""Trial data containers.

``TrialData`` stores the sample column-wise as read-only numpy arrays.
``SubjectRecord`` is the row view, convenient for hand-built fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError, EmptyArm, EmptyData


@dataclass(frozen=True)
class SubjectRecord:
    time: float
    event: bool
    arm: int
    stratum: int = 0
    covariates: tuple = ()


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TrialData:
    """Right-censored two-arm trial sample.

    Parameters
    ----------
    time : array of float
        Follow-up ``min(T, C)``, nonnegative.
    event : array of bool
        True when the failure was observed.
    arm : array of {0, 1}
        Treatment indicator.
    stratum : array of int, optional
        Nonnegative stratum labels (levels of the randomization covariate).
        Defaults to a single stratum ``0``.
    covariates : (n, p) array, optional
        Baseline covariates used for adjustment.
    covariate_names : sequence of str, optional
    """

    time: np.ndarray
    event: np.ndarray
    arm: np.ndarray
    stratum: Optional[np.ndarray] = None
    covariates: Optional[np.ndarray] = None
    covariate_names: tuple = ()
    # derived in __post_init__
    strata: np.ndarray = field(init=False)
    stratum_codes: np.ndarray = field(init=False)

    def __post_init__(self):
        time = np.array(self.time, dtype=np.float64).ravel()
        n = time.shape[0]
        if n == 0:
            raise EmptyData("no subjects")
        event = np.array(self.event).ravel()
        arm = np.array(self.arm).ravel()
        stratum = (np.zeros(n, dtype=np.int64) if self.stratum is None
                   else np.array(self.stratum).ravel())
        if self.covariates is None:
            cov = np.empty((n, 0))
        else:
            cov = np.array(self.covariates, dtype=np.float64)
            if cov.ndim == 1:
                cov = cov[:, None]
        for name, a in (("event", event), ("arm", arm), ("stratum", stratum)):
            if a.shape[0] != n:
                raise DataError(f"{name} has length {a.shape[0]}, expected {n}")
        if cov.shape[0] != n:
            raise DataError(f"covariates have {cov.shape[0]} rows, expected {n}")
        if not np.all(np.isfinite(time)) or np.any(time < 0):
            raise DataError("follow-up times must be finite and nonnegative")
        if not np.all((arm == 0) | (arm == 1)):
            raise DataError("arm values must be 0 or 1")
        if not np.all((event == 0) | (event == 1)):
            raise DataError("event values must be 0/1 or boolean")
        if not np.all(np.isfinite(cov)):
            raise DataError("covariates must be finite")
        stratum_f = np.asarray(stratum, dtype=np.float64)
        if np.any(stratum_f < 0) or np.any(stratum_f != np.round(stratum_f)):
            raise DataError("stratum labels must be nonnegative integers")
        if n < 2:
            raise EmptyData("need at least two subjects")
        arm = arm.astype(np.int64)
        if arm.min() == arm.max():
            raise EmptyArm(f"all subjects are in arm {int(arm[0])}")

        stratum = stratum_f.astype(np.int64)
        strata, codes = np.unique(stratum, return_inverse=True)
        names = tuple(self.covariate_names) or tuple(f"x{k + 1}" for k in range(cov.shape[1]))
        if len(names) != cov.shape[1]:
            raise DataError("covariate_names does not match covariate columns")

        put = object.__setattr__
        put(self, "time", _readonly(time))
        put(self, "event", _readonly(event.astype(bool)))
        put(self, "arm", _readonly(arm))
        put(self, "stratum", _readonly(stratum))
        put(self, "covariates", _readonly(cov))
        put(self, "covariate_names", names)
        put(self, "strata", _readonly(strata))
        put(self, "stratum_codes", _readonly(codes.astype(np.int64)))

    @property
    def n(self) -> int:
        return self.time.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def n_strata(self) -> int:
        return self.strata.shape[0]

    @classmethod
    def from_records(cls, records: Iterable[SubjectRecord], covariate_names=()) -> "TrialData":
        records = list(records)
        if not records:
            raise EmptyData("no subjects")
        p = len(records[0].covariates)
        if any(len(r.covariates) != p for r in records):
            raise DataError("covariate dimension differs across subjects")
        return cls(
            time=[r.time for r in records],
            event=[bool(r.event) for r in records],
            arm=[r.arm for r in records],
            stratum=[r.stratum for r in records],
            covariates=np.array([r.covariates for r in records], dtype=float).reshape(len(records), p),
            covariate_names=covariate_names,
        )

    def records(self) -> list:
        return [
            SubjectRecord(float(t), bool(e), int(a), int(s), tuple(float(v) for v in x))
            for t, e, a, s, x in zip(self.time, self.event, self.arm, self.stratum, self.covariates)
        ]

    def subset(self, mask) -> "TrialData":
        mask = np.asarray(mask)
        return TrialData(self.time[mask], self.event[mask], self.arm[mask],
                         self.stratum[mask], self.covariates[mask], self.covariate_names)

    def with_covariates(self, covariates, names: Sequence[str] = ()) -> "TrialData":
        return TrialData(self.time, self.event, self.arm, self.stratum, covariates, tuple(names))

    def swap_arms(self) -> "TrialData":
        return TrialData(self.time, self.event, 1 - self.arm, self.stratum,
                         self.covariates, self.covariate_names)

    def stratum_dummies(self) -> np.ndarray:
        """Indicator columns for every stratum level except the smallest."""
        return (self.stratum_codes[:, None] == np.arange(1, self.n_strata)[None, :]).astype(np.float64)
