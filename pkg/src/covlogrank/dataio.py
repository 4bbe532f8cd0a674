"""CSV ingestion and export of trial data.

Expected layout (RFC 4180, UTF-8, '.' decimal separator)::

    time,event,arm,stratum,x1,x2
    3.2,1,0,1,350,0
    ...

``time``, ``event`` and ``arm`` are required. ``stratum`` is optional.
Covariate columns are chosen with ``covariates``: ``"auto"`` takes every
column named ``x1``, ``x2``, ... in numeric order, a sequence takes the named
columns, and ``None`` takes none. ``rename`` maps names used in the file to
the names above, e.g. ``{"days": "time", "cens": "event"}``.

Row numbers in error messages are physical line numbers of the file, so the
header is line 1 and the first subject is line 2.
"""

from __future__ import annotations

import csv
import math
import re
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .data import TrialData
from .errors import BadArmValue, DataError, EmptyData, MissingColumn, NegativeTime, NonNumeric

REQUIRED = ("time", "event", "arm")
_AUTO_COVARIATE = re.compile(r"^x(\d+)$")


def _number(text, row, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise NonNumeric(row, column, text) from None
    if not math.isfinite(value):
        raise NonNumeric(row, column, text)
    return value


def _select_covariates(header, covariates):
    if covariates is None:
        return []
    if isinstance(covariates, str):
        if covariates == "auto":
            found = [(int(m.group(1)), h) for h in header if (m := _AUTO_COVARIATE.match(h))]
            return [h for _, h in sorted(found)]
        if covariates in ("", "none"):
            return []
        covariates = [c.strip() for c in covariates.split(",") if c.strip()]
    for c in covariates:
        if c not in header:
            raise MissingColumn(c)
    return list(covariates)


def parse_trial_csv(path: Union[str, Path], covariates: Union[str, Sequence[str], None] = "auto",
                    stratum_col: Optional[str] = "stratum",
                    rename: Optional[Mapping[str, str]] = None) -> TrialData:
    """Read a trial CSV into a validated ``TrialData``.

    ``stratum_col`` names the stratum column; it is optional unless it was
    given explicitly as something other than ``"stratum"``.
    """
    rename = dict(rename or {})
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            raw_header = next(reader)
        except StopIteration:
            raise EmptyData(f"{path}: file is empty") from None
        header = [rename.get(h.strip(), h.strip()) for h in raw_header]
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names after renaming: {header}")
        for col in REQUIRED:
            if col not in header:
                raise MissingColumn(col)
        if stratum_col and stratum_col not in header and stratum_col != "stratum":
            raise MissingColumn(stratum_col)
        use_stratum = bool(stratum_col) and stratum_col in header
        cov_cols = _select_covariates(header, covariates)
        index = {h: k for k, h in enumerate(header)}

        time, event, arm, stratum, cov = [], [], [], [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"line {line}: expected {len(header)} fields, found {len(row)}")

            t = _number(row[index["time"]], line, "time")
            if t < 0:
                raise NegativeTime(line, row[index["time"]])
            a = row[index["arm"]].strip()
            try:
                a_val = float(a)
            except ValueError:
                raise BadArmValue(line, a) from None
            if a_val not in (0.0, 1.0):
                raise BadArmValue(line, a)
            e = _number(row[index["event"]], line, "event")
            if e not in (0.0, 1.0):
                raise DataError(f"line {line}: event must be 0 or 1, got {row[index['event']]!r}")
            if use_stratum:
                s = _number(row[index[stratum_col]], line, stratum_col)
                if s < 0 or s != int(s):
                    raise DataError(f"line {line}: stratum must be a nonnegative integer, got {s!r}")
                stratum.append(int(s))
            time.append(t)
            event.append(e == 1.0)
            arm.append(int(a_val))
            cov.append([_number(row[index[c]], line, c) for c in cov_cols])

    if not time:
        raise EmptyData(f"{path}: no data rows")
    return TrialData(
        time=np.array(time),
        event=np.array(event),
        arm=np.array(arm),
        stratum=np.array(stratum) if use_stratum else None,
        covariates=np.array(cov, dtype=np.float64).reshape(len(time), len(cov_cols)),
        covariate_names=tuple(cov_cols),
    )


def write_trial_csv(data: TrialData, path: Union[str, Path]) -> None:
    """Write ``data`` so that ``parse_trial_csv`` reads back identical arrays.

    Floats are written with ``repr``, which round-trips exactly.
    """
    names = list(data.covariate_names)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "event", "arm", "stratum", *names])
        for t, e, a, s, x in zip(data.time, data.event, data.arm, data.stratum, data.covariates):
            w.writerow([repr(float(t)), int(e), int(a), int(s), *(repr(float(v)) for v in x)])
