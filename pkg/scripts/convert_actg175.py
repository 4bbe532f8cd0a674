"""Convert an ACTG 175 export into the covlogrank CSV layout.

The data are not bundled. Export them from R,

    install.packages("speff2trial")
    write.csv(speff2trial::ACTG175, "ACTG175.csv", row.names = FALSE)

or download the UCI "AIDS Clinical Trials Group Study 175" table, then run

    python scripts/convert_actg175.py ACTG175.csv data/actg175.csv

Output columns: ``time, event, arm, stratum, cd40, preanti``.

* Only the zidovudine (ZDV) and didanosine (ddI) arms are kept; ``arm`` is 1
  for ddI and 0 for ZDV. The full file has 1,093 such patients.
* ``event`` is the composite endpoint indicator shipped with the data (CD4
  decline of at least 50%, AIDS-defining event, or death), ``time`` the days
  to that event or to censoring.
* ``stratum`` is the prior-antiretroviral-therapy stratum (1 naive, 2 at
  most 52 weeks, 3 more than 52 weeks).
* ``cd40`` (baseline CD4 count) and ``preanti`` (days of prior therapy) are
  copied unscaled.

Both the R export (``days, cens, arms, strat``) and the UCI table
(``time, cid, trt, strat``) are recognised; in both, treatment code 0 is
ZDV and 3 is ddI.

Then analyze with

    covlogrank analyze --data data/actg175.csv --covariates cd40,preanti --pi 0.5
"""

import argparse
import csv
import sys
from pathlib import Path

LAYOUTS = {
    "speff2trial": {"time": "days", "event": "cens", "arm": "arms"},
    "uci": {"time": "time", "event": "cid", "arm": "trt"},
}
ZDV, DDI = 0, 3
OUT_COLUMNS = ("time", "event", "arm", "stratum", "cd40", "preanti")


def _layout(header):
    for name, cols in LAYOUTS.items():
        if all(c in header for c in cols.values()) and {"strat", "cd40", "preanti"} <= set(header):
            return name, cols
    raise SystemExit(f"unrecognised ACTG 175 layout; columns were {header}")


def _int(text):
    return int(float(text))


def convert(src, dst):
    with open(src, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip().strip('"') for h in reader.fieldnames or ()]
        reader.fieldnames = header
        name, cols = _layout(header)
        rows = []
        for rec in reader:
            code = _int(rec[cols["arm"]])
            if code not in (ZDV, DDI):
                continue
            rows.append((rec[cols["time"]], _int(rec[cols["event"]]), int(code == DDI),
                         _int(rec["strat"]), rec["cd40"], rec["preanti"]))
    Path(dst).parent.mkdir(parents=True, exist_ok=True)
    with open(dst, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(OUT_COLUMNS)
        w.writerows(rows)
    return name, len(rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", help="ACTG175 CSV (R speff2trial export or UCI table)")
    ap.add_argument("dest", nargs="?", default="data/actg175.csv")
    args = ap.parse_args(argv)
    name, n = convert(args.source, args.dest)
    print(f"{args.source} ({name} layout): wrote {n} ZDV/ddI patients to {args.dest}")
    if n != 1093:
        print(f"warning: expected 1093 patients, found {n}", file=sys.stderr)


if __name__ == "__main__":
    main()
