#!/usr/bin/env python3
"""Convert the raw UCI Adult and German Credit files into the CSV layout the
audit tool reads (header row, comma separated, '?' as missing marker).

Usage: prepare_data.py <dir containing adult.data, adult.test, german.data> <out dir>
"""
import csv
import os
import sys

ADULT_COLUMNS = [
    "Age", "Workclass", "fnlwgt", "Education", "Education-Num", "Marital Status",
    "Occupation", "Relationship", "Race", "Sex", "Capital Gain", "Capital Loss",
    "Hours Per Week", "Country", "Income",
]

GERMAN_COLUMNS = [
    "existingchecking", "duration", "credithistory", "purpose", "creditamount",
    "savings", "employmentsince", "installmentrate", "statussex", "otherdebtors",
    "residencesince", "property", "age", "otherinstallmentplans", "housing",
    "existingcredits", "job", "peopleliable", "telephone", "foreignworker",
    "classification",
]


def adult(src, out):
    rows = []
    for name in ("adult.data", "adult.test"):
        with open(os.path.join(src, name)) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("|"):
                    continue
                fields = [f.strip() for f in line.split(",")]
                fields[-1] = fields[-1].rstrip(".")
                rows.append(fields)
    with open(os.path.join(out, "adult.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ADULT_COLUMNS)
        w.writerows(rows)


def german(src, out):
    with open(os.path.join(src, "german.data")) as fh:
        rows = [line.split() for line in fh if line.strip()]
    # 1 = good risk, 2 = bad risk; the positive class is good risk.
    for r in rows:
        r[-1] = "good" if r[-1] == "1" else "bad"
    with open(os.path.join(out, "german.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GERMAN_COLUMNS)
        w.writerows(rows)


if __name__ == "__main__":
    adult(sys.argv[1], sys.argv[2])
    german(sys.argv[1], sys.argv[2])
