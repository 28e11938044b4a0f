#!/usr/bin/env python3
"""Produce data/german.csv from a raw Statlog German Credit file.

Accepts either the whitespace-separated UCI `german.data` or a CSV export of
it with the original A-codes (e.g. the copy bundled with the `themis-ml`
package). Output uses the Weka/OpenML `credit-g` attribute names and a
good/bad class column.

Usage: prepare_german.py <german.data|german_credit.csv> <out.csv>
"""
import csv
import sys

COLUMNS = [
    "checking-status", "duration", "credit-history", "purpose",
    "credit-amount", "savings-status", "employment",
    "installment-commitment", "personal-status", "other-parties",
    "residence-since", "property-magnitude", "age", "other-payment-plans",
    "housing", "existing-credits", "job", "num-dependents", "own-telephone",
    "foreign-worker", "class",
]

CLASS_NAMES = {"1": "good", "2": "bad"}


def read_rows(path):
    with open(path, newline="") as fh:
        first = fh.readline()
        fh.seek(0)
        if "," in first:
            rows = list(csv.reader(fh))
            if rows and not rows[0][0].startswith("A"):  # header row
                rows = rows[1:]
            return rows
        return [line.split() for line in fh if line.strip()]


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    rows = read_rows(sys.argv[1])
    if len(rows) != 1000:
        sys.exit(f"expected 1000 rows, got {len(rows)}")
    with open(sys.argv[2], "w", newline="") as out:
        w = csv.writer(out)
        w.writerow(COLUMNS)
        for r in rows:
            if len(r) != 21:
                sys.exit(f"expected 21 fields, got {len(r)}: {r}")
            w.writerow(r[:-1] + [CLASS_NAMES[r[-1]]])
    print(f"wrote {len(rows)} rows to {sys.argv[2]}")


if __name__ == "__main__":
    main()
