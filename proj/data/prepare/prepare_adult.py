#!/usr/bin/env python3
"""Produce data/adult.csv: the cleaned 45,222-row UCI Adult dataset.

Two input modes:

  raw mode:     prepare_adult.py raw <adult.data> <adult.test> <out.csv>
                Concatenates the UCI train and test files, strips whitespace,
                normalises the test-set labels ("<=50K." -> "<=50K"), and
                drops every row containing a "?" missing marker
                (48,842 -> 45,222 rows).

  onehot mode:  prepare_adult.py onehot <adult_onehot.csv> <out.csv>
                Inverts a one-hot-encoded copy of the same cleaned data
                (e.g. the CSV bundled with the `ethicml` package) back to
                the original categorical columns. Indicator columns are
                named "<feature>_<category>"; exactly one per group is 1.

Output columns follow the UCI attribute order with the display names used
throughout this project (final-weight = fnlwgt, edu-num = education-num,
gender = sex, income = salary).
"""
import csv
import sys

OUT_COLUMNS = [
    "age", "workclass", "final-weight", "education", "edu-num",
    "marital-status", "occupation", "relationship", "race", "gender",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]

RAW_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "salary",
]

# one-hot source column/group -> output column
SOURCE_NAMES = {
    "age": "age", "fnlwgt": "final-weight", "education-num": "edu-num",
    "capital-gain": "capital-gain", "capital-loss": "capital-loss",
    "hours-per-week": "hours-per-week", "workclass": "workclass",
    "education": "education", "marital-status": "marital-status",
    "occupation": "occupation", "relationship": "relationship",
    "race": "race", "sex": "gender", "native-country": "native-country",
    "salary": "income",
}


def from_raw(train_path, test_path, out_path):
    rows = []
    for path, skip_first in ((train_path, False), (test_path, True)):
        with open(path) as fh:
            lines = fh.read().splitlines()
        if skip_first and lines and lines[0].startswith("|"):
            lines = lines[1:]
        for line in lines:
            line = line.strip().rstrip(".")
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != len(RAW_COLUMNS):
                sys.exit(f"bad row: {line}")
            if "?" in cells:
                continue
            rows.append(cells)
    write(rows, out_path)


def from_onehot(src_path, out_path):
    with open(src_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = list(reader)

    # Group indicator columns by the feature-name prefix.
    groups = {}   # source feature -> [(column index, category)]
    plain = {}    # source feature -> column index
    for i, col in enumerate(header):
        name, sep, cat = col.partition("_")
        if sep and name in SOURCE_NAMES and name not in ("age",):
            groups.setdefault(name, []).append((i, cat))
        else:
            plain[col] = i

    rows = []
    for r in data:
        rec = {}
        for src, idx in plain.items():
            rec[SOURCE_NAMES[src]] = r[idx]
        for src, members in groups.items():
            hot = [cat for idx, cat in members if r[idx] not in ("0", "0.0", "False")]
            if len(hot) != 1:
                sys.exit(f"non-exclusive one-hot group {src}: {hot}")
            rec[SOURCE_NAMES[src]] = hot[0]
        rows.append([rec[c] for c in OUT_COLUMNS])
    write(rows, out_path)


def write(rows, out_path):
    if len(rows) != 45222:
        sys.exit(f"expected 45222 rows, got {len(rows)}")
    with open(out_path, "w", newline="") as out:
        w = csv.writer(out)
        w.writerow(OUT_COLUMNS)
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {out_path}")


def main():
    if len(sys.argv) >= 2 and sys.argv[1] == "raw" and len(sys.argv) == 5:
        from_raw(sys.argv[2], sys.argv[3], sys.argv[4])
    elif len(sys.argv) >= 2 and sys.argv[1] == "onehot" and len(sys.argv) == 4:
        from_onehot(sys.argv[2], sys.argv[3])
    else:
        sys.exit(__doc__)


if __name__ == "__main__":
    main()
