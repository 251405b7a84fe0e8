"""Convert the raw UCI Adult file (headerless, comma+space separated) to a headed CSV.

    python -m sacluster.adult data/adult.data adult.csv
"""

import csv
import sys
from pathlib import Path

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]


def convert(raw_path, out_path) -> int:
    """Write ``out_path`` and return the number of records."""
    n = 0
    with open(raw_path, encoding="utf-8") as src, open(out_path, "w", encoding="utf-8", newline="") as dst:
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in csv.reader(src):
            if not row or row[0].startswith("|"):
                continue
            row = [c.strip() for c in row]
            if len(row) != len(COLUMNS):
                raise ValueError(f"record {n + 1}: expected {len(COLUMNS)} fields, got {len(row)}")
            writer.writerow(row)
            n += 1
    return n


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    print(convert(Path(sys.argv[1]), Path(sys.argv[2])))
