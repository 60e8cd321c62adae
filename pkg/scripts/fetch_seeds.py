#!/usr/bin/env python3
"""Download the UCI Seeds dataset and convert it to data/seeds.csv.

The raw file is whitespace-separated with occasional double tabs; this script
normalizes it to comma-separated rows of 7 features plus a wheat-variety
label (Kama / Rosa / Canadian). Needs network access to archive.ics.uci.edu.
"""
import sys
import urllib.request
from pathlib import Path

URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/00236/seeds_dataset.txt"
VARIETIES = {"1": "Kama", "2": "Rosa", "3": "Canadian"}


def main(out_path="data/seeds.csv"):
    raw = urllib.request.urlopen(URL, timeout=60).read().decode("utf-8")
    rows = []
    for line in raw.splitlines():
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 8:
            print(f"skipping malformed line: {line!r}", file=sys.stderr)
            continue
        label = VARIETIES[fields[-1].split(".")[0]]
        rows.append(",".join(fields[:-1] + [label]))
    if len(rows) != 210:
        print(f"warning: expected 210 rows, got {len(rows)}", file=sys.stderr)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(rows)} rows, 7 features, 3 classes)")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
