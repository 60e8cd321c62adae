#!/usr/bin/env python3
"""Materialize the Iris dataset (bundled with scikit-learn) as data/iris.csv.

Produces 150 rows of 4 features plus a class-name label column, the layout
the benchmark configs and the acceptance suite expect.
"""
import sys
from pathlib import Path


def main(out_path="data/iris.csv"):
    try:
        from sklearn.datasets import load_iris
    except ImportError:
        print("scikit-learn is required to materialize iris.csv", file=sys.stderr)
        return 1
    iris = load_iris()
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for vec, target in zip(iris.data, iris.target):
            cells = [repr(float(v)) for v in vec] + [str(iris.target_names[target])]
            fh.write(",".join(cells) + "\n")
    print(f"wrote {out} (150 rows, 4 features, 3 classes)")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
