#!/usr/bin/env python3
"""Export benchmark datasets to the CSV layout the CLI and tests consume.

Subcommands:
  mnist   Export handwritten-digit data from the npm `mnist` package
          (bundles ~10k real MNIST samples) as flattened, 2x2 mean-pooled
          14x14 images in [0,1] with a `class` column. 500 rows per class go
          to the train split, the rest to test.
  digits  Fallback when npm is unavailable: scikit-learn's bundled 8x8
          digits (no network needed).
  odds    Convert a tabular outlier benchmark file (.mat with X/y arrays as
          distributed by the ODDS collection, or .npz with X/y) into a CSV
          with a `label` column (+1 normal, -1 anomaly).

Examples:
  python3 tools/fetch_data.py mnist --out-dir data
  python3 tools/fetch_data.py digits --out-dir data
  python3 tools/fetch_data.py odds thyroid.mat --name thyroid --out-dir data/odds
"""

import argparse
import csv
import json
import pathlib
import subprocess
import sys
import tarfile
import tempfile


def write_csv(path, rows, n_features, extra_col):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{i}" for i in range(n_features)] + [extra_col])
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def pool_2x2(flat, side):
    """2x2 mean pooling of a flattened side x side image."""
    half = side // 2
    out = []
    for r in range(half):
        for c in range(half):
            i = 2 * r * side + 2 * c
            out.append(
                (flat[i] + flat[i + 1] + flat[i + side] + flat[i + side + 1]) / 4.0
            )
    return out


def cmd_mnist(args):
    out_dir = pathlib.Path(args.out_dir)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        print("fetching the npm `mnist` package ...")
        subprocess.run(
            ["npm", "pack", "mnist", "--silent"], cwd=tmp, check=True,
            stdout=subprocess.DEVNULL,
        )
        tarball = next(tmp.glob("mnist-*.tgz"))
        with tarfile.open(tarball) as tf:
            tf.extractall(tmp)
        digits_dir = tmp / "package" / "src" / "digits"

        train_rows, test_rows = [], []
        for digit in range(10):
            data = json.loads((digits_dir / f"{digit}.json").read_text())["data"]
            n = len(data) // 784
            for i in range(n):
                flat = data[i * 784 : (i + 1) * 784]
                row = [f"{v:.6g}" for v in pool_2x2(flat, 28)] + [digit]
                (train_rows if i < args.per_class else test_rows).append(row)
    write_csv(out_dir / "mnist_train.csv", train_rows, 196, "class")
    write_csv(out_dir / "mnist_test.csv", test_rows, 196, "class")


def cmd_digits(args):
    from sklearn.datasets import load_digits

    X, y = load_digits(return_X_y=True)
    out_dir = pathlib.Path(args.out_dir)
    train_rows, test_rows = [], []
    seen = {c: 0 for c in range(10)}
    for xi, yi in zip(X, y):
        row = [f"{v / 16.0:.6g}" for v in xi] + [int(yi)]
        seen[int(yi)] += 1
        # first ~70% of each class (dataset order) to train
        if seen[int(yi)] <= 125:
            train_rows.append(row)
        else:
            test_rows.append(row)
    write_csv(out_dir / "digits_train.csv", train_rows, 64, "class")
    write_csv(out_dir / "digits_test.csv", test_rows, 64, "class")


def cmd_odds(args):
    import numpy as np

    src = pathlib.Path(args.path)
    if src.suffix == ".mat":
        try:
            from scipy.io import loadmat

            mat = loadmat(src)
            X, y = mat["X"], mat["y"].ravel()
        except NotImplementedError:  # v7.3 files are HDF5
            import h5py

            with h5py.File(src, "r") as fh:
                X = fh["X"][()].T
                y = fh["y"][()].ravel()
    elif src.suffix == ".npz":
        npz = np.load(src)
        X, y = npz["X"], npz["y"].ravel()
    else:
        sys.exit(f"unsupported file type: {src}")

    name = args.name or src.stem
    rows = []
    for xi, yi in zip(X, y):
        label = -1 if int(yi) == 1 else 1  # benchmark files mark outliers with 1
        rows.append([f"{float(v):.17g}" for v in xi] + [label])
    write_csv(pathlib.Path(args.out_dir) / f"{name}.csv", rows, X.shape[1], "label")


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("mnist")
    p.add_argument("--out-dir", default="data")
    p.add_argument("--per-class", type=int, default=500)
    p.set_defaults(fn=cmd_mnist)

    p = sub.add_parser("digits")
    p.add_argument("--out-dir", default="data")
    p.set_defaults(fn=cmd_digits)

    p = sub.add_parser("odds")
    p.add_argument("path")
    p.add_argument("--name")
    p.add_argument("--out-dir", default="data/odds")
    p.set_defaults(fn=cmd_odds)

    args = ap.parse_args()
    args.fn(args)


if __name__ == "__main__":
    main()
