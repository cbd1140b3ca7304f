#!/usr/bin/env python3
"""Fetch the two desk-scale datasets used by the acceptance suite.

Writes data/wine.csv and data/sonar.csv (features first, label last, with a
header row).

* Wine (178 x 13, 3 classes): the copy of the UCI file bundled with
  scikit-learn (sklearn.datasets.load_wine), so no download is needed.
* Sonar (208 x 60, 2 classes): the KEEL copy shipped inside the `keel-ds`
  wheel on PyPI (keel_ds/data/balanced/raw/sonar.dat). KEEL rounds the
  UCI values to three decimals.
"""

import argparse
import csv
import glob
import os
import subprocess
import sys
import tempfile
import zipfile


def write_csv(path, rows, labels):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"f{i + 1}" for i in range(len(rows[0]))] + ["class"])
        for row, label in zip(rows, labels):
            w.writerow([repr(float(v)) for v in row] + [label])


def fetch_wine(out):
    from sklearn.datasets import load_wine

    data = load_wine()
    write_csv(out, data.data.tolist(), [str(t) for t in data.target])


def keel_wheel(wheel):
    if wheel:
        return wheel
    tmp = tempfile.mkdtemp()
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "keel-ds==0.2.5", "-d", tmp],
        check=True,
    )
    return glob.glob(os.path.join(tmp, "keel_ds-*.whl"))[0]


def fetch_sonar(out, wheel):
    with zipfile.ZipFile(keel_wheel(wheel)) as z:
        text = z.read("keel_ds/data/balanced/raw/sonar.dat").decode()
    rows, labels = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        fields = [t.strip() for t in line.split(",")]
        rows.append([float(t) for t in fields[:-1]])
        labels.append(fields[-1])
    write_csv(out, rows, labels)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--keel-wheel", help="use an already downloaded keel_ds wheel")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    fetch_wine(os.path.join(args.out, "wine.csv"))
    fetch_sonar(os.path.join(args.out, "sonar.csv"), args.keel_wheel)
    print(f"wrote wine.csv and sonar.csv to {os.path.abspath(args.out)}")


if __name__ == "__main__":
    main()
