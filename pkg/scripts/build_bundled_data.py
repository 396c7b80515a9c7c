"""Convert the KEEL copies of the UCI benchmark sets into the bundled files.

Usage: python scripts/build_bundled_data.py KEEL_RAW_DIR

KEEL_RAW_DIR is ``keel_ds/data/balanced/raw`` from the ``keel-ds`` wheel.
Also regenerates the small synthetic ``toy.csv`` used by the CLI examples.
"""
import csv
import sys
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "cardsvm" / "data"

_WDBC_BASE = ["radius", "texture", "perimeter", "area", "smoothness", "compactness",
              "concavity", "concave_points", "symmetry", "fractal_dimension"]

DATASETS = {
    # name: (keel file, feature names or count, label name map)
    "heart": ("heart.dat", ["age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
                            "thalach", "exang", "oldpeak", "slope", "ca", "thal"],
              {"1": "absence", "2": "presence"}),
    "ionosphere": ("ionosphere.dat", 33, {"g": "good", "b": "bad"}),
    "wdbc": ("wdbc.dat", [f"{b}_{s}" for s in ("mean", "se", "worst") for b in _WDBC_BASE],
             {"M": "malignant", "B": "benign"}),
    "wisconsin": ("wisconsin.dat", ["clump_thickness", "cell_size_uniformity",
                                    "cell_shape_uniformity", "marginal_adhesion",
                                    "epithelial_cell_size", "bare_nuclei", "bland_chromatin",
                                    "normal_nucleoli", "mitoses"],
                  {"4": "malignant", "2": "benign"}),
    "pima": ("pima.dat", ["pregnancies", "glucose", "blood_pressure", "skin_thickness",
                          "insulin", "bmi", "pedigree", "age"],
             {"tested_positive": "positive", "tested_negative": "negative"}),
}


def read_keel(path):
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([tok.strip() for tok in line.split(",")])
    return rows


def write_csv(name, names, rows, label_map):
    with open(OUT / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + ["label"])
        for r in rows:
            w.writerow(r[:-1] + [label_map[r[-1]]])


def write_sonar(raw):
    rows = read_keel(raw / "sonar.dat")
    with open(OUT / "sonar.svm", "w") as fh:
        for r in rows:
            label = "+1" if r[-1] == "M" else "-1"
            feats = " ".join(f"{j + 1}:{v}" for j, v in enumerate(r[:-1]) if float(v) != 0.0)
            fh.write(f"{label} {feats}\n".rstrip() + "\n")


def write_toy():
    rng = np.random.default_rng(20240601)
    x = rng.normal(size=(40, 8))
    score = x[:, 0] ** 2 + x[:, 1] * x[:, 2] - 0.8
    y = np.where(score > 0, "yes", "no")
    with open(OUT / "toy.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j + 1}" for j in range(8)] + ["label"])
        for row, lab in zip(x, y):
            w.writerow([f"{v:.6f}" for v in row] + [lab])


def main(raw_dir):
    raw = Path(raw_dir)
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (fname, names, label_map) in DATASETS.items():
        rows = read_keel(raw / fname)
        if isinstance(names, int):
            names = [f"a{j + 1}" for j in range(names)]
        assert all(len(r) == len(names) + 1 for r in rows), name
        write_csv(name, names, rows, label_map)
    write_sonar(raw)
    write_toy()


if __name__ == "__main__":
    main(sys.argv[1])
