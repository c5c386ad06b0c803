#!/usr/bin/env python3
"""Generate the synthetic stand-in lookup tables under data/.

Both tables have the same categorical structure as the materials datasets
they stand in for, with responses drawn from a seeded additive-plus-interaction
model. The values carry no physical meaning.

Usage: python3 tools/make_synthetic_data.py [output_dir]
"""

import csv
import itertools
import pathlib
import sys

import numpy as np

M_SITES = ["Sc", "Ti", "V", "Cr", "Zr", "Nb", "Mo", "Hf", "Ta", "W"]
A_SITES = ["Al", "Si", "P", "S", "Ga", "Ge", "As", "Cd", "In", "Sn", "Tl", "Pb"]
X_SITES = ["C", "N"]

SPINEL_A = ["Al", "Ga", "In"]
SPINEL_MA = ["V", "Nb", "Ta", "Cr", "Mo", "W"]
SPINEL_MB = ["V", "Nb", "Ta", "Mo", "W"]
SPINEL_X = ["S", "Se", "Te"]


def additive(rng, sizes, scale):
    return [rng.normal(0.0, scale, size=s) for s in sizes]


def m2ax(rng):
    combos = list(itertools.product(range(len(M_SITES)), range(len(A_SITES)), range(len(X_SITES))))
    keep = sorted(rng.choice(len(combos), size=223, replace=False))
    eff_e = additive(rng, (10, 12, 2), 40.0)
    eff_b = additive(rng, (10, 12, 2), 25.0)
    inter = rng.normal(0.0, 10.0, size=(10, 12))
    rows = []
    for idx in keep:
        m, a, x = combos[idx]
        e = 250.0 + eff_e[0][m] + eff_e[1][a] + eff_e[2][x] + inter[m, a] + rng.normal(0.0, 3.0)
        b = 150.0 + eff_b[0][m] + eff_b[1][a] + eff_b[2][x] + 0.3 * inter[m, a] + rng.normal(0.0, 3.0)
        g = 0.42 * e + rng.normal(0.0, 2.0)
        rows.append((M_SITES[m], A_SITES[a], X_SITES[x], round(e, 3), round(b, 3), round(g, 3)))
    return ["M", "A", "X", "E", "B", "G"], rows


def spinel(rng):
    sizes = (len(SPINEL_A), len(SPINEL_MA), len(SPINEL_MB), len(SPINEL_X))
    combos = list(itertools.product(*(range(s) for s in sizes)))
    eff_g = additive(rng, sizes, 0.4)
    eff_h = additive(rng, sizes, 30.0)
    raw = np.array([0.5 + sum(eff_g[k][c[k]] for k in range(4)) + rng.normal(0.0, 0.1) for c in combos])
    # Exactly 56 compounds are metallic (zero gap).
    zero = set(np.argsort(raw)[:56].tolist())
    rows = []
    for i, c in enumerate(combos):
        eg = 0.0 if i in zero else round(float(raw[i] - raw[sorted(zero)].max()) + 0.01, 4)
        dh = round(float(40.0 + sum(eff_h[k][c[k]] for k in range(4)) + rng.normal(0.0, 5.0)), 3)
        rows.append((SPINEL_A[c[0]], SPINEL_MA[c[1]], SPINEL_MB[c[2]], SPINEL_X[c[3]], eg, dh))
    return ["A", "Ma", "Mb", "X", "Eg", "dHd"], rows


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    out.mkdir(parents=True, exist_ok=True)
    write(out / "m2ax_synthetic.csv", *m2ax(np.random.default_rng(20200101)))
    write(out / "spinel_synthetic.csv", *spinel(np.random.default_rng(20200102)))


if __name__ == "__main__":
    main()
