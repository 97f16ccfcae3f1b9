#!/usr/bin/env python3
"""Generate high-precision Faddeeva reference values with mpmath.

Writes crates/deltagate/tests/data/faddeeva_grid.csv: a 100 x 100 polar grid
(radii geometric in [1e-3, 50], angles uniform in [0, pi]) of w(z) computed at
25 significant digits and rounded to the nearest f64 pair.  The test suite
compares the Rust kernel against these values bit-for-bit parsed.

Run from the repository root:  python3 tools/make_faddeeva_reference.py
"""

import csv
import math
from mpmath import mp, mpc, erfc, exp

mp.dps = 25

N_R, N_TH = 100, 100
R_MIN, R_MAX = 1e-3, 50.0


def w(z):
    return exp(-z * z) * erfc(-1j * z)


def main():
    rows = []
    for i in range(N_R):
        r = R_MIN * (R_MAX / R_MIN) ** (i / (N_R - 1))
        for j in range(N_TH):
            th = math.pi * j / (N_TH - 1)
            z = mpc(r * math.cos(th), r * math.sin(th))
            val = w(z)
            rows.append((float(z.real), float(z.imag),
                         float(val.real), float(val.imag)))
    out = "crates/deltagate/tests/data/faddeeva_grid.csv"
    with open(out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["re_z", "im_z", "re_w", "im_w"])
        for row in rows:
            wr.writerow([repr(v) for v in row])
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
