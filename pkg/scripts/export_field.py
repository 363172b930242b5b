"""Dump G_{q,r}(f) on a polar grid to CSV for external plotting."""

import argparse
import csv

import numpy as np

from bergman_hankel.bda import G
from bergman_hankel.symbols import parse_symbol


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--symbol", default="conj_log1mz")
    ap.add_argument("--r", type=float, default=1.0)
    ap.add_argument("--q", type=float, default=2.0)
    ap.add_argument("--n-radial", type=int, default=20)
    ap.add_argument("--n-angular", type=int, default=24)
    ap.add_argument("--r-max", type=float, default=0.98)
    ap.add_argument("--out", default="field.csv")
    args = ap.parse_args()
    f = parse_symbol(args.symbol)
    ts = np.linspace(0, args.r_max, args.n_radial)
    th = 2 * np.pi * np.arange(args.n_angular) / args.n_angular
    z = (ts[:, None] * np.exp(1j * th[None, :])).ravel()
    g = G(f, z, args.r, args.q)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "G"])
        for zz, gg in zip(z, g):
            wr.writerow([repr(zz.real), repr(zz.imag), repr(float(gg))])


if __name__ == "__main__":
    main()
