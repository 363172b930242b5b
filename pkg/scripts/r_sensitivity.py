"""How the criterion sup and the decomposition ratios move with the disc radius r."""

import argparse
import csv
import sys

from bergman_hankel.bda import criterion_pq, decompose, validation_radius
from bergman_hankel.geometry import generate_lattice, lattice_sample, partition_of_unity
from bergman_hankel.symbols import parse_symbol
from bergman_hankel.weights import power

def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--symbol", default="zbar")
    ap.add_argument("--radii", default="0.5,0.75,1.0,1.5")
    ap.add_argument("--r-max", type=float, default=0.95)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    f = parse_symbol(args.symbol)
    w = power(0)
    rows = []
    for r in map(float, args.radii.split(",")):
        crit = criterion_pq(f, w, w, 2, 2, r, r_max=args.r_max, n_angles=4)
        lat = generate_lattice(r, args.r_max)
        dec = decompose(f, lat, partition_of_unity(lat))
        chk = dec.validate(lattice_sample(validation_radius(lat), 40, 1))
        rows.append((r, crit.sup, len(lat), lat.multiplicity, chk.dbar_sup, chk.f2_sup))
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    wr = csv.writer(fh)
    wr.writerow(["r", "criterion_sup", "lattice_points", "multiplicity", "dbar_ratio", "f2_ratio"])
    wr.writerows(rows)

if __name__ == "__main__":
    main()
