"""Table of E(X - u)_+^3 / (h(t) / a(t)^3) for the rank-2 comparator X."""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from tailcert.density import DensityModel, cube_moment_bound


@dataclass
class TableConfig:
    lams: list = field(default_factory=lambda: [1.0, 2.0, 10.0, 100.0, 1e4])
    ts: list = field(default_factory=lambda: [1.01, 1.5, 2.0, 3.0, 6.0, 10.0])
    rel_tol: float = 1e-9


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lams", type=float, nargs="+")
    ap.add_argument("--ts", type=float, nargs="+")
    args = ap.parse_args()
    cfg = TableConfig()
    if args.lams:
        cfg.lams = args.lams
    if args.ts:
        cfg.ts = args.ts
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["lambda", "t", "u", "hazard", "tail", "moment", "ratio", "bound"])
    for lam in cfg.lams:
        m = DensityModel(lam)
        for t in cfg.ts:
            r = cube_moment_bound(m, t, rel_tol=cfg.rel_tol)
            out.writerow([lam, t, f"{r.u:.8g}", f"{r.hazard:.8g}", f"{r.tail:.8g}",
                          f"{r.moment:.8g}", f"{r.ratio:.8g}", f"{r.c0:.8g}"])


if __name__ == "__main__":
    main()
