"""P(|sum A_j xi_j|^2 >= mu) for the two extremal families as d, n grow.

No verdict is attached: the estimates are compared to the limits 1/2 and
P(|g| >= 1) by eye.
"""

import argparse
from dataclasses import dataclass, field

from tailcert.spheresim import HIGHD_LIMITS, highd_limit_experiment


@dataclass
class TrendConfig:
    sizes: list = field(default_factory=lambda: [(2, 2), (4, 4), (8, 8), (16, 16), (32, 32), (64, 64)])
    samples: int = 100_000
    seed: int = 42


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=TrendConfig.samples)
    ap.add_argument("--seed", type=int, default=TrendConfig.seed)
    args = ap.parse_args()
    cfg = TrendConfig(samples=args.samples, seed=args.seed)
    for family in HIGHD_LIMITS:
        rep = highd_limit_experiment(cfg.sizes, family, cfg.samples, cfg.seed)
        print(f"{family}  (limit {rep.limit:.6f})")
        for row in rep.rows():
            print(f"  d={row['d']:3d} n={row['n']:3d}  p_hat={row['p_hat']:.5f}  "
                  f"[{row['ci_low']:.5f}, {row['ci_high']:.5f}]")


if __name__ == "__main__":
    main()
