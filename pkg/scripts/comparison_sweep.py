"""Random rank <= 2 sweep of the Rademacher / Gaussian tail ratio.

    python3 scripts/comparison_sweep.py --configs 2000 --seed 1
"""

import argparse
from dataclasses import dataclass

from tailcert.suite import COMPARISON_CONSTANT, comparison_sweep


@dataclass
class SweepConfig:
    configs: int = 500
    seed: int = 42
    n_max: int = 16


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configs", type=int, default=SweepConfig.configs)
    ap.add_argument("--seed", type=int, default=SweepConfig.seed)
    ap.add_argument("--n-max", type=int, default=SweepConfig.n_max)
    cfg = SweepConfig(**vars(ap.parse_args()))
    best, where, count = comparison_sweep(cfg.configs, cfg.seed, cfg.n_max)
    print(f"pairs evaluated : {count}")
    print(f"max ratio       : {best:.10g}  ({where})")
    print(f"constant        : {COMPARISON_CONSTANT:g}")


if __name__ == "__main__":
    main()
