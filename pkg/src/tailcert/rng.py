"""Counter-based random streams.

Each (seed, stream) pair keys an independent Philox-4x64 generator, so a
block of samples can be regenerated anywhere without touching any other
block.  Results therefore do not depend on how blocks are spread over
workers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 20240917


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator keyed by the 128-bit value (seed, index)."""
    key = ((int(seed) & MASK64) << 64) | (int(index) & MASK64)
    return np.random.Generator(np.random.Philox(key=key))
