"""Seed derivation.

Every random stream in the package comes from one integer seed through
``numpy.random.SeedSequence(seed, spawn_key=(strategy, light, purpose))``.
Streams for different strategies, lights or purposes are statistically
independent, and the same key always reproduces the same stream.
"""

from __future__ import annotations

import numpy as np

STRATEGY_KEYS = {"baseline_ir": 1, "rejection": 2, "metropolis": 3, "hybrid": 4, "reference": 5}

# purposes
PATCH = 1      # one row of uniforms per stratum
WALK = 2       # light paths that become VPLs
CALIBRATE = 3  # pilot paths used only to estimate deposit rates
PILOT = 4      # candidate pool for rejection / normaliser for Metropolis
CHAIN = 5      # Metropolis proposals and accept tests


def stream(seed: int, strategy: str, light: int, purpose: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(STRATEGY_KEYS[strategy], int(light), int(purpose)))
    return np.random.Generator(np.random.PCG64(ss))
