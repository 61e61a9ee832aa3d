"""Seeded, counter-based random number generation.

All stochastic routines in the package derive their generators through
:func:`make_rng`, which builds a Philox (counter-based) bit generator from a
master seed plus an optional stream key. Identical (seed, stream) pairs give
bitwise-identical streams within one build.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a Philox generator keyed by ``seed`` and a stream tuple."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *stream: int) -> int:
    """Derive a deterministic child seed, e.g. one per trial index."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return int(ss.generate_state(1)[0])
