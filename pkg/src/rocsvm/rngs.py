"""Seeded, portable random streams.

All randomness in the package goes through Philox, a counter-based generator
whose output is fixed across platforms for a given numpy version.  Substreams
for parallel work (replications, bootstrap draws) are derived from an integer
seed plus a tuple path, so results never depend on execution order.

Normal variates are produced by applying the inverse normal CDF to uniforms
instead of numpy's ziggurat, keeping every draw a pure function of the
uniform bit stream.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_DENOM = float(2**53)


def make_rng(*entropy: int) -> np.random.Generator:
    """Create a Philox generator from an integer seed path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for a named substream, e.g. ``substream(seed, rep, 3)``."""
    return make_rng(seed, *path)


def uniform_open(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniforms on the open interval (0, 1), never exactly 0 or 1."""
    return (rng.integers(0, 2**53, size=size) + 0.5) / _DENOM


def standard_normal(rng: np.random.Generator, size=None) -> np.ndarray:
    """N(0,1) draws via the inverse-CDF transform."""
    return ndtri(uniform_open(rng, size))


def standard_exponential(rng: np.random.Generator, size=None) -> np.ndarray:
    """Exp(1) draws via the inverse-CDF transform."""
    return -np.log(uniform_open(rng, size))
