"""Counter-based random number generation.

Every stochastic operation in the package draws from a Philox
counter-based generator keyed by an explicit 64-bit seed, so identical
invocations reproduce bit-identical streams on any platform.  Sharded
estimators derive independent streams with ``jumped``, which makes the
merge of per-shard results order independent.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, shard: int = 0) -> np.random.Generator:
    """Generator for ``seed``; ``shard`` selects an independent stream."""
    bitgen = np.random.Philox(key=int(seed) & (2**64 - 1))
    if shard:
        bitgen = bitgen.jumped(shard)
    return np.random.Generator(bitgen)


def uniform_simplex(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Draw ``n`` points uniformly from the unit simplex in ``dim`` coords.

    Uses the exponential trick: g_i ~ Exp(1), pi = g / sum(g), which is
    Dirichlet(1,...,1) and hence uniform w.r.t. Lebesgue measure.
    """
    g = rng.standard_exponential((n, dim))
    return g / g.sum(axis=1, keepdims=True)
