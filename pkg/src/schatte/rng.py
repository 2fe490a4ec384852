"""Counter-based random streams.

Every stochastic quantity in the package draws from a Philox generator keyed
by ``(seed, *key)``.  Replica ``r`` of an experiment therefore owns the same
stream no matter which thread evaluates it or in which order.
"""
import numpy as np

from .errors import ConfigurationError

__all__ = ["make_stream", "check_seed", "WALK", "GAUSS"]

# stream families, used as the first element of a spawn key
WALK = 0
GAUSS = 1

_SEED_MAX = 2**64 - 1


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= _SEED_MAX:
        raise ConfigurationError("seed must be a 64-bit unsigned integer")
    return seed


def make_stream(seed, *key):
    """Return an independent ``numpy.random.Generator`` for ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=check_seed(seed),
                                spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
