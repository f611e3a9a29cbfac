"""Counter-based random streams keyed by (seed, replication, role).

Every replication of an experiment gets its own Philox stream, so results do
not depend on the order or the number of workers that consume them.
"""

import numpy as np

from .errors import ConfigurationError

ROLES = {"data": 0, "bootstrap": 1, "auxiliary": 2}


def stream(seed, replication=0, role="data"):
    """Return a :class:`numpy.random.Generator` for one replication and role."""
    if role not in ROLES:
        raise ConfigurationError(f"unknown stream role {role!r}; expected one of {sorted(ROLES)}")
    if seed is None or int(seed) != seed or seed < 0:
        raise ConfigurationError(f"seed must be a non-negative integer, got {seed!r}")
    if replication < 0:
        raise ConfigurationError(f"replication index must be >= 0, got {replication}")
    ss = np.random.SeedSequence([int(seed), ROLES[role], int(replication)])
    return np.random.Generator(np.random.Philox(ss))
