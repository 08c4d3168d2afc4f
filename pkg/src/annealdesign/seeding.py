"""Named random substreams derived from one root seed.

Every source of randomness in an experiment (instance generation, tree-search
playouts, network init, descent restarts) draws from its own substream so that
paired method comparisons share common random numbers and any single stream
can be reproduced in isolation.
"""

import hashlib

import numpy as np


def _name_key(name: str) -> int:
    digest = hashlib.blake2s(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def substream(root_seed: int, name: str) -> np.random.Generator:
    """Generator for the substream `name` under `root_seed`."""
    return np.random.default_rng(np.random.SeedSequence([root_seed, _name_key(name)]))


def substream_seed(root_seed: int, name: str) -> int:
    """A 63-bit integer seed for the substream, for APIs that take plain ints."""
    seq = np.random.SeedSequence([root_seed, _name_key(name)])
    return int(seq.generate_state(1, np.uint64)[0] >> np.uint64(1))
