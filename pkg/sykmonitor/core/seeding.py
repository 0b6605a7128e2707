"""
seeding.py - Deterministic seed derivation for reproducible runs

Every random stream in a sweep is derived from one master seed by hashing
the master seed together with labels that identify the task (mode, cell
indices, run index). SHA-256 from the cryptography package does the mixing,
so changing any label gives an unrelated stream while the same labels always
give the same one, whatever the worker count or completion order.
"""

import json

import numpy as np
from cryptography.hazmat.primitives import hashes

from .errors import PreconditionError

SEED_BITS = 64
_SEED_MASK = (1 << SEED_BITS) - 1


def _digest(payload):
    """SHA-256 digest of a bytes payload"""
    h = hashes.Hash(hashes.SHA256())
    h.update(payload)
    return h.finalize()


def _canonical(obj):
    """Stable JSON text used as hash input (sorted keys, no whitespace)"""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def derive_seed(master_seed, *labels):
    """
    Derive a 64-bit seed from a master seed and a sequence of labels

    Args:
        master_seed (int): The run's master seed
        *labels: Strings/integers/floats naming the task, e.g.
            ("phase-entanglement", 3, 7, 12)

    Returns:
        int: An unsigned 64-bit seed
    """
    if int(master_seed) < 0:
        raise PreconditionError(f"master seed must be non-negative, got {master_seed}")
    payload = _canonical([int(master_seed), *labels]).encode("utf-8")
    return int.from_bytes(_digest(payload)[:8], "big") & _SEED_MASK


def config_fingerprint(document):
    """
    Hex fingerprint of a JSON-serializable configuration document

    Used by the completion manifest to tell whether saved cells belong to
    the configuration being run.
    """
    return _digest(_canonical(document).encode("utf-8")).hex()


def make_generator(seed):
    """numpy Generator seeded from a 64-bit integer"""
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def spawn_generators(seed, count):
    """
    Split one seed into independent generators

    Args:
        seed (int): Parent seed
        count (int): Number of child streams

    Returns:
        list: `count` numpy Generators
    """
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.default_rng(child) for child in children]
