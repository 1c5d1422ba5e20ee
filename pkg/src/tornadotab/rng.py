"""Deterministic randomness for table filling, trial seeding and key sampling.

Every random bit in this library comes out of one counter-mode construction
built on the splitmix64 finalizer, so that two builds with the same seed are
bit-identical on any platform and a table dump can be reproduced from the
seed alone.

Fixed constants (do not change without bumping the dump format version):

* ``GAMMA = 0x9E3779B97F4A7C15`` (2^64 / golden ratio), splitmix64 increment
* ``MIX1 = 0xBF58476D1CE4E5B9``, ``MIX2 = 0x94D049BB133111EB``, finalizer
  multipliers
* domain tags ``TABLE_TAG``, ``TRIAL_TAG``, ``KEYS_TAG``, ``ORACLE_TAG``
  separating the table-fill stream, the per-trial seed stream, the key
  sampling stream and the fully-random-baseline stream.

A logical table field is addressed by ``(seed, kind, major, minor, slot)``
and its value is five chained mix rounds; see :func:`field_value`.
"""

from __future__ import annotations

import numpy as np

M64 = (1 << 64) - 1

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

TABLE_TAG = 0xA0761D6478BD642F
TRIAL_TAG = 0xE7037ED1A0B428DB
KEYS_TAG = 0x8EBC6AF09C88C6E3
ORACLE_TAG = 0x589965CC75374CC3

KIND_LEVEL = 0
KIND_TOP = 1

_U = np.uint64
_GAMMA_U = _U(GAMMA)
_MIX1_U = _U(MIX1)
_MIX2_U = _U(MIX2)


def mix64(x: int) -> int:
    """splitmix64 step: increment by GAMMA, then finalize. Returns 64 bits."""
    x = (x + GAMMA) & M64
    x = ((x ^ (x >> 30)) * MIX1) & M64
    x = ((x ^ (x >> 27)) * MIX2) & M64
    return x ^ (x >> 31)


def mix64_vec(x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array (wraparound intended)."""
    with np.errstate(over="ignore"):
        x = x + _GAMMA_U
        x = (x ^ (x >> _U(30))) * _MIX1_U
        x = (x ^ (x >> _U(27))) * _MIX2_U
        return x ^ (x >> _U(31))


def field_value(seed: int, kind: int, major: int, minor: int, slot: int) -> int:
    """Canonical 64-bit value of one logical table field.

    ``kind`` is KIND_LEVEL or KIND_TOP, ``major`` the level index (0 for the
    top table), ``minor`` the position index and ``slot`` the character.
    """
    v = mix64(seed ^ TABLE_TAG)
    v = mix64(v ^ kind)
    v = mix64(v ^ major)
    v = mix64(v ^ minor)
    return mix64(v ^ slot)


def field_value_vec(seed, kind, major, minor, slot) -> np.ndarray:
    """Vectorized :func:`field_value`; any argument may be a uint64 array."""
    v = mix64_vec(np.asarray(seed, dtype=np.uint64) ^ _U(TABLE_TAG))
    v = mix64_vec(v ^ np.asarray(kind, dtype=np.uint64))
    v = mix64_vec(v ^ np.asarray(major, dtype=np.uint64))
    v = mix64_vec(v ^ np.asarray(minor, dtype=np.uint64))
    return mix64_vec(v ^ np.asarray(slot, dtype=np.uint64))


def trial_seed(master_seed: int, trial: int) -> int:
    """Hash seed used by Monte Carlo trial ``trial`` under ``master_seed``."""
    return mix64(mix64(master_seed ^ TRIAL_TAG) ^ trial)


def trial_seed_vec(master_seed: int, trials: np.ndarray) -> np.ndarray:
    base = _U(mix64(master_seed ^ TRIAL_TAG))
    return mix64_vec(base ^ trials.astype(np.uint64))


def mixer_hash(seed: int, x: int, bits: int) -> int:
    """Seeded strong mixer standing in for a fully-random hash oracle."""
    return mix64(mix64(seed ^ ORACLE_TAG) ^ x) & ((1 << bits) - 1)


def mixer_hash_vec(seed: int, xs: np.ndarray, bits: int) -> np.ndarray:
    base = _U(mix64(seed ^ ORACLE_TAG))
    return mix64_vec(base ^ xs.astype(np.uint64)) & _U((1 << bits) - 1)


def raw_key_stream(seed: int, count: int, bits: int, offset: int = 0) -> np.ndarray:
    """Counter-mode stream of ``count`` values of ``bits`` bits (may repeat)."""
    base = _U(mix64(seed ^ KEYS_TAG))
    idx = np.arange(offset, offset + count, dtype=np.uint64)
    return mix64_vec(base ^ idx) & _U((1 << bits) - 1)


def sample_distinct_keys(
    seed: int, n: int, bits: int, exclude: np.ndarray | None = None
) -> np.ndarray:
    """First ``n`` distinct stream values not in ``exclude``, in stream order.

    Taking the first n distinct values of an iid-uniform stream yields a
    uniformly random n-subset of the universe, which is what the experiments
    need for "a random key set".
    """
    universe = 1 << bits
    excluded = 0 if exclude is None else len(exclude)
    if n > universe - excluded:
        raise ValueError(f"cannot sample {n} distinct keys from {universe - excluded}")
    seen: list[np.ndarray] = []
    offset = 0
    chunk = max(1024, 2 * n)
    picked = np.empty(0, dtype=np.uint64)
    while len(picked) < n:
        vals = raw_key_stream(seed, chunk, bits, offset=offset)
        offset += chunk
        seen.append(vals)
        pool = np.concatenate(seen)
        _, first = np.unique(pool, return_index=True)
        picked = pool[np.sort(first)]
        if exclude is not None and len(exclude):
            picked = picked[~np.isin(picked, exclude)]
        chunk *= 2
    return picked[:n]
