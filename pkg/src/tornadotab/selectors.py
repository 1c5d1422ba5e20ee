"""Selector functions: which keys of a base set get selected under a hash.

A selector looks at a key, the selection bits of its hash value, and the
selection bits of the query keys' hash values; query keys are always
selected. The families here are analytic: the expected selected-set size
under a fully random hash (``mu``) has a closed form, which the bound
checks in :mod:`tornadotab.experiments` rely on.

* ``FIXED_SET``: a fixed key set, hash-independent (0 selection bits).
* ``BIT_PREFIX``: keys whose high ``s`` output bits land in a target set,
  optionally relative to the first query key's prefix.
* ``DYADIC_INTERVAL``: keys hashing into the length-``2^l`` dyadic interval
  containing the anchor query's hash or one of its two neighbors
  (``out_bits - l`` selection bits).
* ``BIN``: keys hashing to one fixed (or query-relative) output value; all
  output bits are selection bits.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, TornadoHash


class SelectorKind(enum.Enum):
    FIXED_SET = "fixed_set"
    BIT_PREFIX = "bit_prefix"
    DYADIC_INTERVAL = "dyadic_interval"
    BIN = "bin"


@dataclass(frozen=True)
class Selector:
    kind: SelectorKind
    keys: frozenset[int]
    query_keys: frozenset[int] = field(default_factory=frozenset)
    s_bits: int | None = None
    targets: frozenset[int] | None = None
    relative_to_query: bool = False
    interval_bits: int | None = None
    anchor: int | None = None
    bin_value: int | None = None


def fixed_set(keys, query_keys=()) -> Selector:
    return Selector(SelectorKind.FIXED_SET, frozenset(keys) | frozenset(query_keys),
                    frozenset(query_keys))


def bit_prefix(keys, s: int, targets, query_keys=(), relative_to_query=False) -> Selector:
    if s < 0:
        raise ConfigError("prefix width must be >= 0")
    targets = frozenset(targets)
    if any(t >> s for t in targets):
        raise ConfigError("target exceeds prefix width")
    if relative_to_query and not query_keys:
        raise ConfigError("query-relative prefix selector needs a query key")
    return Selector(SelectorKind.BIT_PREFIX, frozenset(keys), frozenset(query_keys),
                    s_bits=s, targets=targets, relative_to_query=relative_to_query)


def dyadic_interval(keys, anchor: int, interval_bits: int) -> Selector:
    if interval_bits < 0:
        raise ConfigError("interval_bits must be >= 0")
    return Selector(SelectorKind.DYADIC_INTERVAL, frozenset(keys),
                    frozenset({anchor}), interval_bits=interval_bits, anchor=anchor)


def bin_selector(keys, bin_value: int | None = None, query_keys=()) -> Selector:
    if bin_value is None and not query_keys:
        raise ConfigError("query-relative bin selector needs a query key")
    return Selector(SelectorKind.BIN, frozenset(keys), frozenset(query_keys),
                    bin_value=bin_value)


def hard_instance(char_bits: int) -> Selector:
    """The two-column key set with a two-bit prefix selector.

    Base keys are {0,1} x Sigma (first character 0 or 1, second free); a key
    is selected when the two leftmost output bits are zero, so each non-query
    key is chosen with probability 1/4 and mu = sigma/2. Zero-sets of the
    form {0a, 1a, 0b, 1b} make the dependence probability of this instance
    nearly as large as the upper bound allows.
    """
    sigma = 1 << char_bits
    keys = [(a << char_bits) | b for a in range(sigma) for b in (0, 1)]
    return bit_prefix(keys, 2, {0})


def selection_bit_count(sel: Selector, out_bits: int) -> int:
    """How many high output bits the selector reads (its s in R_s x R_t)."""
    if sel.kind is SelectorKind.FIXED_SET:
        return 0
    if sel.kind is SelectorKind.BIT_PREFIX:
        return sel.s_bits  # type: ignore[return-value]
    if sel.kind is SelectorKind.DYADIC_INTERVAL:
        return out_bits - sel.interval_bits  # type: ignore[operator]
    return out_bits


def mu(sel: Selector, out_bits: int) -> float:
    """Exact expected selected-set size under a fully random hash.

    Query keys contribute probability 1 each, every other base key the
    per-key selection probability of the family.
    """
    n_free = len(sel.keys - sel.query_keys)
    n_q = len(sel.query_keys)
    if sel.kind is SelectorKind.FIXED_SET:
        return float(len(sel.keys | sel.query_keys))
    if sel.kind is SelectorKind.BIT_PREFIX:
        return n_free * len(sel.targets) / (1 << sel.s_bits) + n_q  # type: ignore[arg-type]
    if sel.kind is SelectorKind.DYADIC_INTERVAL:
        if sel.interval_bits > out_bits:  # type: ignore[operator]
            raise ConfigError("interval wider than the output range")
        return n_free * min(3.0 * (1 << sel.interval_bits) / (1 << out_bits), 1.0) + n_q
    return n_free / (1 << out_bits) + n_q


def _candidates(sel: Selector) -> np.ndarray:
    return np.fromiter(sorted(sel.keys | sel.query_keys), dtype=np.uint64)


def selection_mask(
    sel: Selector,
    keys: np.ndarray,
    evals: np.ndarray,
    out_bits: int,
    query_evals: dict[int, int],
) -> np.ndarray:
    """Vectorized selection over candidate keys with precomputed hashes."""
    if sel.kind is SelectorKind.FIXED_SET:
        mask = np.ones(len(keys), dtype=bool)
    elif sel.kind is SelectorKind.BIT_PREFIX:
        targets = set(sel.targets)  # type: ignore[arg-type]
        if sel.relative_to_query:
            qpref = query_evals[min(sel.query_keys)] >> (out_bits - sel.s_bits)  # type: ignore[operator]
            targets = {t ^ qpref for t in targets}
        if sel.s_bits == 0:  # empty prefix: numpy cannot shift uint64 by 64
            mask = np.full(len(keys), 0 in targets, dtype=bool)
        else:
            pref = evals >> np.uint64(out_bits - sel.s_bits)  # type: ignore[operator]
            mask = np.zeros(len(keys), dtype=bool)
            for t in targets:
                mask |= pref == np.uint64(t)
    elif sel.kind is SelectorKind.DYADIC_INTERVAL:
        if sel.interval_bits >= out_bits:  # type: ignore[operator]
            mask = np.ones(len(keys), dtype=bool)
        else:
            n_intervals = 1 << (out_bits - sel.interval_bits)  # type: ignore[operator]
            iv = evals >> np.uint64(sel.interval_bits)
            center = query_evals[sel.anchor] >> sel.interval_bits  # type: ignore[operator]
            mask = np.zeros(len(keys), dtype=bool)
            for off in (-1, 0, 1):
                mask |= iv == np.uint64((center + off) % n_intervals)
    else:
        target = sel.bin_value
        if target is None:
            target = query_evals[min(sel.query_keys)]
        mask = evals == np.uint64(target)
    if sel.query_keys:
        mask |= np.isin(keys, np.fromiter(sel.query_keys, dtype=np.uint64))
    return mask


def select(sel: Selector, h: TornadoHash) -> frozenset[int]:
    """The exact selected key set under ``h`` (always includes the queries)."""
    keys = _candidates(sel)
    evals = h.eval_batch(keys)
    q_evals = {q: h.eval(q) for q in sel.query_keys}
    mask = selection_mask(sel, keys, evals, h.spec.out_bits, q_evals)
    return frozenset(int(k) for k in keys[mask])


def selected_derived_independent(sel: Selector, h: TornadoHash) -> bool:
    """Whether the derived keys of the selected set are linearly independent."""
    from . import gf2

    chosen = np.fromiter(sorted(select(sel, h)), dtype=np.uint64)
    if len(chosen) <= 1:
        return True
    chars = h.derive_batch(chosen)
    sizes = tuple(1 << h.spec.position_bits(i) for i in range(h.spec.positions))
    keys = [gf2.GenKey.from_chars([int(v) for v in row], sizes) for row in chars]
    return gf2.is_linearly_independent(keys)


def to_json_dict(sel: Selector) -> dict:
    """JSON form: kind, parameters, query keys as hex strings."""
    out: dict = {
        "kind": sel.kind.value,
        "keys": [f"{k:#x}" for k in sorted(sel.keys)],
        "query_keys": [f"{k:#x}" for k in sorted(sel.query_keys)],
    }
    if sel.kind is SelectorKind.BIT_PREFIX:
        out["s_bits"] = sel.s_bits
        out["targets"] = sorted(sel.targets)  # type: ignore[arg-type]
        out["relative_to_query"] = sel.relative_to_query
    elif sel.kind is SelectorKind.DYADIC_INTERVAL:
        out["interval_bits"] = sel.interval_bits
        out["anchor"] = f"{sel.anchor:#x}"
    elif sel.kind is SelectorKind.BIN:
        out["bin_value"] = sel.bin_value
    return out


def from_json_dict(data: dict) -> Selector:
    kind = SelectorKind(data["kind"])
    keys = [int(k, 16) for k in data["keys"]]
    query = [int(k, 16) for k in data["query_keys"]]
    if kind is SelectorKind.FIXED_SET:
        return fixed_set(keys, query)
    if kind is SelectorKind.BIT_PREFIX:
        return bit_prefix(keys, data["s_bits"], data["targets"], query,
                          data.get("relative_to_query", False))
    if kind is SelectorKind.DYADIC_INTERVAL:
        return dyadic_interval(keys, int(data["anchor"], 16), data["interval_bits"])
    return bin_selector(keys, data.get("bin_value"), query)


def to_json(sel: Selector) -> str:
    return json.dumps(to_json_dict(sel), sort_keys=True)


def from_json(text: str) -> Selector:
    return from_json_dict(json.loads(text))
