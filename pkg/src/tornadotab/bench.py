"""Throughput measurement against a degree-2 Mersenne-prime polynomial.

Keys are pre-generated into a buffer so the timed loop measures hashing
only, every scheme folds its outputs into an XOR checksum to defeat
dead-code elimination, and the median of the repetition timings is
reported. Numbers are machine-dependent and informational.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from . import rng
from .core import TornadoHash, TornadoSpec, Variant, fold_tables

MERSENNE_EXP = 89
MERSENNE_P = (1 << MERSENNE_EXP) - 1


def mersenne_reduce(y: int) -> int:
    """y mod 2^89-1 via shift-add folding."""
    while y >> MERSENNE_EXP:
        y = (y & MERSENNE_P) + (y >> MERSENNE_EXP)
    return 0 if y == MERSENNE_P else y


class Poly2Mersenne:
    """Degree-2 polynomial over the 2^89-1 prime field, truncated output."""

    __slots__ = ("a", "b", "c", "out_bits", "_mask")

    def __init__(self, seed: int, out_bits: int = 32):
        coeffs = []
        ctr = 0
        while len(coeffs) < 3:
            lo = rng.field_value(seed, 2, 0, 0, ctr)
            hi = rng.field_value(seed, 2, 0, 1, ctr)
            ctr += 1
            cand = (lo | (hi << 64)) & MERSENNE_P
            if cand < MERSENNE_P:
                coeffs.append(cand)
        self.a, self.b, self.c = coeffs
        self.out_bits = out_bits
        self._mask = (1 << out_bits) - 1

    def hash(self, x: int) -> int:
        return mersenne_reduce(self.a * x * x + self.b * x + self.c) & self._mask


def poly2_mersenne(seed: int, x: int, out_bits: int = 32) -> int:
    return Poly2Mersenne(seed, out_bits).hash(x)


@dataclass(frozen=True)
class BenchResult:
    scheme: str
    n_keys: int
    total_ns: int
    ns_per_key: float
    checksum: int
    reps: int

    def csv_row(self) -> str:
        return f"{self.scheme},{self.n_keys},{self.ns_per_key:.2f},{self.checksum:#x}"


BENCH_CSV_HEADER = "scheme,n_keys,ns_per_key,checksum"

TORNADO32_SPEC = TornadoSpec(8, 4, 4, 24, Variant.TORNADO)
TORNADO_MIX64_SPEC = TornadoSpec(8, 8, 5, 64, Variant.TORNADO_MIX, psi_bits=16)
SIMPLE_TAB_SPEC = TornadoSpec(8, 4, 0, 32, Variant.SIMPLE_TABULATION)

SCHEMES = ("tornado32-folded", "tornado-mix64-folded", "poly2-mersenne", "simple-tabulation")


def _make_hasher(scheme: str, seed: int):
    """Returns (hash callable, key bit width)."""
    if scheme == "tornado32-folded":
        h = TornadoHash.build(TORNADO32_SPEC, seed)
        t0, t1, t2, t3, t4, t5, t6, t7 = fold_tables(h).tables

        def fn(x: int) -> int:  # unrolled c=4, d=4 shift/xor sequence
            acc = t0[x & 255] ^ t1[(x >> 8) & 255] ^ t2[(x >> 16) & 255] ^ (x >> 24)
            acc = (acc >> 8) ^ t3[acc & 255]
            acc = (acc >> 8) ^ t4[acc & 255]
            acc = (acc >> 8) ^ t5[acc & 255]
            acc = (acc >> 8) ^ t6[acc & 255]
            return (acc >> 8) ^ t7[acc & 255]

        return fn, 32
    if scheme == "tornado-mix64-folded":
        h = TornadoHash.build(TORNADO_MIX64_SPEC, seed)
        folded = fold_tables(h)
        tabs, psi = folded.tables, folded.psi_tables
        c, d = TORNADO_MIX64_SPEC.c, TORNADO_MIX64_SPEC.d

        def fn(x: int, _tabs=tabs, _psi=psi, _c=c, _e=c + d - 2) -> int:
            acc = 0
            for i in range(_c - 1):
                acc ^= _tabs[i][x & 255]
                x >>= 8
            acc ^= x
            for i in range(_c - 1, _e):
                ch = acc & 255
                acc >>= 8
                acc ^= _tabs[i][ch]
            b1 = acc & 0xFFFF
            acc >>= 16
            b2 = acc & 0xFFFF
            return (acc >> 16) ^ _psi[0][b1] ^ _psi[1][b2]

        return fn, 64
    if scheme == "poly2-mersenne":
        poly = Poly2Mersenne(seed, 32)
        return poly.hash, 32
    if scheme == "simple-tabulation":
        h = TornadoHash.build(SIMPLE_TAB_SPEC, seed)
        tabs = [[int(v) for v in col] for col in h.top_table]

        def fn(x: int, _tabs=tabs) -> int:
            return (
                _tabs[0][x & 255]
                ^ _tabs[1][(x >> 8) & 255]
                ^ _tabs[2][(x >> 16) & 255]
                ^ _tabs[3][x >> 24]
            )

        return fn, 32
    raise ValueError(f"unknown scheme {scheme!r}")


def throughput(scheme: str, n_keys: int, reps: int = 9, seed: int = 1) -> BenchResult:
    """Median-of-reps timing over a pre-generated key buffer."""
    if n_keys <= 0:
        raise ValueError("n_keys must be positive")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    fn, key_bits = _make_hasher(scheme, seed)
    keys = [int(v) for v in rng.raw_key_stream(seed, n_keys, key_bits)]
    checksums = set()
    timings = []
    for _ in range(reps):
        acc = 0
        t0 = time.perf_counter_ns()
        for x in keys:
            acc ^= fn(x)
        timings.append(time.perf_counter_ns() - t0)
        checksums.add(acc)
    if len(checksums) != 1:
        raise RuntimeError("checksum varied across repetitions")
    total = int(statistics.median(timings))
    return BenchResult(
        scheme=scheme,
        n_keys=n_keys,
        total_ns=total,
        ns_per_key=total / n_keys,
        checksum=checksums.pop(),
        reps=reps,
    )
