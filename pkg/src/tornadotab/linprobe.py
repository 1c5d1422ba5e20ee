"""Linear probing simulator: tornado hashing vs. a fully-random baseline.

The reference `ProbeTable` implements textbook linear probing. The
experiment path never materializes individual insertions: the final
occupancy pattern of a linear probing table is a function of the hash
multiset alone, computable with one prefix scan, and probe/run lengths for
fresh queries only depend on that pattern. The two paths are required to
agree and are tested against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .core import TornadoHash, TornadoSpec
from .experiments import ExperimentReport, Verdict


class TableFullError(RuntimeError):
    pass


class ProbeTable:
    """Open-addressing table with linear probing, no deletions."""

    __slots__ = ("m", "cells", "count")

    def __init__(self, m: int):
        if m <= 0 or m & (m - 1):
            raise ValueError("capacity must be a power of two")
        self.m = m
        self.cells: list = [None] * m
        self.count = 0

    def insert(self, key, h: int) -> int:
        """Place key at the first free cell from h onward; returns probes."""
        if self.count >= self.m:
            raise TableFullError("table is full")
        i = h & (self.m - 1)
        probes = 1
        while self.cells[i] is not None:
            i = (i + 1) & (self.m - 1)
            probes += 1
        self.cells[i] = key
        self.count += 1
        return probes

    def lookup(self, key, h: int) -> tuple[bool, int]:
        """Scan from h until the key or an empty cell; (found, probes)."""
        i = h & (self.m - 1)
        probes = 1
        while self.cells[i] is not None:
            if self.cells[i] == key:
                return True, probes
            i = (i + 1) & (self.m - 1)
            probes += 1
        return False, probes

    def run_length(self, h: int) -> int:
        """Length of the maximal occupied interval containing cell h (0 if empty)."""
        i = h & (self.m - 1)
        if self.cells[i] is None:
            return 0
        if self.count >= self.m:
            return self.m
        lo = i
        while self.cells[(lo - 1) & (self.m - 1)] is not None:
            lo = (lo - 1) & (self.m - 1)
        length = 0
        j = lo
        while self.cells[j] is not None:
            length += 1
            j = (j + 1) & (self.m - 1)
        return length

    def occupancy(self) -> np.ndarray:
        return np.array([c is not None for c in self.cells], dtype=bool)


def occupancy_from_hashes(m: int, hashes: np.ndarray) -> np.ndarray:
    """Final occupancy of linear probing with the given hash multiset.

    Cell j ends up occupied iff some cyclic window ending at j holds at
    least as many hashes as cells, which reduces to a running-minimum scan
    over the doubled table (no run can wrap twice since the table is not
    full).
    """
    if len(hashes) >= m:
        raise TableFullError("table would be full")
    counts = np.bincount(np.asarray(hashes, dtype=np.int64), minlength=m)
    cc = np.concatenate([counts, counts])
    b = np.cumsum(cc - 1)
    runmin = np.minimum.accumulate(np.concatenate(([0], b[:-1])))
    return ((b - runmin) >= 0)[m:]


def _empty_positions(occ: np.ndarray) -> np.ndarray:
    empt = np.flatnonzero(~occ)
    if len(empt) == 0:
        raise TableFullError("no empty cells")
    return empt


def fresh_probe_lengths(occ: np.ndarray, hashes: np.ndarray) -> np.ndarray:
    """Probes needed to insert fresh keys at the given hash cells (occupancy
    holds only previously inserted keys): distance to the next empty cell + 1."""
    m = len(occ)
    empt = _empty_positions(occ)
    e2 = np.concatenate([empt, empt + m])
    idx = np.searchsorted(e2, np.asarray(hashes, dtype=np.int64))
    return e2[idx] - hashes + 1


def run_lengths_at(occ: np.ndarray, hashes: np.ndarray) -> np.ndarray:
    """Run length of the occupied interval containing each hash cell."""
    m = len(occ)
    hashes = np.asarray(hashes, dtype=np.int64)
    empt = _empty_positions(occ)
    nxt = np.concatenate([empt, empt + m])
    prv = np.concatenate([empt - m, empt])
    next_e = nxt[np.searchsorted(nxt, hashes)]
    prev_e = prv[np.searchsorted(prv, hashes, side="right") - 1]
    out = next_e - prev_e - 1
    out[~occ[hashes]] = 0
    return out


def total_displacement(m: int, hashes) -> int:
    """Sum of (probes - 1) over an insertion sequence; order-invariant."""
    table = ProbeTable(m)
    return sum(table.insert(i, h) - 1 for i, h in enumerate(hashes))


@dataclass
class ProbeStats:
    """Per-query samples from one hash source, one row per trial."""

    source: str
    probe_lengths: np.ndarray
    run_lengths: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.probe_lengths.mean())

    @property
    def variance(self) -> float:
        return float(self.probe_lengths.var())

    def cdf(self, upto: int | None = None) -> np.ndarray:
        """Empirical CDF over probe lengths 0..upto (pooled across trials)."""
        flat = self.probe_lengths.ravel()
        hi = int(flat.max()) if upto is None else upto
        counts = np.bincount(np.minimum(flat, hi), minlength=hi + 1)
        return np.cumsum(counts) / flat.size


def dkw_tolerance(n_a: int, n_b: int, confidence: float = 0.99) -> float:
    """Two-sample DKW-style uniform CDF tolerance at the given confidence."""
    alpha = 1.0 - confidence
    return math.sqrt(math.log(4.0 / alpha) / (2 * n_a)) + math.sqrt(
        math.log(4.0 / alpha) / (2 * n_b)
    )


@dataclass
class ProbeComparison:
    tornado: ProbeStats
    baseline: ProbeStats
    baseline_star: ProbeStats
    knuth_ref: float
    n: int
    n_star: int
    m: int
    trials: int
    seed: int
    dominance_margin: float
    dominance_tolerance: float
    dominates: bool
    params: dict = field(default_factory=dict)

    def to_reports(self) -> list[ExperimentReport]:
        common = dict(self.params, n=self.n, m=self.m, n_star=self.n_star)
        mean_rep = ExperimentReport(
            name="probing_mean_probe_length",
            estimate=self.tornado.mean,
            stderr=0.0,
            bound=self.knuth_ref,
            trials=self.trials,
            seed=self.seed,
            params=dict(common, baseline_mean=self.baseline.mean),
            verdict=Verdict.INFORMATIONAL,
        )
        dom_rep = ExperimentReport(
            name="probing_cdf_dominance",
            estimate=max(0.0, -self.dominance_margin),
            stderr=0.0,
            bound=self.dominance_tolerance,
            trials=self.trials,
            seed=self.seed,
            params=dict(common, margin=self.dominance_margin),
            verdict=Verdict.WITHIN_BOUND if self.dominates else Verdict.VIOLATION,
        )
        return [mean_rep, dom_rep]


def probe_experiment(
    spec: TornadoSpec,
    n: int,
    m: int,
    queries: int,
    trials: int,
    seed: int,
    star_delta: float = 0.01,
) -> ProbeComparison:
    """Paired probe-length measurement: tornado vs. seeded-mixer baseline.

    Each trial inserts a fresh random key set of size n under both hash
    sources and measures insertion probe counts for fresh query keys. A
    third table hashes n_star = (1 + 15*sqrt(log(1/star_delta)/sigma))*n
    keys with the baseline mixer; the tornado probe-length CDF is compared
    against it for stochastic dominance within a DKW-style tolerance.
    """
    if m <= 0 or m & (m - 1):
        raise ValueError("m must be a power of two")
    if (1 << spec.out_bits) != m:
        raise ValueError("probing requires out_bits = log2(m)")
    if n / m > 4 / 5:
        raise ValueError("load factor above 4/5 is outside the supported regime")
    if queries < 1 or trials < 1:
        raise ValueError("need at least one query and one trial")
    n_star = math.ceil((1.0 + 15.0 * math.sqrt(math.log(1.0 / star_delta) / spec.sigma)) * n)
    if n_star >= m:
        raise ValueError(
            f"n_star {n_star} does not fit the table; lower the load or raise sigma"
        )
    shapes = (trials, queries)
    stats = {
        "tornado": ProbeStats("tornado", np.zeros(shapes, np.int64), np.zeros(shapes, np.int64)),
        "random": ProbeStats("random", np.zeros(shapes, np.int64), np.zeros(shapes, np.int64)),
        "random_star": ProbeStats(
            "random_star", np.zeros(shapes, np.int64), np.zeros(shapes, np.int64)
        ),
    }
    for t in range(trials):
        ts = rng.trial_seed(seed, t)
        pool = rng.sample_distinct_keys(ts, n_star + queries, spec.key_bits)
        s_star, qs = pool[:n_star], pool[n_star:]
        s = s_star[:n]
        h = TornadoHash.build(spec, ts)
        for name, hashes, qhashes in (
            ("tornado", h.eval_batch(s), h.eval_batch(qs)),
            ("random", rng.mixer_hash_vec(ts, s, spec.out_bits),
             rng.mixer_hash_vec(ts, qs, spec.out_bits)),
            ("random_star", rng.mixer_hash_vec(ts, s_star, spec.out_bits),
             rng.mixer_hash_vec(ts, qs, spec.out_bits)),
        ):
            occ = occupancy_from_hashes(m, hashes)
            st = stats[name]
            st.probe_lengths[t] = fresh_probe_lengths(occ, qhashes.astype(np.int64))
            st.run_lengths[t] = run_lengths_at(occ, qhashes.astype(np.int64))
    eps = 1.0 - n / m
    knuth_ref = (1.0 + 1.0 / eps**2) / 2.0
    tor, base, star = stats["tornado"], stats["random"], stats["random_star"]
    hi = int(max(tor.probe_lengths.max(), star.probe_lengths.max()))
    margin = float((tor.cdf(hi) - star.cdf(hi)).min())
    tol = dkw_tolerance(tor.probe_lengths.size, star.probe_lengths.size)
    return ProbeComparison(
        tornado=tor,
        baseline=base,
        baseline_star=star,
        knuth_ref=knuth_ref,
        n=n,
        n_star=n_star,
        m=m,
        trials=trials,
        seed=seed,
        dominance_margin=margin,
        dominance_tolerance=tol,
        dominates=margin >= -tol,
        params={"spec": spec.spec_string(), "queries": queries, "star_delta": star_delta},
    )


def histograms_csv(comparison: ProbeComparison) -> str:
    """Per-trial probe-length histograms: source, seed, probe_length, count."""
    lines = ["source,seed,probe_length,count"]
    for st in (comparison.tornado, comparison.baseline, comparison.baseline_star):
        for t in range(comparison.trials):
            ts = rng.trial_seed(comparison.seed, t)
            row = st.probe_lengths[t]
            for length in np.unique(row):
                lines.append(f"{st.source},{ts:#x},{length},{int((row == length).sum())}")
    return "\n".join(lines) + "\n"
