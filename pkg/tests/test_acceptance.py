"""Acceptance suite: every criterion at its stated scale and tolerance.

Each test prints one PASS/FAIL line (visible with ``pytest -s``). The
master seed is fixed so the whole suite is deterministic; Monte Carlo
tolerances are the stated bounds plus their stated sigma allowances.
"""

import os
from fractions import Fraction

import numpy as np

from tornadotab import bench, linprobe, rng, selectors
from tornadotab import experiments as ex
from tornadotab.core import TornadoHash, TornadoSpec, Variant, eval_folded_batch
from tornadotab.gf2 import (
    find_zero_subset,
    genkey_from_key,
    is_linearly_independent,
    is_zero_set,
)

MASTER_SEED = 2026
WORKERS = min(2, os.cpu_count() or 1)


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{name}: {detail}"


def test_01_twist_bijectivity():
    spec = TornadoSpec(8, 2, 0, 16, Variant.TORNADO)
    keys = np.arange(65536, dtype=np.uint64)
    bad = 0
    for seed in range(100):
        der = TornadoHash.build(spec, rng.trial_seed(MASTER_SEED, seed)).derive_batch(keys)
        packed = der[:, 0].astype(np.uint64) | (der[:, 1].astype(np.uint64) << np.uint64(8))
        bad += len(np.unique(packed)) != 65536
    _report("01-twist-bijectivity", bad == 0, f"seeds with collisions: {bad}/100")


def test_02_folded_equals_reference():
    mismatches = 0
    for spec in (TornadoSpec(8, 4, 3, 32, Variant.TORNADO),
                 TornadoSpec(8, 4, 4, 24, Variant.TORNADO)):
        for s in range(10):
            h = TornadoHash.build(spec, rng.trial_seed(MASTER_SEED, s))
            keys = rng.raw_key_stream(rng.trial_seed(MASTER_SEED ^ 0xF01D, s), 100000, 32)
            mismatches += int((h.eval_batch(keys) != eval_folded_batch(h, keys)).sum())
    _report("02-folded-equals-reference", mismatches == 0,
            f"mismatches: {mismatches} over 2 profiles x 10 seeds x 1e5 keys")


def test_03_exact_uniformity():
    indep = [genkey_from_key(x, 2, 2) for x in (0b0000, 0b0001, 0b0100)]
    zero4 = [genkey_from_key(x, 2, 2) for x in (0b0000, 0b0001, 0b0100, 0b0101)]
    ok_indep = ex.exact_uniformity_check(2, 2, 2, indep)
    ok_dep = not ex.exact_uniformity_check(2, 2, 2, zero4)
    _report("03-exact-uniformity", ok_indep and ok_dep,
            f"independent equidistributed: {ok_indep}, zero-set fails: {ok_dep}")


def test_04_fixed_set_dependence_bound():
    spec = TornadoSpec(8, 2, 4, 8, Variant.TORNADO)
    keys = [int(k) for k in rng.sample_distinct_keys(rng.mix64(MASTER_SEED), 128, 16)]
    rep = ex.measure_dependence(selectors.fixed_set(keys), spec, 100000, MASTER_SEED,
                                workers=WORKERS)
    assert rep.bound <= 3.25e-3
    ok = rep.estimate <= rep.bound + 4 * rep.stderr
    _report("04-fixed-set-dependence", ok,
            f"estimate={rep.estimate:.2e} bound={rep.bound:.4e} (1e5 seeds)")


def test_05_survival_one_round():
    spec = TornadoSpec(4, 2, 1, 1, Variant.SIMPLE_TORNADO)
    zs = [(2 << 4) | 0, (2 << 4) | 1, (7 << 4) | 0, (7 << 4) | 1]
    rep = ex.survival_one_round(spec, zs, 1000000, MASTER_SEED)
    target = 0.1796875
    ok_mc = abs(rep.estimate - target) <= 3 * rep.stderr
    exact = ex.survival_one_round_exact(2, 2, [(2 << 2) | 0, (2 << 2) | 1,
                                               (3 << 2) | 0, (3 << 2) | 1])
    ok_exact = exact == Fraction(5, 8)
    _report("05-survival-one-round", ok_mc and ok_exact,
            f"estimate={rep.estimate:.6f} target={target} (3sig={3*rep.stderr:.2e}); "
            f"exact sigma=4: {exact}")


def test_06_survival_two_rounds():
    spec = TornadoSpec(4, 2, 2, 1, Variant.SIMPLE_TORNADO)
    zs = [(2 << 4) | 0, (2 << 4) | 1, (7 << 4) | 0, (7 << 4) | 1]
    rep = ex.survival_d_rounds(spec, zs, 1000000, MASTER_SEED)
    target = 0.1796875**2
    ok = abs(rep.estimate - target) <= 3 * rep.stderr
    _report("06-survival-two-rounds", ok,
            f"estimate={rep.estimate:.6f} target={target:.6f} (3sig={3*rep.stderr:.2e})")


def test_07_lower_bound_visibility():
    spec = TornadoSpec(4, 2, 3, 8, Variant.TORNADO)
    sel = selectors.hard_instance(4)
    rep = ex.measure_dependence(sel, spec, 1000000, MASTER_SEED, workers=WORKERS)
    floor = 1e-2 * (3 / 16) ** (spec.d - 2)
    ok = rep.estimate > 0 and rep.estimate >= floor
    _report("07-lower-bound-visibility", ok,
            f"estimate={rep.estimate:.5f} floor={floor:.5f} (1e6 trials, informational tier)")


def test_08_chaining_tail():
    spec = TornadoSpec(8, 2, 4, 8, Variant.TORNADO)
    reports = ex.chaining_tail(spec, 256, [4, 8], 100000, MASTER_SEED, workers=WORKERS)
    details = []
    ok = True
    for rep in reports:
        this = rep.estimate <= rep.bound + 4 * rep.stderr
        ok &= this
        details.append(f"k={rep.params['k']}: est={rep.estimate:.5f} bound={rep.bound:.5f}")
    _report("08-chaining-tail", ok, "; ".join(details))


def test_09_chernoff_tail():
    spec = TornadoSpec(8, 2, 4, 6, Variant.TORNADO)
    keys = [int(k) for k in rng.sample_distinct_keys(rng.mix64(MASTER_SEED), 4096, 16)]
    sel = selectors.bin_selector(keys, 0)
    assert selectors.mu(sel, 6) == 64.0
    rep = ex.chernoff_tail(sel, spec, 0.5, 100000, MASTER_SEED, workers=WORKERS)
    ok = rep.estimate <= rep.bound + 4 * rep.stderr
    _report("09-chernoff-tail", ok,
            f"estimate={rep.estimate:.2e} bound={rep.bound:.4e} mu=64 delta=0.5")


def test_10_linear_probing():
    spec = TornadoSpec(16, 2, 4, 16, Variant.TORNADO)
    res = linprobe.probe_experiment(spec, n=3 * (1 << 14), m=1 << 16, queries=1 << 10,
                                    trials=64, seed=MASTER_SEED, star_delta=0.01)
    knuth_ok = abs(res.tornado.mean - 8.5) <= 0.10 * 8.5
    base_ok = abs(res.tornado.mean - res.baseline.mean) <= 0.03 * res.baseline.mean
    ok = knuth_ok and base_ok and res.dominates
    _report("10-linear-probing", ok,
            f"tornado={res.tornado.mean:.3f} baseline={res.baseline.mean:.3f} knuth=8.5 "
            f"dominance margin={res.dominance_margin:.4f} tol={res.dominance_tolerance:.4f}")


def _brute_force_dependent(bits: list[int]) -> bool:
    acc = 0
    for i in range(1, 1 << len(bits)):
        acc ^= bits[(i & -i).bit_length() - 1]  # gray-code walk
        if acc == 0:
            return True
    return False


def test_11_gf2_oracle_equivalence():
    rs = np.random.default_rng(MASTER_SEED)
    mismatches = 0
    bad_witness = 0
    for _ in range(10000):
        b = int(rs.integers(1, 5))
        cb = int(rs.integers(1, 4))
        n = int(rs.integers(1, 13))
        ks = [genkey_from_key(int(rs.integers(0, 1 << (b * cb))), b, cb) for _ in range(n)]
        indep = is_linearly_independent(ks)
        brute = not _brute_force_dependent([k.bits for k in ks])
        mismatches += indep != brute
        if not indep:
            bad_witness += not is_zero_set(find_zero_subset(ks))
    _report("11-gf2-oracle", mismatches == 0 and bad_witness == 0,
            f"verdict mismatches: {mismatches}/10000, bad witnesses: {bad_witness}")


def test_12_benchmark_parity_informational():
    tor = bench.throughput("tornado32-folded", 100000, reps=9, seed=MASTER_SEED)
    tor2 = bench.throughput("tornado32-folded", 100000, reps=9, seed=MASTER_SEED)
    poly = bench.throughput("poly2-mersenne", 100000, reps=9, seed=MASTER_SEED)
    deterministic = tor.checksum == tor2.checksum
    ratio = tor.ns_per_key / poly.ns_per_key
    within_2x = 0.5 <= ratio <= 2.0
    # parity is environment-dependent and informational; only determinism gates
    _report("12-benchmark-parity", deterministic,
            f"tornado={tor.ns_per_key:.0f}ns/key poly2={poly.ns_per_key:.0f}ns/key "
            f"ratio={ratio:.2f} within2x={within_2x} (informational)")
