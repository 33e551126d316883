"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The statistical criteria run a few hundred full tests each and take a few
minutes on a single core. They carry the ``slow``
marker; ``pytest -m "not slow"`` skips them.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from cmiknn.citest import ci_test, null_distribution
from cmiknn.core import EULER_GAMMA, CITestConfig, digamma, rank_transform
from cmiknn.estimator import cmi_knn
from cmiknn.metrics import ks_uniform, rejection_rate
from cmiknn.neighbors import NeighborIndex, scan_count, scan_kth_distance, scan_neighborhood
from cmiknn.permutation import local_permutation
from cmiknn.synthdata import ModelSpec, generate


def realization(family, n, r, dependent=False, **kw):
    """Data of realization ``r``; the test seed is derived from the same number."""
    return generate(ModelSpec(family, n, dependent=dependent, seed=10_000 + r, **kw))


def test_01_neighbor_oracle_equivalence(report):
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(2, 201)), int(rng.integers(1, 7))
        pts = np.argsort(rng.random((n, d)), axis=0).astype(float) + 1
        idx = NeighborIndex(pts)
        k = int(rng.integers(1, n))
        ex, inc = idx.kth_distances(k), idx.kth_distances(k, include_self=True)
        radii = ex.copy()
        counts = idx.counts_within(np.maximum(radii, 0.5))
        offsets, ids = idx.neighborhoods(inc)
        for i in range(n):
            mismatches += ex[i] != scan_kth_distance(pts, i, k)
            mismatches += idx.kth_distance_excluding_self(i, k) != ex[i]
            mismatches += inc[i] != scan_kth_distance(pts, i, k, include_self=True)
            mismatches += counts[i] != scan_count(pts, pts[i], max(radii[i], 0.5))
            mismatches += idx.count_strictly_within(pts[i], radii[i] + 0.5) != scan_count(pts, pts[i], radii[i] + 0.5)
            mismatches += not np.array_equal(np.sort(ids[offsets[i] : offsets[i + 1]]),
                                             scan_neighborhood(pts, i, inc[i]))
    elapsed = time.perf_counter() - t0
    report(1, "neighbor queries equal linear scan", mismatches == 0 and elapsed < 10,
           f"200 instances, {mismatches} mismatches, {elapsed:.1f} s")


def test_02_digamma_accuracy(report):
    ks = np.arange(1, 10_001)
    # extended-precision harmonic numbers H_{k-1}
    h = np.concatenate([[0], np.cumsum(1 / np.arange(1, 10_000, dtype=np.longdouble))])
    oracle = (h - np.longdouble(EULER_GAMMA)).astype(np.float64)
    t0 = time.perf_counter()
    got = np.array([digamma(int(k)) for k in ks])
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(got - oracle)))
    report(2, "digamma vs harmonic sum, k=1..1e4", err <= 1e-10 and elapsed < 1,
           f"max error {err:.1e}, {elapsed:.2f} s")


def test_03_gaussian_mi_recovery(report):
    t0 = time.perf_counter()
    vals = []
    for s in range(50):
        rng = np.random.default_rng(s)
        u, v = rng.standard_normal((2, 1000))
        x, y = rank_transform(u, 0), rank_transform(0.6 * u + 0.8 * v, 0)
        vals.append(cmi_knn(x, y, None, 200).value)
    elapsed = time.perf_counter() - t0
    truth = -0.5 * math.log(1 - 0.36)
    mean = float(np.mean(vals))
    report(3, "MI of bivariate normal rho=0.6", abs(mean - truth) <= 0.05 and elapsed < 30,
           f"mean {mean:.4f} vs {truth:.4f}, {elapsed:.1f} s")


def test_04_hand_counted_fixtures(report):
    r = [1.0, 2.0, 3.0, 4.0]
    a = cmi_knn(r, r, r, 1).value
    b = cmi_knn(r, [1.0, 3.0, 2.0, 4.0], None, 1).value
    err = max(abs(a - 0.0), abs(b - 5 / 6))
    report(4, "four-point fixtures 0 and 5/6", err <= 1e-12, f"max error {err:.1e}")


@pytest.mark.slow
def test_05_calibration_under_h0(report):
    t0 = time.perf_counter()
    cfg = CITestConfig(k_cmi=100, k_perm=5, B=200)
    p = []
    for r in range(200):
        x, y, z = realization("postnonlinear", 500, r)
        p.append(ci_test(x, y, z, replace(cfg, seed=r)).p_value)
    fpr, ks = rejection_rate(p, 0.05), ks_uniform(p)
    report(5, "post-nonlinear H0 calibration", 0.02 <= fpr <= 0.09 and ks < 0.10,
           f"FPR {fpr:.3f}, KS {ks:.3f}, {time.perf_counter() - t0:.0f} s")


@pytest.mark.slow
def test_06_full_permutation_bias(report):
    t0 = time.perf_counter()
    n, B = 1000, 100
    means = {5: [], n: []}
    pvals = {5: [], n: []}
    for r in range(100):
        x, y, z = realization("gaussian", n, r, d_z=1)
        for k_perm in (5, n):
            res = ci_test(x, y, z, CITestConfig(k_cmi=200, k_perm=k_perm, B=B, seed=r))
            means[k_perm].append(res.null_values.mean())
            pvals[k_perm].append(res.p_value)
    m_local, m_full = np.mean(means[5]), np.mean(means[n])
    f_local, f_full = rejection_rate(pvals[5], 0.05), rejection_rate(pvals[n], 0.05)
    report(6, "full permutation null is shifted left", m_full < m_local and f_full > f_local,
           f"null mean {m_full:.4f} (full) vs {m_local:.4f} (k_perm=5), "
           f"FPR {f_full:.2f} vs {f_local:.2f}, {time.perf_counter() - t0:.0f} s")


@pytest.mark.slow
def test_07_power_under_h1(report):
    t0 = time.perf_counter()
    p = []
    for r in range(100):
        x, y, z = realization("postnonlinear", 1000, r, dependent=True, c=0.5)
        p.append(ci_test(x, y, z, CITestConfig(k_cmi=200, k_perm=5, B=200, seed=r)).p_value)
    tpr = rejection_rate(p, 0.05)
    report(7, "post-nonlinear H1 power at c=0.5", tpr >= 0.90,
           f"TPR {tpr:.2f}, {time.perf_counter() - t0:.0f} s")


@pytest.mark.slow
def test_08_multiplicative_calibration(report):
    t0 = time.perf_counter()
    p = []
    for r in range(100):
        x, y, z = realization("postnonlinear_mult", 1000, r, d_z=2)
        p.append(ci_test(x, y, z, CITestConfig(k_perm=5, B=200, seed=r)).p_value)
    fpr = rejection_rate(p, 0.05)
    report(8, "multiplicative H0 calibration, D_Z=2", fpr <= 0.10,
           f"FPR {fpr:.2f}, {time.perf_counter() - t0:.0f} s")


def test_09_permutation_invariants(report):
    rng = np.random.default_rng(99)
    outside = not_identity = not_permutation = 0
    for t in range(1000):
        n, d = int(rng.integers(2, 60)), int(rng.integers(1, 4))
        z = np.argsort(rng.random((n, d)), axis=0).astype(float)
        k = int(rng.integers(1, n + 1))
        pi = local_permutation(z, k, t).pi
        radius = np.array([scan_kth_distance(z, i, k, include_self=True) for i in range(n)])
        outside += int(np.sum(np.max(np.abs(z[pi] - z), axis=1) > radius))
        not_identity += not np.array_equal(local_permutation(z, 1, t).pi, np.arange(n))
        not_permutation += local_permutation(z, n, t).duplicate_count != 0
    ok = outside == not_identity == not_permutation == 0
    report(9, "local permutation invariants", ok,
           f"1000 instances: {outside} outside, {not_identity} non-identity, {not_permutation} with duplicates")


def test_10_determinism_across_workers(report):
    blobs = []
    for seed in range(3):
        x, y, z = realization("postnonlinear", 400, seed, d_z=2)
        runs = [ci_test(x, y, z, CITestConfig(k_perm=5, B=64, seed=seed, workers=w)) for w in (1, 4, 8)]
        blobs.append({(r.null_values.tobytes(), repr(r.statistic), repr(r.p_value)) for r in runs})
    nd = [null_distribution(x, y, z, CITestConfig(B=32, seed=1, workers=w)).values.tobytes() for w in (1, 4, 8)]
    ok = all(len(b) == 1 for b in blobs) and len(set(nd)) == 1
    report(10, "identical results for workers 1, 4, 8", ok, "3 data sets, statistic, p-value and null bytes")
