"""Repeated-realization benchmarks over parameter grids.

Each realization draws one null and one alternative data set from a
:class:`~cmiknn.synthdata.ModelSpec` and runs a full test on both. Data and
test seeds depend only on the master seed, the realization number and the
ground truth, so every grid point sees the same random draws where shapes
allow it, and the output does not depend on the number of workers.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .citest import ci_test
from .core import CITestConfig
from .metrics import bootstrap_se, rejection_rate, summarize
from .synthdata import ModelSpec, generate

__all__ = ["SWEEP_KEYS", "parse_sweep", "realization_seeds", "run_benchmark"]

SWEEP_KEYS = {
    "k_cmi": "cfg",
    "k_perm": "cfg",
    "B": "cfg",
    "n": "model",
    "d_z": "model",
    "c": "model",
    "lam": "model",
}
_ALIASES = {"dz": "d_z", "lambda": "lam", "b": "B", "k-cmi": "k_cmi", "k-perm": "k_perm"}

CSV_FIELDS = [
    "family", "n", "d_z", "c", "lam", "k_cmi", "k_perm", "B", "realization",
    "ground_truth", "data_seed", "test_seed", "statistic", "p_value", "runtime_s",
]


def parse_sweep(items) -> dict:
    """Turn ``["k_perm=3,5,10", "n=500,1000"]`` into ``{"k_perm": [3, 5, 10], ...}``.

    ``k_cmi`` also accepts ``auto`` (the rule of thumb).
    """
    sweep = {}
    for item in items or ():
        key, sep, values = item.partition("=")
        key = _ALIASES.get(key.strip(), key.strip())
        if not sep or key not in SWEEP_KEYS:
            raise ValueError(f"bad sweep {item!r}; keys: {', '.join(SWEEP_KEYS)}")
        parsed = []
        for v in values.split(","):
            v = v.strip()
            if key == "k_cmi" and v == "auto":
                parsed.append(None)
            elif key in ("c", "lam"):
                parsed.append(float(v))
            else:
                parsed.append(int(v))
        if not parsed:
            raise ValueError(f"sweep {key} has no values")
        sweep[key] = parsed
    return sweep


def realization_seeds(master_seed: int, r: int, dependent: bool) -> tuple[int, int]:
    """(data seed, test seed) of realization ``r``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(r, int(dependent)))
    data_seed, test_seed = ss.generate_state(2, np.uint64)
    return int(data_seed), int(test_seed)


def _grid(sweep):
    keys = list(sweep)
    for values in itertools.product(*(sweep[k] for k in keys)):
        yield dict(zip(keys, values))


def run_benchmark(
    model: ModelSpec,
    reps: int,
    cfg: CITestConfig,
    sweep: dict | None = None,
    master_seed: int = 0,
    workers: int = 1,
    truths=(False, True),
    alphas=(0.01, 0.05, 0.1),
):
    """Run ``reps`` realizations for every grid point of ``sweep``.

    Returns ``(rows, summaries)``: one row dict per (grid point, realization,
    ground truth) with the fields of :data:`CSV_FIELDS`, and one summary dict
    per grid point.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    tasks = []
    combos = list(_grid(sweep or {}))
    for combo in combos:
        m = replace(model, **{k: v for k, v in combo.items() if SWEEP_KEYS[k] == "model"})
        c = replace(cfg, **{k: v for k, v in combo.items() if SWEEP_KEYS[k] == "cfg"}, workers=1)
        for r in range(reps):
            for dep in truths:
                tasks.append((m, c, r, dep))

    def one(task):
        m, c, r, dep = task
        data_seed, test_seed = realization_seeds(master_seed, r, dep)
        x, y, z = generate(replace(m, dependent=dep, seed=data_seed))
        t0 = time.perf_counter()
        res = ci_test(x, y, z, replace(c, seed=test_seed))
        elapsed = time.perf_counter() - t0
        return {
            "family": m.family, "n": m.n, "d_z": m.d_z, "c": m.c, "lam": m.lam,
            "k_cmi": res.config.k_cmi, "k_perm": res.config.k_perm, "B": res.config.B,
            "realization": r, "ground_truth": "H1" if dep else "H0",
            "data_seed": data_seed, "test_seed": test_seed,
            "statistic": res.statistic, "p_value": res.p_value, "runtime_s": elapsed,
        }

    if workers == 1:
        rows = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, tasks))

    per_combo = len(tasks) // max(len(combos), 1)
    summaries = []
    for i, combo in enumerate(combos):
        chunk = rows[i * per_combo : (i + 1) * per_combo]
        h0 = [r["p_value"] for r in chunk if r["ground_truth"] == "H0"]
        h1 = [r["p_value"] for r in chunk if r["ground_truth"] == "H1"]
        s = summarize(h0, h1, [r["runtime_s"] for r in chunk], alphas).to_dict()
        if len(h0) > 1:
            s["fpr_0.05_se"] = bootstrap_se(h0, lambda p: rejection_rate(p, 0.05))[0]
        if len(h1) > 1:
            s["tpr_0.05_se"] = bootstrap_se(h1, lambda p: rejection_rate(p, 0.05))[0]
        first = chunk[0]
        params = {k: first[k] for k in ("n", "d_z", "c", "lam", "k_cmi", "k_perm", "B")}
        summaries.append({"params": {**params, **{k: v for k, v in combo.items() if k not in params}}, **s})
    return rows, summaries
