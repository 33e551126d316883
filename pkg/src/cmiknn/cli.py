"""``cmiknn`` command line: ``test`` on CSV data, ``bench`` and ``gen`` on synthetic models.

Exit codes: 0 success, 2 usage or input error, 3 too few usable rows.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bench import CSV_FIELDS, parse_sweep, run_benchmark
from .citest import ci_test
from .core import CITestConfig, ConfigError
from .estimator import rule_of_thumb_k
from .synthdata import FAMILIES, ModelSpec, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunManifest:
    command: list
    config: dict
    seeds: dict
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def _default_workers() -> int:
    env = os.environ.get("CMIKNN_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"CMIKNN_WORKERS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _cols(spec: str | None) -> list[str]:
    if not spec:
        return []
    return [c.strip() for c in spec.split(",") if c.strip()]


def _k_cmi(value: str):
    if value == "auto":
        return None
    k = int(value)
    if k < 1:
        raise argparse.ArgumentTypeError("k-cmi must be >= 1 or 'auto'")
    return k


def read_columns(path, columns, na_values=("",)):
    """Numeric matrix of the named CSV columns with incomplete rows removed.

    Returns ``(data, n_dropped)``; ``data`` has one column per requested name.
    """
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    na = set(na_values)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise UsageError(f"{path} is empty") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise UsageError(f"unknown column(s) {', '.join(missing)}; available: {', '.join(header)}")
        pos = [header.index(c) for c in columns]
        rows, dropped = [], 0
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            cells = [rec[p].strip() if p < len(rec) else "" for p in pos]
            if any(c in na for c in cells):
                dropped += 1
                continue
            try:
                vals = [float(c) for c in cells]
            except ValueError:
                raise UsageError(f"{path}:{lineno}: non-numeric value in selected columns") from None
            if not all(np.isfinite(vals)):
                dropped += 1
                continue
            rows.append(vals)
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(columns)), dropped


def _write_json(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot write {out}: {e}") from None


def cmd_test(args) -> int:
    x_cols, y_cols, z_cols = _cols(args.x), _cols(args.y), _cols(args.z)
    if not x_cols or not y_cols:
        raise UsageError("--x and --y need at least one column each")
    data, n_dropped = read_columns(args.data, x_cols + y_cols + z_cols, [""] + (args.na_value or []))
    n = data.shape[0]
    k_cmi = args.k_cmi if args.k_cmi is not None else (rule_of_thumb_k(n) if n >= 2 else 1)
    if n < k_cmi + 1 or n < 2:
        raise DataError(f"only {n} usable rows ({n_dropped} dropped); need at least {k_cmi + 1}")
    if args.k_perm > n:
        raise DataError(f"only {n} usable rows; k-perm {args.k_perm} is larger")
    workers = args.workers if args.workers is not None else _default_workers()
    cfg = CITestConfig(k_cmi=k_cmi, k_perm=args.k_perm, B=args.b, seed=args.seed,
                       noise_amp=args.noise_amp, workers=workers)
    ix, iy = len(x_cols), len(x_cols) + len(y_cols)
    z = data[:, iy:] if z_cols else None
    t0 = time.perf_counter()
    res = ci_test(data[:, :ix], data[:, ix:iy], z, cfg)
    elapsed = time.perf_counter() - t0
    q05, q50, q95 = np.quantile(res.null_values, [0.05, 0.5, 0.95])
    out = {
        "statistic_nats": res.statistic,
        "p_value": res.p_value,
        "n_used": n,
        "n_dropped": n_dropped,
        "k_cmi": res.config.k_cmi,
        "k_perm": res.config.k_perm,
        "B": res.config.B,
        "seed": res.config.seed,
        "noise_amp": res.config.noise_amp,
        "permutation": "full" if not z_cols or res.config.k_perm >= n else "local",
        "null_quantiles": {"q05": float(q05), "q50": float(q50), "q95": float(q95)},
        "data": str(args.data),
        "x": x_cols,
        "y": y_cols,
        "z": z_cols,
        "timings": {"test_s": elapsed},
    }
    _write_json(out, args.out)
    return EXIT_OK


def _model_from_args(args, dependent=False) -> ModelSpec:
    if args.model not in FAMILIES:
        raise UsageError(f"unknown model {args.model!r}; choose from {', '.join(FAMILIES)}")
    try:
        return ModelSpec(family=args.model, n=args.n, d_z=args.dz, c=args.c, lam=args.lam,
                         dependent=dependent, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_gen(args) -> int:
    spec = _model_from_args(args, dependent=args.dependent)
    try:
        x, y, z = generate(spec)
    except ValueError as e:
        raise UsageError(str(e)) from None
    header = ["x0", "y0"] + [f"z{j}" for j in range(z.shape[1])]
    table = np.hstack([x, y, z])
    out = Path(args.out)
    try:
        with out.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            w.writerows([repr(float(v)) for v in row] for row in table)
        meta = RunManifest(command=sys.argv[1:] if args.argv is None else args.argv,
                           config=spec.to_dict(), seeds={"data_seed": spec.seed},
                           outputs={"csv": str(out)})
        Path(str(out) + ".json").write_text(json.dumps(asdict(meta), indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot write {out}: {e}") from None
    return EXIT_OK


def cmd_bench(args) -> int:
    model = _model_from_args(args)
    try:
        sweep = parse_sweep(args.sweep)
    except ValueError as e:
        raise UsageError(str(e)) from None
    workers = args.workers if args.workers is not None else _default_workers()
    cfg = CITestConfig(k_cmi=args.k_cmi, k_perm=args.k_perm, B=args.b, noise_amp=args.noise_amp)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise UsageError(f"cannot create {out_dir}: {e}") from None
    t0 = time.perf_counter()
    try:
        rows, summaries = run_benchmark(model, args.reps, cfg, sweep, master_seed=args.seed, workers=workers)
    except ConfigError as e:
        raise DataError(str(e)) from None
    elapsed = time.perf_counter() - t0
    csv_path, json_path = out_dir / "bench.csv", out_dir / "summary.json"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\r\n")
        w.writeheader()
        w.writerows(rows)
    manifest = RunManifest(
        command=sys.argv[1:] if args.argv is None else args.argv,
        config={"model": model.to_dict(), "test": cfg.to_dict(), "reps": args.reps,
                "sweep": sweep},
        seeds={"master_seed": args.seed},
        outputs={"csv": str(csv_path), "summary": str(json_path)},
        timings={"total_s": elapsed},
    )
    _write_json({"manifest": asdict(manifest), "summaries": summaries}, json_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmiknn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test X _||_ Y | Z on columns of a CSV file")
    t.add_argument("--data", required=True, help="CSV file with a header row")
    t.add_argument("--x", required=True, help="comma-separated column names")
    t.add_argument("--y", required=True, help="comma-separated column names")
    t.add_argument("--z", default="", help="comma-separated column names (empty: unconditional)")
    t.add_argument("--k-cmi", type=_k_cmi, default=None, metavar="N|auto")
    t.add_argument("--k-perm", type=int, default=5)
    t.add_argument("--b", type=int, default=1000, help="number of surrogates")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--noise-amp", type=float, default=1e-6)
    t.add_argument("--workers", type=int, default=None)
    t.add_argument("--na-value", action="append", help="extra missing-value marker (repeatable)")
    t.add_argument("--out", default=None, help="JSON output path (default stdout)")
    t.set_defaults(func=cmd_test)

    def model_args(q):
        q.add_argument("--model", required=True, help=", ".join(FAMILIES))
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--dz", type=int, default=1)
        q.add_argument("--c", type=float, default=0.5)
        q.add_argument("--lambda", dest="lam", type=float, default=30.0)
        q.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="repeated tests on a synthetic model")
    model_args(b)
    b.add_argument("--reps", type=int, required=True)
    b.add_argument("--sweep", action="append", metavar="KEY=V1,V2,..")
    b.add_argument("--k-cmi", type=_k_cmi, default=None, metavar="N|auto")
    b.add_argument("--k-perm", type=int, default=5)
    b.add_argument("--b", type=int, default=1000)
    b.add_argument("--noise-amp", type=float, default=1e-6)
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--out-dir", default="bench-out")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="write one synthetic data set as CSV")
    model_args(g)
    g.add_argument("--dependent", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = None if argv is None else list(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"cmiknn: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"cmiknn: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        # invalid parameter combinations and data the estimator cannot rank
        print(f"cmiknn: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
