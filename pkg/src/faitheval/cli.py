"""Command-line surface: evaluate, random-baseline, correlate, curve, validate-adapter."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import INCUMBENT_METRICS, SACO_METRIC, ScoreMatrix, correlation_report
from .baseline_metrics import dataset_accuracy_auc
from .baselines import SeededGenerator, random_attribution
from .engine import CONVENTIONS, evaluate_sample
from .errors import (
    AlignmentError,
    ConfigError,
    FaithevalError,
    TransportError,
)
from .predictor import (
    CachingPredictor,
    HttpPredictor,
    LinearSoftmaxModel,
    StdioPredictor,
)
from .tensor_io import load_image, load_manifest, load_salience, read_array

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_UNREACHABLE = 3

DEFAULTS = {"k": 10, "seed": 0, "workers": 1, "out_dir": "results"}
K_PRESETS = (5, 10, 20)


# ---------------------------------------------------------------------------
# configuration


def load_config(path, overrides) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = dict(DEFAULTS)
    cfg.update(raw)
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    if "dataset" not in cfg:
        raise ConfigError("config is missing 'dataset'")
    if "predictor" not in cfg:
        raise ConfigError("config is missing 'predictor'")
    k = cfg["k"]
    if not isinstance(k, int) or k < 2:
        raise ConfigError(f"k must be an integer >= 2, got {k!r}")
    if not isinstance(cfg["workers"], int) or cfg["workers"] < 1:
        raise ConfigError(f"workers must be a positive integer, got {cfg['workers']!r}")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {cfg['seed']!r}")
    return cfg


def config_digest(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def build_predictor(spec: str, base_dir="."):
    """Parse a predictor spec: builtin:<...>, http:<url>, or stdio:<cmd>."""
    if spec.startswith(("http://", "https://")):
        return HttpPredictor(spec)
    if spec.startswith("http:"):
        return HttpPredictor(spec[len("http:") :])
    if spec.startswith("stdio:"):
        return StdioPredictor(spec[len("stdio:") :])
    if spec.startswith("builtin:"):
        return _build_builtin(spec[len("builtin:") :], base_dir)
    raise ConfigError(f"unknown predictor spec {spec!r}")


def _build_builtin(rest: str, base_dir):
    kind, _, arg = rest.partition(":")
    if kind == "linear":
        path = Path(base_dir) / arg
        try:
            desc = json.loads(path.read_text())
            weights = read_array(Path(path).parent / desc["weights"])
            biases = desc["biases"]
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load linear model {arg!r}: {exc}") from exc
        return LinearSoftmaxModel(
            weights, biases, model_id=str(desc.get("model_id", path.stem))
        )
    if kind == "seeded-linear":
        # builtin:seeded-linear:HxWxC:classes:seed
        try:
            dims, classes, seed = arg.split(":")
            h, w, c = (int(v) for v in dims.split("x"))
            return LinearSoftmaxModel.seeded((h, w, c), int(classes), int(seed))
        except ValueError as exc:
            raise ConfigError(
                f"seeded-linear spec must be HxWxC:classes:seed, got {arg!r}"
            ) from exc
    raise ConfigError(f"unknown builtin predictor {kind!r}")


# ---------------------------------------------------------------------------
# result records


def _result_record(sample_id, method, label, result) -> dict:
    return {
        "sample": sample_id,
        "method": method,
        "label": label,
        "k": result.k,
        "f": result.saco.f,
        "violations": result.saco.violations,
        "pairs": result.saco.pairs,
        "total_weight": result.saco.total_weight,
        "subset_salience": [float(v) for v in result.saco.subset_salience],
        "dpred": [float(v) for v in result.saco.dpred],
        "auc": result.scores.auc,
        "aopc": result.scores.aopc,
        "lodds": result.scores.lodds,
        "comp": result.scores.comp,
        "morf": _curve_dict(result.morf),
        "lerf": _curve_dict(result.lerf),
        "conventions": CONVENTIONS,
        "engine_version": __version__,
    }


def _curve_dict(curve) -> dict:
    return {
        "fractions": [float(v) for v in curve.fractions],
        "confidences": [float(v) for v in curve.confidences],
        "correct": [bool(v) for v in curve.correct],
    }


def _write_json(path, obj):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args) -> int:
    try:
        cfg = load_config(
            args.config,
            {
                "k": args.k,
                "seed": args.seed,
                "workers": args.workers,
                "predictor": args.predictor,
                "out_dir": args.out_dir,
            },
        )
        base_dir = Path(args.config).parent
        dataset = load_manifest(base_dir / cfg["dataset"])
    except FaithevalError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        model = CachingPredictor(build_predictor(cfg["predictor"], base_dir))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TransportError as exc:
        print(f"predictor unreachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE

    started = time.time()
    out_dir = Path(cfg["out_dir"])
    methods = cfg.get("methods")
    k = cfg["k"]
    tasks = []
    for entry in dataset.entries:
        for method, sal_path in entry.salience.items():
            if methods and method not in methods:
                continue
            tasks.append((entry, method, sal_path))

    def run_task(task):
        entry, method, sal_path = task
        x = load_image(entry.image)
        salience = load_salience(sal_path)
        result = evaluate_sample(x, salience, model, k)
        return _result_record(entry.sample_id, method, entry.label, result), result

    records, curves_by_method, failures = [], {}, []
    with ThreadPoolExecutor(max_workers=cfg["workers"]) as pool:
        for task, outcome in zip(tasks, pool.map(lambda t: _guard(run_task, t), tasks)):
            entry, method, _ = task
            if isinstance(outcome, Exception):
                failures.append((entry.sample_id, method, str(outcome)))
            else:
                record, result = outcome
                records.append(record)
                curves_by_method.setdefault(method, []).append(result.morf)

    records.sort(key=lambda r: (r["sample"], r["method"]))
    sample_files = []
    for record in records:
        rel = f"samples/{record['sample']}__{record['method']}.json"
        _write_json(out_dir / rel, record)
        sample_files.append(rel)

    _write_aggregate_csv(out_dir / "aggregate.csv", records, curves_by_method)
    manifest = {
        "config": cfg,
        "config_digest": config_digest(cfg),
        "dataset_id": dataset.identifier,
        "predictor": {
            "model_id": model.model_id,
            "input_shape": list(model.input_shape),
            "num_classes": model.num_classes,
        },
        "k": k,
        "schedules": ["individual", "cumulative-morf", "cumulative-lerf"],
        "seed": cfg["seed"],
        "sample_files": sample_files,
        "failures": [
            {"sample": s, "method": m, "error": e} for s, m, e in failures
        ],
        "wall_clock_s": time.time() - started,
        "engine_version": __version__,
        "conventions": CONVENTIONS,
    }
    _write_json(out_dir / "run_manifest.json", manifest)

    if not tasks:
        print("warning: dataset has no samples to evaluate")
    print(
        f"evaluated {len(records)}/{len(tasks)} sample-method pairs "
        f"({len(failures)} failed) -> {out_dir}"
    )
    for sample, method, err in failures:
        print(f"  FAILED {sample}/{method}: {err}", file=sys.stderr)
    return EXIT_PARTIAL if failures else EXIT_OK


def _guard(fn, task):
    try:
        return fn(task)
    except Exception as exc:  # isolate per-sample failures
        return exc


def _write_aggregate_csv(path, records, curves_by_method):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    by_method = {}
    for record in records:
        by_method.setdefault(record["method"], []).append(record)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "n", "mean_f", "mean_auc", "mean_aopc", "mean_lodds",
             "mean_comp", "accuracy_auc"]
        )
        for method in sorted(by_method):
            rows = by_method[method]
            acc_auc = dataset_accuracy_auc(curves_by_method[method])
            writer.writerow(
                [
                    method,
                    len(rows),
                    _mean(rows, "f"),
                    _mean(rows, "auc"),
                    _mean(rows, "aopc"),
                    _mean(rows, "lodds"),
                    _mean(rows, "comp"),
                    repr(acc_auc),
                ]
            )


def _mean(rows, key):
    return repr(float(np.mean([r[key] for r in rows])))


# ---------------------------------------------------------------------------
# random-baseline


def cmd_random_baseline(args) -> int:
    if args.n < 1:
        print("config error: --n must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(
            args.config,
            {
                "k": args.k,
                "seed": args.seed,
                "workers": args.workers,
                "predictor": args.predictor,
                "out_dir": args.out_dir,
            },
        )
        base_dir = Path(args.config).parent
        dataset = load_manifest(base_dir / cfg["dataset"])
    except FaithevalError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        model = CachingPredictor(build_predictor(cfg["predictor"], base_dir))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TransportError as exc:
        print(f"predictor unreachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE

    k = cfg["k"]
    root_gen = SeededGenerator(cfg["seed"])
    per_metric = {name: [] for name in (SACO_METRIC, *INCUMBENT_METRICS)}
    failures = []
    for sample_index, entry in enumerate(dataset.entries):
        x = load_image(entry.image)
        base = model.predict(x)
        sample_gen = root_gen.for_sample(sample_index)
        rng = sample_gen.rng()
        for _ in range(args.n):
            draw_seed = int(rng.integers(0, 2**63))
            salience = random_attribution(x.height, x.width, SeededGenerator(draw_seed))
            try:
                result = evaluate_sample(x, salience, model, k, base=base)
            except FaithevalError as exc:
                failures.append((entry.sample_id, str(exc)))
                continue
            per_metric["saco"].append(result.saco.f)
            per_metric["auc"].append(result.scores.auc)
            per_metric["aopc"].append(result.scores.aopc)
            per_metric["lodds"].append(result.scores.lodds)
            per_metric["comp"].append(result.scores.comp)

    summary = {"n_per_sample": args.n, "samples": len(dataset.entries), "seed": cfg["seed"], "k": k, "metrics": {}}
    for name, values in per_metric.items():
        if not values:
            continue
        arr = np.asarray(values)
        summary["metrics"][name] = {
            "mean": float(arr.mean()),
            "stddev": float(arr.std(ddof=1)) if arr.size > 1 else None,
            "count": int(arr.size),
        }
    out_dir = Path(cfg["out_dir"])
    _write_json(out_dir / "random_baseline.json", summary)
    for name, stats in summary["metrics"].items():
        print(f"{name}: mean={stats['mean']:.6f} stddev={stats['stddev']}")
    if failures:
        for sample, err in failures:
            print(f"  FAILED {sample}: {err}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# correlate


def _load_run_records(manifest_path):
    manifest = json.loads(Path(manifest_path).read_text())
    base = Path(manifest_path).parent
    records = []
    for rel in manifest["sample_files"]:
        records.append(json.loads((base / rel).read_text()))
    return manifest, records


def cmd_correlate(args) -> int:
    try:
        runs = [_load_run_records(p) for p in args.manifests]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: cannot load run manifest: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sample_sets = [set(r["sample"] for r in records) for _, records in runs]
    common = set.intersection(*sample_sets)
    missing = sorted(set.union(*sample_sets) - common)
    if missing:
        print(
            f"alignment error: runs do not share a sample set; unmatched ids: {missing}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    rows, ids = [], []
    for run_idx, (_, records) in enumerate(runs):
        for record in sorted(records, key=lambda r: (r["sample"], r["method"])):
            ids.append(f"run{run_idx}:{record['sample']}:{record['method']}")
            rows.append(
                [record["f"], record["auc"], record["aopc"], record["lodds"], record["comp"]]
            )
    try:
        matrix = ScoreMatrix(
            sample_ids=ids,
            metrics=[SACO_METRIC, *INCUMBENT_METRICS],
            values=np.asarray(rows),
        )
        report = correlation_report(matrix)
    except FaithevalError as exc:
        print(f"correlation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out_dir or "results")
    out_dir.mkdir(parents=True, exist_ok=True)
    report_json = {
        "num_samples": report.num_samples,
        "saco_vs": report.saco_vs,
        "incumbent_mean_spearman": report.incumbent_mean_spearman,
        "incumbent_mean_kendall": report.incumbent_mean_kendall,
        "orientation_note": "lower-is-better metrics sign-flipped before ranking",
    }
    _write_json(out_dir / "correlation.json", report_json)
    with open(out_dir / "correlation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric_a", "metric_b", "spearman", "kendall"])
        for a, b, sp, kt in report.rows():
            writer.writerow([a, b, "" if sp is None else repr(sp), "" if kt is None else repr(kt)])
    for metric, stats in report.saco_vs.items():
        print(f"saco vs {metric}: spearman={stats['spearman']} kendall={stats['kendall']}")
    print(
        f"incumbent mean: spearman={report.incumbent_mean_spearman} "
        f"kendall={report.incumbent_mean_kendall}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# curve


def cmd_curve(args) -> int:
    try:
        _, records = _load_run_records(args.manifest)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: cannot load run manifest: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    matches = [r for r in records if r["sample"] == args.sample]
    if args.method:
        matches = [r for r in matches if r["method"] == args.method]
    if not matches:
        print(f"unknown sample id {args.sample!r}", file=sys.stderr)
        return EXIT_CONFIG
    series = []
    for record in matches:
        series.append(
            {
                "sample": record["sample"],
                "method": record["method"],
                "subset_salience": record["subset_salience"],
                "dpred": record["dpred"],
                "morf_confidences": record["morf"]["confidences"],
                "lerf_confidences": record["lerf"]["confidences"],
                "fractions": record["morf"]["fractions"],
            }
        )
    payload = {"series": series}
    if args.out:
        _write_json(args.out, payload)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, sort_keys=True, indent=1))
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate-adapter


def cmd_validate_adapter(args) -> int:
    from .conformance import validate_adapter

    try:
        predictor = build_predictor(args.predictor)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TransportError as exc:
        print(f"predictor unreachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    try:
        checks = validate_adapter(predictor)
    except TransportError as exc:
        print(f"predictor unreachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    finally:
        if hasattr(predictor, "close"):
            predictor.close()
    ok = True
    for name, passed, detail in checks:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_UNREACHABLE


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="faitheval",
        description="Evaluate how faithfully pixel-salience maps reflect a classifier's behavior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--k", type=int, help=f"number of pixel subsets (presets: {K_PRESETS})")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--predictor", help="builtin:<spec> | http:<url> | stdio:<cmd>")
        p.add_argument("--out-dir", dest="out_dir")

    p_eval = sub.add_parser("evaluate", help="run all five metrics over a dataset manifest")
    add_common(p_eval)
    p_eval.set_defaults(fn=cmd_evaluate)

    p_rand = sub.add_parser("random-baseline", help="score uniform-random salience maps")
    add_common(p_rand)
    p_rand.add_argument("--n", type=int, default=100, help="random maps per sample")
    p_rand.set_defaults(fn=cmd_random_baseline)

    p_corr = sub.add_parser("correlate", help="rank-correlate metrics across runs")
    p_corr.add_argument("manifests", nargs="+", help="run_manifest.json paths")
    p_corr.add_argument("--out-dir", dest="out_dir")
    p_corr.set_defaults(fn=cmd_correlate)

    p_curve = sub.add_parser("curve", help="emit plot-ready series for one sample")
    p_curve.add_argument("manifest", help="run_manifest.json path")
    p_curve.add_argument("--sample", required=True)
    p_curve.add_argument("--method")
    p_curve.add_argument("--out")
    p_curve.set_defaults(fn=cmd_curve)

    p_val = sub.add_parser("validate-adapter", help="conformance-check a remote predictor")
    p_val.add_argument("--predictor", required=True)
    p_val.set_defaults(fn=cmd_validate_adapter)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
