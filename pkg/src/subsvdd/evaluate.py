"""Metrics, cross-validated grid search, repeated-split benchmarking, traces.

The benchmark protocol per (dataset, target class, method): five stratified
70/30 splits; on each training portion a 5-fold grid search picks the
hyperparameters with the best mean validation Gmean (folds are cut from the
all-classes training portion, models are fitted on the target-class members
of the non-held-out folds so the held-out fold supplies negatives); the final
model is refitted on all training targets and scored on the test portion.
All randomness is derived from one base seed, so every cell is reproducible.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import DataSet, OccSplit, kfold, make_occ_split
from .errors import SubsvddError
from .metrics import ConfusionCounts, confusion_from_labels, gmean
from .model_store import predict
from .pipeline import MethodSpec, fit_occ_model, parse_method

__all__ = [
    "ConfusionCounts",
    "gmean",
    "confusion_from_labels",
    "GridSpec",
    "grid_search",
    "run_benchmark",
    "trace_run",
    "BenchmarkRow",
    "BenchmarkReport",
    "derive_seed",
]

log = logging.getLogger("subsvdd")

REPORT_COLUMNS = (
    "dataset",
    "target_class",
    "method",
    "kernel",
    "psi",
    "direction",
    "split_index",
    "gmean",
    "selected_beta",
    "selected_C",
    "selected_sigma",
    "selected_d",
    "selected_eta",
    "wall_ms",
)

TRACE_COLUMNS = ("split_index", "iteration", "objective", "gmean")


def derive_seed(base, *parts):
    """Stable 63-bit seed from a base seed and any hashable path of parts."""
    text = "|".join([str(base)] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter candidate lists; defaults are the standard search ranges."""

    beta: tuple = (1e-2, 1e-1, 1.0, 1e1, 1e2)
    C: tuple = (0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
    sigma: tuple = (1e-1, 1.0, 1e1, 1e2, 1e3)
    d: tuple = (1, 2, 3, 4, 5, 10, 20)
    eta: tuple = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1)

    def __post_init__(self):
        for name in ("beta", "C", "sigma", "d", "eta"):
            if not getattr(self, name):
                raise ValueError(f"grid list {name!r} must be non-empty")


def _sort_key(point):
    return tuple(-1.0 if point[k] is None else float(point[k]) for k in
                 ("d", "C", "beta", "eta", "sigma"))


def enumerate_grid(method: MethodSpec, grid: GridSpec, input_dim):
    """All candidate hyperparameter points for one method, deterministically ordered.

    sigma only applies to rbf kernels; d, beta and eta only to the subspace
    families. For linear subspace methods d > input_dim is skipped (the
    projection must reduce dimension); for rbf the fit clamps d at the
    retained kernel rank. With psi0 the regularizer vanishes, so the beta
    sweep collapses to its smallest value.
    """
    sigmas = list(grid.sigma) if method.kernel == "rbf" else [None]
    if method.family == "svdd":
        points = [
            {"d": None, "C": c, "beta": None, "eta": None, "sigma": s}
            for c in grid.C
            for s in sigmas
        ]
    else:
        betas = [min(grid.beta)] if method.psi == 0 else list(grid.beta)
        dims = [d for d in grid.d if method.kernel == "rbf" or d <= input_dim]
        points = [
            {"d": dd, "C": c, "beta": b, "eta": e, "sigma": s}
            for dd in dims
            for c in grid.C
            for b in betas
            for e in grid.eta
            for s in sigmas
        ]
    seen = set()
    unique = []
    for p in points:
        key = _sort_key(p)
        if key not in seen:
            seen.add(key)
            unique.append(p)
    return sorted(unique, key=_sort_key)


def _fit_point(ds, fit_idx, method, point, seed, k_max, zscore, extra):
    model, _ = fit_occ_model(
        ds.features[:, fit_idx],
        method,
        C=point["C"],
        d=point["d"],
        beta=point["beta"] if point["beta"] is not None else 1.0,
        eta=point["eta"] if point["eta"] is not None else 0.01,
        sigma=point["sigma"],
        k_max=k_max,
        seed=seed,
        zscore=zscore,
        **extra,
    )
    return model


def _cv_score(ds, target, folds, method, point, seed, k_max, zscore, extra):
    scores = []
    for train_idx, val_idx in folds:
        fit_idx = train_idx[ds.labels[train_idx] == target]
        try:
            model = _fit_point(ds, fit_idx, method, point, seed, k_max, zscore, extra)
            _, pos = predict(model, ds.features[:, val_idx])
            scores.append(gmean(confusion_from_labels(ds.labels[val_idx] == target, pos)))
        except SubsvddError as exc:
            log.debug("grid point %s failed on a fold: %s", point, exc)
            scores.append(0.0)
    return float(np.mean(scores))


def grid_search(ds: DataSet, split: OccSplit, method: MethodSpec, grid: GridSpec,
                k=5, seed=0, *, k_max=100, zscore=False, hessian_beta_mode="as_written",
                damping=0.0):
    """Pick the grid point with the best mean validation Gmean.

    Ties go to the smallest (d, C, beta, eta, sigma) in lexicographic order
    because candidates are scanned in that order and only strict improvements
    replace the incumbent.
    """
    folds = kfold(split.train_all, k, seed)
    extra = {"hessian_beta_mode": hessian_beta_mode, "damping": damping}
    best_point = None
    best_score = -1.0
    for point in enumerate_grid(method, grid, ds.n_features):
        score = _cv_score(
            ds, split.target_class, folds, method, point, seed, k_max, zscore, extra
        )
        if score > best_score:
            best_score = score
            best_point = point
    return best_point, best_score


@dataclass(frozen=True)
class BenchmarkRow:
    dataset: str
    target_class: str
    method: MethodSpec
    split_index: int
    gmean: float | None
    selected: dict
    wall_ms: float | None


@dataclass(frozen=True)
class BenchmarkReport:
    rows: list = field(repr=False)
    repetitions: int = 5

    def mean_gmean(self, dataset, target_class, method_str):
        vals = [
            r.gmean
            for r in self.rows
            if r.dataset == dataset
            and r.target_class == target_class
            and str(r.method) == method_str
            and r.gmean is not None
        ]
        return float(np.mean(vals)) if vals else None

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(REPORT_COLUMNS)
            for r in self.rows:
                sel = r.selected or {}
                w.writerow(
                    [
                        r.dataset,
                        r.target_class,
                        r.method.family,
                        r.method.kernel,
                        "" if r.method.psi is None else r.method.psi,
                        "" if r.method.direction is None else r.method.direction,
                        r.split_index,
                        "" if r.gmean is None else repr(r.gmean),
                        _cell(sel.get("beta")),
                        _cell(sel.get("C")),
                        _cell(sel.get("sigma")),
                        _cell(sel.get("d")),
                        _cell(sel.get("eta")),
                        "" if r.wall_ms is None else repr(r.wall_ms),
                    ]
                )

    def format_table(self):
        """Aligned per-dataset table: one row per method, one column per class."""
        lines = []
        datasets = _stable_unique(r.dataset for r in self.rows)
        for ds_name in datasets:
            ds_rows = [r for r in self.rows if r.dataset == ds_name]
            classes = _stable_unique(r.target_class for r in ds_rows)
            methods = _stable_unique(str(r.method) for r in ds_rows)
            header = ["method".ljust(26)] + [c[:12].rjust(12) for c in classes]
            header.append("Av.".rjust(12))
            lines.append(f"== {ds_name} ==")
            lines.append(" ".join(header))
            for m in methods:
                cells = []
                means = []
                for c in classes:
                    v = self.mean_gmean(ds_name, c, m)
                    cells.append(("-" if v is None else f"{v:.2f}").rjust(12))
                    if v is not None:
                        means.append(v)
                avg = f"{np.mean(means):.2f}" if means else "-"
                lines.append(" ".join([m.ljust(26)] + cells + [avg.rjust(12)]))
            lines.append("")
        return "\n".join(lines)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _stable_unique(items):
    seen = []
    for it in items:
        if it not in seen:
            seen.append(it)
    return seen


def _bench_cell(ds, target, method, rep, base_seed, grid, k, k_max, zscore,
                train_frac, timing, extra):
    """One benchmark cell: split, grid search, final fit, test Gmean."""
    t0 = time.perf_counter()
    split_seed = derive_seed(base_seed, ds.name, target, rep)
    split = make_occ_split(ds, target, train_frac, split_seed)
    cv_seed = derive_seed(base_seed, ds.name, target, rep, "cv")
    point, _ = grid_search(
        ds, split, method, grid, k, cv_seed, k_max=k_max, zscore=zscore, **extra
    )
    fit_seed = derive_seed(base_seed, ds.name, target, rep, "fit")
    model = _fit_point(
        ds, split.train_target, method, point, fit_seed, k_max, zscore,
        {"hessian_beta_mode": extra["hessian_beta_mode"], "damping": extra["damping"]},
    )
    _, pos = predict(model, ds.features[:, split.test_indices])
    truth = ds.labels[split.test_indices] == target
    score = gmean(confusion_from_labels(truth, pos))
    wall = (time.perf_counter() - t0) * 1000.0 if timing else None
    return BenchmarkRow(
        dataset=ds.name,
        target_class=target,
        method=method,
        split_index=rep,
        gmean=score,
        selected=point,
        wall_ms=wall,
    )


def _bench_cell_safe(args):
    (ds, target, method_str, rep, base_seed, grid, k, k_max, zscore,
     train_frac, timing, extra) = args
    method = parse_method(method_str)
    try:
        return _bench_cell(
            ds, target, method, rep, base_seed, grid, k, k_max, zscore,
            train_frac, timing, extra,
        )
    except SubsvddError as exc:
        log.warning(
            "benchmark cell failed (%s / %s / %s / split %d): %s",
            ds.name, target, method_str, rep, exc,
        )
        return BenchmarkRow(
            dataset=ds.name,
            target_class=target,
            method=method,
            split_index=rep,
            gmean=None,
            selected={},
            wall_ms=None,
        )


def run_benchmark(datasets, methods, repetitions=5, seed=42, *, grid=None, k=5,
                  k_max=100, zscore=False, train_frac=0.7, jobs=1, timing=False,
                  hessian_beta_mode="as_written", damping=0.0):
    """Full repeated-split benchmark over datasets x target classes x methods."""
    grid = grid or GridSpec()
    extra = {"hessian_beta_mode": hessian_beta_mode, "damping": damping}
    items = []
    for ds in datasets:
        for target in ds.class_names:
            for method_str in methods:
                for rep in range(repetitions):
                    items.append(
                        (ds, target, method_str, rep, seed, grid, k, k_max,
                         zscore, train_frac, timing, extra)
                    )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bench_cell_safe, items, chunksize=1))
    else:
        rows = [_bench_cell_safe(it) for it in items]
    return BenchmarkReport(rows=rows, repetitions=repetitions)


def trace_run(ds: DataSet, target, method: MethodSpec, params, seed=42, splits=5, *,
              k_max=100, zscore=False, train_frac=0.7,
              hessian_beta_mode="as_written", damping=0.0):
    """Per-iteration (objective, test Gmean) trace over repeated splits.

    ``params`` maps hyperparameter names (C, d, beta, eta, sigma) to fixed
    values; no search happens here. Returns rows (split_index, iteration,
    objective, gmean) for each split, followed by the across-split average
    series with split_index 'avg'.
    """
    per_split = []
    for rep in range(splits):
        split_seed = derive_seed(seed, ds.name, target, rep)
        split = make_occ_split(ds, target, train_frac, split_seed)
        fit_seed = derive_seed(seed, ds.name, target, rep, "fit")
        truth = ds.labels[split.test_indices] == target
        _, trace = fit_occ_model(
            ds.features[:, split.train_target],
            method,
            C=params["C"],
            d=params.get("d"),
            beta=params.get("beta", 1.0),
            eta=params.get("eta", 0.01),
            sigma=params.get("sigma"),
            k_max=k_max,
            seed=fit_seed,
            hessian_beta_mode=hessian_beta_mode,
            damping=damping,
            zscore=zscore,
            eval_data=(ds.features[:, split.test_indices], truth),
        )
        per_split.append(trace)
    rows = []
    for rep, trace in enumerate(per_split):
        for tr in trace:
            rows.append((rep, tr.iteration, tr.objective, tr.gmean))
    n_iter = min(len(t) for t in per_split)
    for i in range(n_iter):
        obj = float(np.mean([t[i].objective for t in per_split]))
        gms = [t[i].gmean for t in per_split if t[i].gmean is not None]
        avg_g = float(np.mean(gms)) if gms else None
        rows.append(("avg", per_split[0][i].iteration, obj, avg_g))
    return rows


def write_trace_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for split_index, iteration, objective, score in rows:
            w.writerow(
                [
                    split_index,
                    iteration,
                    repr(float(objective)),
                    "" if score is None else repr(float(score)),
                ]
            )
