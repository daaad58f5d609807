"""Cross-validated pairwise experiments and the ratio-vs-accuracy trend.

Randomness
----------
Everything derives from one integer ``seed``. Per-task streams come from
``numpy.random.SeedSequence(seed, spawn_key=key)`` with

* folds of a pair:      ``key = (crc32(pair_name), 0)``
* network of a task:    ``key = (crc32(pair_name), 1, fold, n_vars)``

where ``pair_name`` is ``"<a> vs <b>"``. A network is keyed by the size of
its (nested) feature set rather than by percent, so percents that select
the same variables share one trained network.
"""

from __future__ import annotations

import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .dataset import BinaryDataset, Dataset, select_binary
from .energy_select import ZoneConfig, cumulative_groups, energy_ratios
from .neuralnet import NetworkConfig, predict_class, standardize_fit, train
from .window_stats import sweep_windows

REF_PERCENT = 10
DEFAULT_PERCENTS = tuple(range(1, 11))

# Published reference values on the (private) INTERPRET database:
# (class a, class b, E'10/E3, mean acc at 10 %, std, best mean, best std, best percent)
REFERENCE_PAIRS = (
    ("a2", "a3", 2.48, 68.67, 18.5, 82.00, 20.5, 6),
    ("gl", "me", 3.36, 68.38, 9.0, 75.69, 9.8, 9),
    ("od", "a2", 3.65, 68.00, 11.0, 84.00, 16.7, 6),
    ("a2", "oa", 3.77, 76.67, 9.4, 84.67, 16.6, 6),
    ("gl", "ly", 3.93, 82.04, 12.4, 88.61, 5.5, 9),
    ("gl", "ab", 3.97, 94.18, 5.9, 95.29, 6.4, 9),
    ("me", "ly", 5.14, 82.50, 16.8, 82.50, 6.8, 9),
    ("gl", "a3", 5.68, 90.00, 8.4, 94.00, 4.5, 9),
    ("a2", "ly", 5.87, 81.78, 20.4, 89.78, 10.0, 6),
    ("gl", "pn", 7.85, 91.76, 8.9, 97.65, 3.2, 3),
    ("me", "pn", 9.53, 92.00, 8.2, 93.14, 9.6, 9),
    ("mm", "ab", 10.25, 91.00, 12.3, 93.33, 8.6, 9),
    ("G1", "mm", 11.42, 97.67, 3.2, 100.0, 0.0, 9),
    ("a2", "G2", 15.27, 93.10, 3.7, 94.51, 4.6, 9),
    ("G1", "G2", 16.35, 92.10, 3.0, 94.29, 5.4, 9),
    ("me", "mm", 17.68, 88.43, 9.2, 98.00, 4.5, 3),
    ("G2", "mm", 18.75, 88.33, 2.9, 89.51, 4.9, 9),
    ("G1", "no", 23.88, 98.89, 2.5, 100.0, 0.0, 3),
    ("me", "no", 26.96, 97.78, 5.0, 98.00, 4.5, 7),
)


def pair_name(pair) -> str:
    return f"{pair[0]} vs {pair[1]}"


def task_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _pair_key(pair) -> int:
    return zlib.crc32(pair_name(pair).encode("utf-8"))


def stratified_kfold(y, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Split sample indices into ``k`` disjoint, class-stratified test folds.

    Each class is shuffled and dealt round-robin; the dealing position
    carries over from one class to the next, so fold sizes differ by at most
    one as well as per-class counts.
    """
    y = np.asarray(y)
    classes = sorted(set(y.tolist()))
    for c in classes:
        if np.sum(y == c) < k:
            raise ValueError(f"class {c!r} has fewer than {k} members")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    for c in classes:
        members = np.flatnonzero(y == c)
        for i in rng.permutation(members):
            folds[pos % k].append(int(i))
            pos += 1
    return [np.array(sorted(f), dtype=int) for f in folds]


@dataclass
class CVResult:
    fold_accuracies: list[float]
    percent: int
    n_vars: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def stdev(self) -> float:
        return float(np.std(self.fold_accuracies, ddof=1))

    def to_dict(self) -> dict:
        return {"percent": self.percent, "n_vars": self.n_vars, "mean": self.mean,
                "stdev": self.stdev, "fold_accuracies": list(self.fold_accuracies)}


@dataclass
class ExperimentRow:
    pair: tuple[str, str]
    ratio_e10_e3: float
    result_at_10: CVResult
    best_result: CVResult
    results: dict[int, CVResult] = field(default_factory=dict)

    @property
    def best_percent(self) -> int:
        return self.best_result.percent

    @property
    def name(self) -> str:
        return pair_name(self.pair)

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "ratio_e10_e3": self.ratio_e10_e3,
            "result_at_10": self.result_at_10.to_dict(),
            "best_percent": self.best_percent,
            "best_result": self.best_result.to_dict(),
            "results": [self.results[p].to_dict() for p in sorted(self.results)],
        }


@dataclass(frozen=True)
class _Task:
    key: tuple
    X_train: np.ndarray
    t_train: np.ndarray
    X_test: np.ndarray
    t_test: np.ndarray
    n_hidden: int
    max_epochs: int
    seed: int


def _evaluate(task: _Task) -> float:
    """Test-fold accuracy in percent for one trained network."""
    mean, scale = standardize_fit(task.X_train)
    cfg = NetworkConfig(task.X_train.shape[1], task.n_hidden, task.max_epochs)
    state, _ = train(cfg, (task.X_train - mean) / scale, task.t_train, seed=task.seed)
    pred = predict_class(state, (task.X_test - mean) / scale)
    return 100.0 * float(np.mean(pred == task.t_test))


def _run_tasks(tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [_evaluate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


@dataclass
class _PairPlan:
    pair: tuple[str, str]
    ratio: float
    percents: list[int]
    n_vars: dict[int, int]
    # (percent, fold) -> task key
    cells: dict[tuple[int, int], tuple]
    tasks: dict[tuple, _Task]


def _plan_pair(ds, pair, percents, zc, seed, mode, include_z1, n_hidden, max_epochs, k):
    if mode not in ("paper", "nested"):
        raise ValueError(f"unknown mode {mode!r}")
    bd = pair if isinstance(pair, BinaryDataset) else select_binary(ds, *pair)
    pair = (bd.class_a, bd.class_b)
    zc = zc or ZoneConfig.default(bd.m)
    evaluated = sorted(set(int(p) for p in percents) | {REF_PERCENT})
    pk = _pair_key(pair)

    lam = sweep_windows(bd, 1)
    full_groups = {g.percent: g for g in cumulative_groups(lam, zc, evaluated, include_z1)}
    ratio = full_groups[REF_PERCENT].group_energy_ratio
    n_vars = {p: g.n_vars for p, g in full_groups.items()}

    folds = stratified_kfold(bd.y, k, task_seed(seed, pk, 0))
    all_idx = np.arange(len(bd))
    cells, tasks = {}, {}
    for f, test in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, test)
        if mode == "paper":
            groups = full_groups
        else:
            lam_f = sweep_windows(bd.subset(train_idx), 1)
            groups = {g.percent: g for g in cumulative_groups(lam_f, zc, evaluated, include_z1)}
        for p in evaluated:
            idx = np.array(groups[p].indices)
            key = (f, len(idx))
            cells[p, f] = key
            if key not in tasks:
                tasks[key] = _Task(
                    key,
                    bd.X[np.ix_(train_idx, idx)], bd.y[train_idx],
                    bd.X[np.ix_(test, idx)], bd.y[test],
                    n_hidden, max_epochs, task_seed(seed, pk, 1, f, len(idx)),
                )
    return _PairPlan(pair, ratio, evaluated, n_vars, cells, tasks)


def _assemble(plan: _PairPlan, acc: dict, requested, k) -> ExperimentRow:
    results = {
        p: CVResult([acc[plan.cells[p, f]] for f in range(k)], p, plan.n_vars[p])
        for p in plan.percents
    }
    ref = results[REF_PERCENT]
    candidates = sorted(set(int(p) for p in requested) | {REF_PERCENT})
    # highest mean; ties go to the smaller percent (fewer variables)
    best = max((results[p] for p in candidates), key=lambda r: (r.mean, -r.percent))
    return ExperimentRow(plan.pair, plan.ratio, ref, best, results)


def run_pairwise_suite(
    ds: Dataset,
    pairs: Sequence[tuple[str, str]],
    percents: Sequence[int] = DEFAULT_PERCENTS,
    zc: ZoneConfig | None = None,
    seed: int = 0,
    mode: str = "paper",
    include_z1: bool = True,
    n_hidden: int = 20,
    max_epochs: int = 150,
    k: int = 5,
    jobs: int = 1,
) -> list[ExperimentRow]:
    """Run :func:`run_pair` for every pair; rows ascend by ``E'10/E3``.

    ``mode="paper"`` selects features once on the whole pair dataset before
    cross-validation; ``mode="nested"`` repeats the selection inside every
    training fold. The 10 % group is always evaluated, whether or not it is
    listed in ``percents``, and takes part in the choice of the best
    percent. All (pair, fold, feature set) trainings are independent and
    run on ``jobs`` processes; results do not depend on ``jobs``.
    """
    plans = [
        _plan_pair(ds, pair, percents, zc, seed, mode, include_z1, n_hidden, max_epochs, k)
        for pair in pairs
    ]
    flat = [(i, key, task) for i, plan in enumerate(plans) for key, task in plan.tasks.items()]
    scores = _run_tasks([t for _, _, t in flat], jobs)
    acc: list[dict] = [{} for _ in plans]
    for (i, key, _), a in zip(flat, scores):
        acc[i][key] = a
    rows = [_assemble(plan, acc[i], percents, k) for i, plan in enumerate(plans)]
    rows.sort(key=lambda r: (r.ratio_e10_e3, r.name))
    return rows


def run_pair(ds, pair, percents=DEFAULT_PERCENTS, zc=None, seed=0, **kwargs) -> ExperimentRow:
    """Select energy groups, then cross-validate a network for each percent.

    ``pair`` is a ``(class_a, class_b)`` tuple of (possibly composite) codes
    or an already selected :class:`BinaryDataset`.
    """
    return run_pairwise_suite(ds, [pair], percents, zc, seed, **kwargs)[0]


def all_pairs(ds: Dataset, min_count: int = 5) -> list[tuple[str, str]]:
    """Every pair of atomic classes present with at least ``min_count`` spectra."""
    counts = ds.class_counts()
    codes = [c for c in dict.fromkeys(ds.labels) if counts[c] >= min_count]
    return [(a, b) for i, a in enumerate(codes) for b in codes[i + 1:]]


@dataclass
class TrendFit:
    """Degree-4 polynomial of accuracy in ``u = ln(ratio)``; ``coefficients[j]`` multiplies ``u**j``."""

    coefficients: np.ndarray
    spearman: float
    residual_rms: float

    def predict(self, ratio):
        u = np.log(np.asarray(ratio, dtype=np.float64))
        return np.vander(np.atleast_1d(u), 5, increasing=True) @ self.coefficients

    def to_dict(self) -> dict:
        rho = None if math.isnan(self.spearman) else self.spearman
        return {"coefficients": [float(c) for c in self.coefficients],
                "spearman": rho, "residual_rms": self.residual_rms}


def trend_fit(ratios, accuracies=None) -> TrendFit:
    """Least-squares quartic in ``ln(ratio)`` plus Spearman rank correlation.

    Accepts either a sequence of :class:`ExperimentRow` or parallel arrays
    of ratios and mean accuracies. The correlation is NaN when either
    variable is constant.
    """
    if accuracies is None:
        rows = list(ratios)
        ratios = [r.ratio_e10_e3 for r in rows]
        accuracies = [r.result_at_10.mean for r in rows]
    x = np.asarray(ratios, dtype=np.float64)
    y = np.asarray(accuracies, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("ratios and accuracies must be 1-D and equally long")
    if x.size < 6:
        raise ValueError("trend fit needs at least 6 points")
    if np.any(x <= 0):
        raise ValueError("ratios must be positive")
    V = np.vander(np.log(x), 5, increasing=True)
    coef, *_ = np.linalg.lstsq(V, y, rcond=None)
    resid = y - V @ coef
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        rho = float("nan")
    else:
        rho = float(stats.spearmanr(x, y).statistic)
    return TrendFit(coef, rho, float(np.sqrt(np.mean(resid ** 2))))


SUITE_COLUMNS = ("pair", "ratio_e10_e3", "mean_at_10", "std_at_10",
                 "best_mean", "best_std", "best_percent", "n_vars_at_10")


def write_suite_csv(rows: Sequence[ExperimentRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SUITE_COLUMNS) + "\n")
        for r in rows:
            vals = (r.name, r.ratio_e10_e3, r.result_at_10.mean, r.result_at_10.stdev,
                    r.best_result.mean, r.best_result.stdev, r.best_percent, r.result_at_10.n_vars)
            fh.write(",".join(v if isinstance(v, str) else repr(v) for v in vals) + "\n")


def read_suite_csv(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or tuple(lines[0].split(",")) != SUITE_COLUMNS:
        raise ValueError(f"{path} is not a suite report")
    out = []
    for ln in lines[1:]:
        rec = dict(zip(SUITE_COLUMNS, ln.split(",")))
        for key in SUITE_COLUMNS[1:]:
            rec[key] = float(rec[key])
        out.append(rec)
    return out


def write_suite_json(rows, path, trend: TrendFit | None = None, meta: dict | None = None) -> None:
    doc = {
        "meta": dict(meta or {}),
        "stdev_over": "folds (sample standard deviation, n-1)",
        "rows": [r.to_dict() for r in rows],
        "trend": trend.to_dict() if trend is not None else None,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
