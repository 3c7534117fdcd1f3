"""Seeded Monte Carlo estimates of ``E ||X||_{p->q}`` and ratio tables.

Every trial matrix is drawn from its own substream,
``substream_seed(master_seed, cell_index, trial_index)``, so results do not
depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .norms import INF, bracket, parse_exponent
from .predict import (
    PredictorValue,
    gaussian_formula,
    master_rhs,
    noncentered_rhs,
    rademacher_formula,
    square_formula,
    weibull_formula,
)
from .randmat import DistributionSpec, lp_moment, rng_for, sample_entries, sample_matrix, substream_seed

__all__ = [
    "ExperimentGrid",
    "ExperimentRecord",
    "CSV_COLUMNS",
    "PREDICTORS",
    "estimate_expected_norm",
    "estimate_vector_moment",
    "predictor_for",
    "run_grid",
    "ratio_summary",
    "records_to_csv",
    "records_to_jsonl",
    "default_workers",
]

CSV_COLUMNS = (
    "dist", "m", "n", "p", "q", "trials", "emp_lower", "emp_upper",
    "stderr", "predictor", "regime", "ratio_low", "ratio_high",
)
PREDICTORS = ("master", "gaussian", "rademacher", "weibull", "square")


@dataclass(frozen=True)
class ExperimentGrid:
    dists: tuple[DistributionSpec, ...]
    sizes: tuple[tuple[int, int], ...]
    exponents: tuple[tuple[float, float], ...]
    trials: int = 50
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dists", tuple(self.dists))
        object.__setattr__(self, "sizes", tuple((int(m), int(n)) for m, n in self.sizes))
        object.__setattr__(
            self, "exponents", tuple((parse_exponent(p), parse_exponent(q)) for p, q in self.exponents)
        )
        if not (self.dists and self.sizes and self.exponents):
            raise ValueError("experiment grid lists must be nonempty")
        if any(m < 1 or n < 1 for m, n in self.sizes):
            raise ValueError("matrix sizes must be positive")
        if int(self.trials) < 2:
            raise ValueError("trials must be >= 2")

    def cells(self):
        return list(itertools.product(self.dists, self.sizes, self.exponents))

    @classmethod
    def from_dict(cls, d: dict, master_seed: int | None = None) -> ExperimentGrid:
        dists = [DistributionSpec.from_dict(x) for x in d["dists"]]
        seed = d.get("master_seed", 0) if master_seed is None else master_seed
        return cls(dists, d["sizes"], d["exponents"], int(d.get("trials", 50)), int(seed))


@dataclass(frozen=True)
class ExperimentRecord:
    dist: DistributionSpec
    m: int
    n: int
    p: float
    q: float
    trials: int
    emp_lower_mean: float
    emp_upper_mean: float
    stderr: float
    predictor: PredictorValue
    ratio_low: float
    ratio_high: float

    @property
    def regime(self) -> str:
        return self.predictor.regime

    def csv_row(self) -> list[str]:
        return [
            self.dist.label, str(self.m), str(self.n), _fmt(self.p), _fmt(self.q), str(self.trials),
            _fmt(self.emp_lower_mean), _fmt(self.emp_upper_mean), _fmt(self.stderr),
            _fmt(self.predictor.value), self.predictor.regime, _fmt(self.ratio_low), _fmt(self.ratio_high),
        ]

    def to_dict(self) -> dict:
        return {
            "dist": self.dist.to_dict(),
            "m": self.m,
            "n": self.n,
            "p": _fmt(self.p),
            "q": _fmt(self.q),
            "trials": self.trials,
            "emp_lower": self.emp_lower_mean,
            "emp_upper": self.emp_upper_mean,
            "stderr": self.stderr,
            "predictor": self.predictor.to_dict(),
            "ratio_low": self.ratio_low,
            "ratio_high": self.ratio_high,
        }


def _fmt(x) -> str:
    x = float(x)
    return "inf" if x == INF else repr(x)


def estimate_expected_norm(dist, m, n, p, q, trials, seed, cell=0):
    """``(mean lower, mean upper, stderr of midpoints)`` over ``trials`` brackets."""
    trials = int(trials)
    if trials < 2:
        raise ValueError("trials must be >= 2")
    p, q = parse_exponent(p), parse_exponent(q)
    lows = np.empty(trials)
    highs = np.empty(trials)
    for k in range(trials):
        s = substream_seed(seed, cell, k)
        b = bracket(sample_matrix(dist, m, n, s), p, q, seed=s)
        lows[k], highs[k] = b.lower, b.upper
    mids = 0.5 * (lows + highs)
    return float(lows.mean()), float(highs.mean()), float(mids.std(ddof=1) / math.sqrt(trials))


def estimate_vector_moment(dist, t, rho, trials, seed) -> float:
    """Monte Carlo estimate of ``|| sum_j t_j X_j ||_rho``."""
    t = np.asarray(t, dtype=float).ravel()
    if not rho >= 1:
        raise ValueError("rho must be >= 1")
    if int(trials) < 2:
        raise ValueError("trials must be >= 2")
    X = sample_entries(dist, (int(trials), t.size), rng_for(seed))
    return float(np.mean(np.abs(X @ t) ** rho) ** (1.0 / rho))


def predictor_for(choice: str, dist: DistributionSpec, m: int, n: int, p, q) -> PredictorValue:
    """Predictor value for one cell, rescaled to the law's size where the formula is unit-normalized."""
    if choice == "master":
        return master_rhs(dist, m, n, p, q) if dist.centered else noncentered_rhs(dist, m, n, p, q)
    if choice == "gaussian":
        return gaussian_formula(m, n, p, q).scaled(lp_moment(dist, 2.0))
    if choice == "rademacher":
        return rademacher_formula(m, n, p, q)
    if choice == "weibull":
        if dist.kind != "weibull":
            raise ValueError("the weibull predictor needs a weibull law")
        return weibull_formula(m, n, p, q, dist.r).scaled(dist.scale)
    if choice == "square":
        if m != n:
            raise ValueError("the square predictor needs m == n")
        return square_formula(dist, n, p, q)
    raise ValueError(f"unknown predictor {choice!r}; expected one of {PREDICTORS}")


def _run_cell(args):
    index, dist, (m, n), (p, q), trials, master_seed, choice = args
    pred = predictor_for(choice, dist, m, n, p, q)
    lo, hi, se = estimate_expected_norm(dist, m, n, p, q, trials, master_seed, cell=index)
    return ExperimentRecord(dist, m, n, p, q, trials, lo, hi, se, pred, lo / pred.value, hi / pred.value)


def default_workers() -> int:
    env = os.environ.get("OPNORM_THREADS")
    if env:
        workers = int(env)
        if workers < 1:
            raise ValueError("OPNORM_THREADS must be a positive integer")
        return workers
    return os.cpu_count() or 1


def run_grid(grid: ExperimentGrid, predictor_choice: str = "master", workers: int | None = None, sink=None):
    """Run every cell of ``grid``; returns records in cell order.

    ``sink`` (optional) is called with each record, in cell order, as soon as
    it and all earlier cells are done.  ``workers > 1`` uses a process pool.
    """
    if predictor_choice not in PREDICTORS:
        raise ValueError(f"unknown predictor {predictor_choice!r}; expected one of {PREDICTORS}")
    jobs = [
        (i, d, size, pq, grid.trials, grid.master_seed, predictor_choice)
        for i, (d, size, pq) in enumerate(grid.cells())
    ]
    # fail fast on predictor preconditions before any sampling
    for _, d, (m, n), (p, q), *_ in jobs:
        predictor_for(predictor_choice, d, m, n, p, q)
    workers = default_workers() if workers is None else int(workers)
    records = []
    if workers <= 1:
        results = map(_run_cell, jobs)
        for rec in results:
            records.append(rec)
            if sink:
                sink(rec)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rec in pool.map(_run_cell, jobs):
                records.append(rec)
                if sink:
                    sink(rec)
    return records


def ratio_summary(records, key: str = "regime") -> dict:
    """Per-group extremal ratios and ``spread = max(ratio_high) / min(ratio_low)``.

    ``key`` is ``"regime"`` (predictor regime label) or ``"dist"``.
    """
    groups: dict[str, list] = {}
    for rec in records:
        k = rec.predictor.regime if key == "regime" else rec.dist.label
        groups.setdefault(k, []).append(rec)
    out = {}
    for k, recs in groups.items():
        lo = min(r.ratio_low for r in recs)
        hi = max(r.ratio_high for r in recs)
        out[k] = {"cells": len(recs), "min_ratio": lo, "max_ratio": hi, "spread": hi / lo}
    return out


def records_to_csv(records, handle=None) -> str:
    """Write records as CSV (``\\n`` line endings); returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.csv_row())
    text = buf.getvalue()
    if handle is not None:
        handle.write(text)
    return text


def records_to_jsonl(records, handle=None) -> str:
    text = "".join(json.dumps(rec.to_dict(), sort_keys=True) + "\n" for rec in records)
    if handle is not None:
        handle.write(text)
    return text
