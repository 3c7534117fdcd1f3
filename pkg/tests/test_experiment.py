import json
import math

import numpy as np
import pytest

from opnorm.experiment import (
    CSV_COLUMNS,
    ExperimentGrid,
    default_workers,
    estimate_expected_norm,
    estimate_vector_moment,
    predictor_for,
    ratio_summary,
    records_to_csv,
    records_to_jsonl,
    run_grid,
)
from opnorm.norms import INF
from opnorm.randmat import gaussian, rademacher, rng_for, sample_entries, weibull


def test_grid_validation():
    with pytest.raises(ValueError):
        ExperimentGrid([gaussian()], [(4, 4)], [(2, 2)], trials=1)
    with pytest.raises(ValueError):
        ExperimentGrid([], [(4, 4)], [(2, 2)])
    with pytest.raises(ValueError):
        ExperimentGrid([gaussian()], [(4, 4)], [(0.5, 2)])
    g = ExperimentGrid([gaussian()], [(4, 4)], [("inf", 1)])
    assert g.exponents == ((INF, 1.0),)


def test_grid_from_dict():
    g = ExperimentGrid.from_dict(
        {"trials": 3, "master_seed": 5, "sizes": [[2, 3]], "exponents": [[1, "inf"]], "dists": [{"kind": "rademacher"}]},
        master_seed=9,
    )
    assert g.master_seed == 9 and g.trials == 3 and g.dists == (rademacher(),)


def test_estimate_rademacher_scalar():
    lo, hi, se = estimate_expected_norm(rademacher(), 1, 1, 2, 2, 100, 7)
    assert lo == hi == 1.0 and se == 0.0


def test_estimate_gaussian_scalar():
    lo, hi, se = estimate_expected_norm(gaussian(), 1, 1, 2, 2, 100_000, 7)
    assert lo == hi
    assert abs(lo - math.sqrt(2 / math.pi)) <= 3 * se


def test_estimate_deterministic():
    a = estimate_expected_norm(weibull(1.0), 5, 4, 3, 1.5, 6, 11)
    b = estimate_expected_norm(weibull(1.0), 5, 4, 3, 1.5, 6, 11)
    assert a == b
    assert a[0] <= a[1]
    with pytest.raises(ValueError):
        estimate_expected_norm(gaussian(), 2, 2, 2, 2, 1, 0)


def test_vector_moment_examples():
    n = 100_000

    def check(dist, t, rho, want):
        est = estimate_vector_moment(dist, t, rho, n, 3)
        # delta method: sd of (mean |Y|^rho)^{1/rho}
        y = np.abs(sample_entries(dist, (n, len(t)), rng_for(3)) @ np.asarray(t)) ** rho
        se = y.std(ddof=1) / math.sqrt(n) * est ** (1 - rho) / rho
        assert abs(est - want) <= 3 * se

    check(gaussian(), [1.0], 2, 1.0)
    check(gaussian(), [2**-0.5, 2**-0.5], 2, 1.0)
    check(weibull(1.0), [1.0], 2, math.sqrt(2))


def test_predictor_choices():
    assert predictor_for("gaussian", gaussian(2.0), 16, 16, 2, 2).value == pytest.approx(16.0)
    assert predictor_for("weibull", weibull(1.0, 3.0), 4, 4, 2, 2).value == pytest.approx(
        3 * predictor_for("weibull", weibull(1.0), 4, 4, 2, 2).value
    )
    assert predictor_for("master", gaussian(mean_shift=1.0), 1, 1, 2, 2).terms["mean"] == 1.0
    with pytest.raises(ValueError):
        predictor_for("square", gaussian(), 4, 5, 2, 2)
    with pytest.raises(ValueError):
        predictor_for("weibull", gaussian(), 4, 4, 2, 2)
    with pytest.raises(ValueError):
        predictor_for("bogus", gaussian(), 4, 4, 2, 2)


def test_single_cell_ratio():
    g = ExperimentGrid([gaussian()], [(16, 16)], [(2, 2)], trials=50, master_seed=1)
    (rec,) = run_grid(g, workers=1)
    assert 0.05 < rec.ratio_low <= rec.ratio_high < 20
    assert rec.emp_lower_mean <= rec.emp_upper_mean
    assert rec.ratio_low == pytest.approx(rec.emp_lower_mean / rec.predictor.value)


SMALL = ExperimentGrid(
    [gaussian(), weibull(0.5)], [(6, 4), (3, 8)], [(2, 2), (INF, 1), (1.5, 4)], trials=3, master_seed=2024
)


def test_run_grid_reproducible_and_ordered():
    a = run_grid(SMALL, workers=1)
    b = run_grid(SMALL, workers=1)
    assert records_to_csv(a) == records_to_csv(b)
    assert [(r.dist, (r.m, r.n), (r.p, r.q)) for r in a] == SMALL.cells()


def test_run_grid_worker_count_invariant():
    assert records_to_csv(run_grid(SMALL, workers=1)) == records_to_csv(run_grid(SMALL, workers=2))


def test_run_grid_streams_to_sink():
    seen = []
    recs = run_grid(SMALL, workers=1, sink=seen.append)
    assert seen == recs


def test_run_grid_rejects_before_sampling():
    g = ExperimentGrid([gaussian()], [(4, 5)], [(2, 2)], trials=2)
    with pytest.raises(ValueError):
        run_grid(g, "square", workers=1)


def test_csv_and_jsonl():
    recs = run_grid(SMALL, workers=1)
    lines = records_to_csv(recs).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == len(recs) + 1
    assert ",inf,1.0," in lines[2]
    rows = [json.loads(x) for x in records_to_jsonl(recs).splitlines()]
    assert rows[0]["predictor"]["regime"] == recs[0].regime
    assert rows[1]["p"] == "inf"


def test_ratio_summary():
    recs = run_grid(SMALL, workers=1)
    one = ratio_summary(recs[:1])
    (v,) = one.values()
    assert v["spread"] == pytest.approx(recs[0].ratio_high / recs[0].ratio_low)
    two = ratio_summary([recs[0], recs[0]])
    assert two == one | {k: {**v, "cells": 2} for k, v in one.items()}
    by_dist = ratio_summary(recs, key="dist")
    assert set(by_dist) == {"gaussian(sigma=1)", "weibull(r=0.5,scale=1)"}
    assert sum(v["cells"] for v in by_dist.values()) == len(recs)


def test_size_monotone_mean():
    base = estimate_expected_norm(rademacher(), 8, 8, 3, 1.5, 20, 5, cell=0)
    big = estimate_expected_norm(rademacher(), 16, 8, 3, 1.5, 20, 5, cell=1)
    assert big[0] >= base[0] - 4 * max(base[2], big[2])


def test_default_workers(monkeypatch):
    monkeypatch.setenv("OPNORM_THREADS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("OPNORM_THREADS", "0")
    with pytest.raises(ValueError):
        default_workers()
    monkeypatch.delenv("OPNORM_THREADS")
    assert default_workers() >= 1
