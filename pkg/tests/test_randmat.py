import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from opnorm.randmat import (
    DistributionSpec,
    check_regularity,
    essential_sup,
    gaussian,
    log_tail,
    log_tail_inverse,
    lp_moment,
    moment_ratio_limit,
    rademacher,
    rng_for,
    sample_entries,
    sample_matrix,
    substream_seed,
    tabulated,
    tail_shape,
    weibull,
)

BUILTINS = [gaussian(), rademacher(), weibull(0.5), weibull(1.0), weibull(2.0), weibull(4.0)]
EXPO_KNOTS = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]


def test_spec_validation():
    with pytest.raises(ValueError):
        DistributionSpec("cauchy")
    with pytest.raises(ValueError):
        weibull(0.0)
    with pytest.raises(ValueError):
        weibull(1.0, scale=-1.0)
    with pytest.raises(ValueError):
        gaussian(sigma=0.0)
    with pytest.raises(ValueError):
        tabulated([(0.0, 0.5), (1.0, 1.0)])  # must start at N(0) = 0
    with pytest.raises(ValueError):
        tabulated([(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)])  # decreasing


def test_json_round_trip():
    for d in BUILTINS + [tabulated(EXPO_KNOTS), gaussian(mean_shift=1.5)]:
        back = DistributionSpec.from_json(d.to_json())
        assert back == d
    d = json.loads(weibull(0.5, 2.0).to_json())
    assert d == {"kind": "weibull", "r": 0.5, "scale": 2.0, "centered": True, "mean_shift": 0.0}
    with pytest.raises(ValueError):
        DistributionSpec.from_dict({"kind": "gaussian", "centered": True, "mean_shift": 1.0})


def test_rademacher_entries_and_determinism():
    A = sample_matrix(rademacher(), 2, 2, 42)
    assert set(np.unique(A)) <= {-1.0, 1.0}
    for d in BUILTINS:
        assert np.array_equal(sample_matrix(d, 5, 7, 123), sample_matrix(d, 5, 7, 123))
    assert not np.array_equal(sample_matrix(gaussian(), 5, 7, 1), sample_matrix(gaussian(), 5, 7, 2))


def test_rng_is_philox_keyed_by_seed():
    a = rng_for(7).standard_normal(4)
    b = np.random.Generator(np.random.Philox(key=7)).standard_normal(4)
    assert np.array_equal(a, b)


def test_substreams_distinct_and_stable():
    seeds = {substream_seed(99, c, t) for c in range(10) for t in range(10)}
    assert len(seeds) == 100
    assert substream_seed(99, 3, 4) == substream_seed(99, 3, 4)
    expected = int(np.random.SeedSequence(99, spawn_key=(3, 4)).generate_state(1, np.uint64)[0])
    assert substream_seed(99, 3, 4) == expected


def test_exponential_mean_abs():
    x = sample_matrix(weibull(1.0), 1, 100_000, 7).ravel()
    se = np.abs(x).std(ddof=1) / math.sqrt(x.size)
    assert abs(np.abs(x).mean() - 1.0) <= 3 * se


@pytest.mark.parametrize("d", BUILTINS + [tabulated(EXPO_KNOTS)], ids=lambda d: d.label)
def test_symmetric_laws_are_centered(d):
    x = sample_entries(d, 200_000, rng_for(5))
    assert abs(x.mean()) <= 4 * x.std() / math.sqrt(x.size)


def test_mean_shift_applied():
    x = sample_entries(rademacher(mean_shift=2.0), 1000, rng_for(1))
    assert set(np.unique(x)) <= {1.0, 3.0}


def test_moment_examples():
    assert lp_moment(gaussian(), 2) == pytest.approx(1.0, rel=1e-14)
    assert lp_moment(weibull(1.0), 2) == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert lp_moment(rademacher(), 17) == 1.0
    assert lp_moment(gaussian(3.0), 4) == pytest.approx(3.0 * 3.0 ** 0.25, rel=1e-13)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 4.0])
def test_weibull_moments_match_quadrature(r):
    for rho in (1.0, 2.5, 7.0):
        # E|X|^rho = int_0^inf rho t^{rho-1} e^{-t^r} dt
        val, _ = integrate.quad(lambda t: rho * t ** (rho - 1) * math.exp(-(t**r)), 0, math.inf, limit=200)
        assert lp_moment(weibull(r), rho) == pytest.approx(val ** (1 / rho), rel=1e-8)


def test_gaussian_moments_match_quadrature():
    for rho in (1.0, 3.0, 5.5):
        val, _ = integrate.quad(lambda x: abs(x) ** rho * stats.norm.pdf(x), -np.inf, np.inf)
        assert lp_moment(gaussian(), rho) == pytest.approx(val ** (1 / rho), rel=1e-9)


def test_tabulated_moments():
    # these knots describe exactly the exponential law
    d = tabulated(EXPO_KNOTS)
    for rho in (1.0, 2.0, 5.0):
        assert lp_moment(d, rho) == pytest.approx(math.gamma(1 + rho) ** (1 / rho), rel=1e-8)


def test_essential_sup():
    assert essential_sup(rademacher()) == 1.0
    assert essential_sup(gaussian()) == math.inf
    assert essential_sup(weibull(2.0)) == math.inf


def test_log_tail_examples():
    assert log_tail(weibull(2.0), 2.0) == pytest.approx(4.0)
    assert log_tail(rademacher(), 0.5) == 0.0
    assert log_tail(rademacher(), 1.5) == math.inf
    assert log_tail(gaussian(), 0.0) == 0.0
    t = 1.7
    assert log_tail(gaussian(), t) == pytest.approx(-math.log(2 * stats.norm.sf(t)), rel=1e-12)
    assert log_tail(weibull(2.0, scale=3.0), 6.0) == pytest.approx(4.0)


def test_log_tail_inverse_examples():
    assert log_tail_inverse(weibull(2.0), 4.0) == pytest.approx(2.0)
    assert log_tail_inverse(rademacher(), 100.0) == 1.0
    x = log_tail_inverse(gaussian(), 8.0)
    assert abs(log_tail(gaussian(), x) - 8.0) <= 1e-6
    assert x == pytest.approx(stats.norm.isf(0.5 * math.exp(-8.0)), rel=1e-9)


def test_tabulated_inverse_is_generalized():
    d = tabulated([(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 3.0)])
    # flat stretch: sup{t : N(t) <= 1} = 2
    assert log_tail_inverse(d, 1.0) == pytest.approx(2.0)
    assert log_tail_inverse(d, 2.0) == pytest.approx(2.5)
    assert log_tail_inverse(d, 5.0) == pytest.approx(4.0)


def test_tail_shapes():
    assert tail_shape(weibull(0.5)) == "concave"
    assert tail_shape(weibull(1.0)) == "linear"
    assert tail_shape(weibull(2.0)) == "convex"
    assert tail_shape(gaussian()) == "convex"
    assert tail_shape(rademacher()) == "convex"
    assert tail_shape(tabulated([(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)])) == "convex"
    assert tail_shape(tabulated([(0.0, 0.0), (1.0, 2.0), (2.0, 2.5), (3.0, 4.0)])) == "neither"


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(BUILTINS), st.floats(0.0, 60.0), st.floats(0.0, 60.0))
def test_property_inverse_consistent(d, s1, s2):
    lo, hi = sorted((s1, s2))
    a, b = log_tail_inverse(d, lo), log_tail_inverse(d, hi)
    assert a <= b * (1 + 1e-12)
    assert log_tail(d, a) <= lo * (1 + 1e-8) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(BUILTINS + [tabulated(EXPO_KNOTS)]), st.floats(1.0, 30.0), st.floats(1.0, 30.0))
def test_property_moments_nondecreasing(d, r1, r2):
    lo, hi = sorted((r1, r2))
    assert lp_moment(d, lo) <= lp_moment(d, hi) * (1 + 1e-10)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_empirical_tails_match(r):
    d = weibull(r)
    x = np.abs(sample_entries(d, 1_000_000, rng_for(2026)))
    for s in (0.25, 1.0, 2.0, 3.5, 5.0):
        t = log_tail_inverse(d, s)
        p = math.exp(-log_tail(d, t))
        freq = np.mean(x >= t)
        assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / x.size)


def test_regularity_examples():
    assert check_regularity(rademacher(), 64, 40).alpha1 == 1.0
    for r in (0.5, 1.0, 2.0):
        a = check_regularity(weibull(r), 64, 40).alpha1
        assert 2 ** (1 / r) <= a <= 1.2 * 2 ** (1 / r)
    g = check_regularity(gaussian(), 64, 40)
    assert 1.3 < g.alpha1 < 1.5
    assert g.alpha1_grid < g.alpha1_limit == pytest.approx(math.sqrt(2))


def test_regularity_grid_approaches_limit_from_below():
    for r in (0.5, 1.0, 2.0):
        rep = check_regularity(weibull(r))
        assert rep.alpha1_grid < moment_ratio_limit(weibull(r))
        assert rep.alpha1 == moment_ratio_limit(weibull(r))


@pytest.mark.parametrize("d", BUILTINS + [tabulated(EXPO_KNOTS)], ids=lambda d: d.label)
def test_regularity_consistent(d):
    rep = check_regularity(d)
    assert rep.consistent
    assert rep.alpha1 >= 1.0
    assert rep.beta2 == pytest.approx(2 * math.log(2 * rep.alpha1))
    # tail doubling holds on the grid beyond beta2
    for s in np.geomspace(max(rep.beta2, 1e-3) * 1.001, 200, 25):
        assert log_tail_inverse(d, 2 * s) <= rep.alpha2 * log_tail_inverse(d, s) * (1 + 1e-9)
    d2 = rep.to_dict()
    assert d2["rho_range"][0] == 1.0


@pytest.mark.parametrize("d", BUILTINS, ids=lambda d: d.label)
def test_moment_tail_comparability(d):
    # ||X||_rho is within explicit constants of N^{-1}(rho) once rho >= 2 ln(2 alpha)
    a = check_regularity(d).alpha1
    upper_const = 2 * (4 * math.log(2 * a)) ** math.log2(a) if a > 1 else 2.0
    for rho in (2.0, 4.0, 8.0, 16.0):
        if rho < 2 * math.log(2 * a):
            continue
        inv = log_tail_inverse(d, rho)
        mom = lp_moment(d, rho)
        assert inv / math.e <= mom <= upper_const * inv


def test_gaussian_inverse_against_scipy():
    for s in (0.1, 1.0, 5.0, 30.0):
        want = special.ndtri(1 - 0.5 * math.exp(-s))
        if s > 20:
            want = stats.norm.isf(0.5 * math.exp(-s))
        assert log_tail_inverse(gaussian(), s) == pytest.approx(want, rel=1e-8)
