"""Entry laws for iid random matrices.

A law is described by :class:`DistributionSpec`.  For every law we expose

* sampling (:func:`sample_matrix`),
* absolute moments ``||X||_rho = (E|X|^rho)^(1/rho)`` (:func:`lp_moment`),
* the log-tail function ``N(t) = -ln P(|X| >= t)`` (:func:`log_tail`) and its
  generalized inverse ``N^{-1}(s) = sup{t >= 0 : N(t) <= s}``
  (:func:`log_tail_inverse`),
* a finite-grid check of the moment-doubling regularity condition
  ``||X||_{2 rho} <= alpha ||X||_rho`` (:func:`check_regularity`).

Random streams use the counter-based Philox-4x64-10 generator keyed directly by
the 64-bit seed, so a given seed produces the same bits on every platform.
Independent substreams are derived with :func:`substream_seed`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

__all__ = [
    "DistributionSpec",
    "RegularityReport",
    "gaussian",
    "rademacher",
    "weibull",
    "tabulated",
    "rng_for",
    "substream_seed",
    "sample_matrix",
    "sample_entries",
    "lp_moment",
    "log_tail",
    "log_tail_inverse",
    "log_tail_slope",
    "tail_shape",
    "essential_sup",
    "check_regularity",
]

KINDS = ("gaussian", "rademacher", "weibull", "tabulated_log_tail")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DistributionSpec:
    """Law of a single matrix entry.

    ``kind`` selects the family; only the parameters of that family are used.
    ``mean_shift`` is added to every symmetric draw, so the law is centered iff
    ``mean_shift == 0``.
    """

    kind: str
    sigma: float = 1.0
    r: float = 1.0
    scale: float = 1.0
    knots: tuple[tuple[float, float], ...] = ()
    mean_shift: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not math.isfinite(self.mean_shift):
            raise ValueError("mean_shift must be finite")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValueError("gaussian sigma must be positive")
        if self.kind == "weibull":
            if not (self.r > 0 and math.isfinite(self.r)):
                raise ValueError("weibull r must be a positive finite number")
            if not self.scale > 0:
                raise ValueError("weibull scale must be positive")
        if self.kind == "tabulated_log_tail":
            knots = tuple((float(t), float(v)) for t, v in self.knots)
            object.__setattr__(self, "knots", knots)
            _validate_knots(knots)

    @property
    def centered(self) -> bool:
        return self.mean_shift == 0.0

    def centered_companion(self) -> DistributionSpec:
        return DistributionSpec(self.kind, self.sigma, self.r, self.scale, self.knots, 0.0)

    def shifted(self, mean_shift: float) -> DistributionSpec:
        return DistributionSpec(self.kind, self.sigma, self.r, self.scale, self.knots, mean_shift)

    @property
    def label(self) -> str:
        """Short stable identifier used in CSV output."""
        if self.kind == "gaussian":
            base = f"gaussian(sigma={self.sigma:g})"
        elif self.kind == "rademacher":
            base = "rademacher"
        elif self.kind == "weibull":
            base = f"weibull(r={self.r:g},scale={self.scale:g})"
        else:
            base = f"tabulated({len(self.knots)} knots)"
        if self.mean_shift:
            base += f"+{self.mean_shift:g}"
        return base

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "gaussian":
            d["sigma"] = self.sigma
        elif self.kind == "weibull":
            d["r"] = self.r
            d["scale"] = self.scale
        elif self.kind == "tabulated_log_tail":
            d["knots"] = [list(k) for k in self.knots]
        d["centered"] = self.centered
        d["mean_shift"] = self.mean_shift
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> DistributionSpec:
        kind = d.get("kind")
        if kind == "tabulated":
            kind = "tabulated_log_tail"
        mean_shift = float(d.get("mean_shift", 0.0))
        if d.get("centered") is True and mean_shift != 0.0:
            raise ValueError("centered=true is inconsistent with a nonzero mean_shift")
        kwargs = {"mean_shift": mean_shift}
        if kind == "gaussian":
            kwargs["sigma"] = float(d.get("sigma", 1.0))
        elif kind == "weibull":
            kwargs["r"] = float(d["r"])
            kwargs["scale"] = float(d.get("scale", 1.0))
        elif kind == "tabulated_log_tail":
            kwargs["knots"] = tuple(tuple(k) for k in d["knots"])
        elif kind != "rademacher":
            raise ValueError(f"unknown distribution kind {kind!r}")
        return cls(kind, **kwargs)

    @classmethod
    def from_json(cls, text: str) -> DistributionSpec:
        return cls.from_dict(json.loads(text))


def gaussian(sigma: float = 1.0, mean_shift: float = 0.0) -> DistributionSpec:
    return DistributionSpec("gaussian", sigma=sigma, mean_shift=mean_shift)


def rademacher(mean_shift: float = 0.0) -> DistributionSpec:
    return DistributionSpec("rademacher", mean_shift=mean_shift)


def weibull(r: float, scale: float = 1.0, mean_shift: float = 0.0) -> DistributionSpec:
    """Symmetric Weibull law: ``P(|X| >= t) = exp(-(t/scale)^r)``."""
    return DistributionSpec("weibull", r=r, scale=scale, mean_shift=mean_shift)


def tabulated(knots, mean_shift: float = 0.0) -> DistributionSpec:
    """Symmetric law with piecewise-linear log-tail through ``knots``.

    ``knots`` is an increasing list of ``(t, N(t))`` pairs starting at
    ``(0, 0)``.  Beyond the last knot ``N`` continues with the last slope.
    """
    return DistributionSpec("tabulated_log_tail", knots=tuple(tuple(k) for k in knots), mean_shift=mean_shift)


def _validate_knots(knots):
    if len(knots) < 2:
        raise ValueError("tabulated log-tail needs at least two knots")
    t = np.array([k[0] for k in knots])
    v = np.array([k[1] for k in knots])
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise ValueError("knots must be finite")
    if t[0] != 0.0 or v[0] != 0.0:
        raise ValueError("first knot must be (0, 0)")
    if np.any(np.diff(t) <= 0):
        raise ValueError("knot positions must be strictly increasing")
    if np.any(np.diff(v) < 0):
        raise ValueError("knot values N(t) must be nondecreasing")
    if v[-1] <= v[-2]:
        raise ValueError("last knot segment must have positive slope")


def _knot_arrays(dist):
    t = np.array([k[0] for k in dist.knots])
    v = np.array([k[1] for k in dist.knots])
    return t, v


# --------------------------------------------------------------------------
# random streams


def rng_for(seed: int) -> np.random.Generator:
    """Philox-4x64-10 generator keyed by the 64-bit ``seed`` (counter starts at 0)."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def substream_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for the substream addressed by ``indices``.

    Computed as ``SeedSequence(master_seed, spawn_key=indices).generate_state(1, uint64)``,
    so it depends only on the arguments, never on call order.
    """
    ss = np.random.SeedSequence(int(master_seed) & _MASK64, spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint64)[0])


def sample_entries(dist: DistributionSpec, size, rng: np.random.Generator) -> np.ndarray:
    """Draw iid entries of shape ``size`` from ``dist`` using ``rng``."""
    if dist.kind == "gaussian":
        x = dist.sigma * rng.standard_normal(size)
    elif dist.kind == "rademacher":
        x = 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
    elif dist.kind == "weibull":
        sign = 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
        e = rng.standard_exponential(size)
        x = sign * dist.scale * e ** (1.0 / dist.r)
    else:
        sign = 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
        e = rng.standard_exponential(size)
        # P(N^{-1}(E) >= t) = P(E >= N(t)) = exp(-N(t))
        x = sign * _tabulated_inverse(dist, e)
    if dist.mean_shift:
        x = x + dist.mean_shift
    return x


def sample_matrix(dist: DistributionSpec, m: int, n: int, seed: int) -> np.ndarray:
    """An ``m x n`` matrix of iid entries; bit-identical for identical arguments."""
    if int(m) < 1 or int(n) < 1:
        raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
    return sample_entries(dist, (int(m), int(n)), rng_for(seed))


# --------------------------------------------------------------------------
# moments


def _check_rho(rho):
    if not rho >= 1:
        raise ValueError(f"moment order must be >= 1, got {rho}")


def lp_moment(dist: DistributionSpec, rho: float) -> float:
    """``(E|X|^rho)^(1/rho)`` of the symmetric part of ``dist``.

    The mean shift is ignored: moments are those of the centered law, which is
    what every predictor consumes.
    """
    _check_rho(rho)
    if math.isinf(rho):
        return essential_sup(dist)
    if dist.kind == "gaussian":
        log_m = 0.5 * rho * math.log(2.0) + special.gammaln((rho + 1.0) / 2.0) - 0.5 * math.log(math.pi)
        return dist.sigma * math.exp(log_m / rho)
    if dist.kind == "rademacher":
        return 1.0
    if dist.kind == "weibull":
        return dist.scale * math.exp(special.gammaln(1.0 + rho / dist.r) / rho)
    return _tabulated_moment(dist, rho)


def _tabulated_moment(dist, rho):
    # E|X|^rho = rho * int_0^inf t^(rho-1) exp(-N(t)) dt, integrated in log-scaled form
    t, v = _knot_arrays(dist)
    slope = (v[-1] - v[-2]) / (t[-1] - t[-2])

    def log_integrand(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return (rho - 1.0) * np.log(x) - _tabulated_N(dist, x)

    # the tail is eventually ~ x^(rho-1) exp(-slope x), peaking near (rho-1)/slope
    x_hi = t[-1] + (rho + 50.0) / slope
    probe = np.concatenate([np.linspace(0.0, x_hi, 4001)[1:], t[1:]])
    shift = float(np.max(log_integrand(probe)))

    def f(x):
        if x <= 0.0:
            return math.exp(-shift) if rho == 1.0 else 0.0
        return math.exp(float(log_integrand(x)) - shift)

    edges = list(t) + [x_hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsrel=1e-11, epsabs=0.0, limit=200)
        total += val
    val, _ = integrate.quad(f, x_hi, np.inf, epsrel=1e-11, epsabs=0.0, limit=200)
    total += val
    return math.exp((math.log(rho) + math.log(total) + shift) / rho)


# --------------------------------------------------------------------------
# log-tail function and its generalized inverse


def essential_sup(dist: DistributionSpec) -> float:
    """Essential supremum of ``|X|`` for the symmetric part (``inf`` if unbounded)."""
    return 1.0 if dist.kind == "rademacher" else math.inf


def _tabulated_N(dist, x):
    t, v = _knot_arrays(dist)
    x = np.asarray(x, dtype=float)
    slope = (v[-1] - v[-2]) / (t[-1] - t[-2])
    inside = np.interp(x, t, v)
    return np.where(x > t[-1], v[-1] + slope * (x - t[-1]), inside)


def _tabulated_inverse(dist, s):
    # sup{t : N(t) <= s} for piecewise-linear N; flat stretches resolve to their right end
    t, v = _knot_arrays(dist)
    s = np.asarray(s, dtype=float)
    k = np.searchsorted(v, s, side="right") - 1
    k = np.clip(k, 0, len(v) - 1)
    last = k == len(v) - 1
    kk = np.minimum(k, len(v) - 2)
    dv = v[kk + 1] - v[kk]
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = t[kk] + (s - v[kk]) / dv * (t[kk + 1] - t[kk])
    slope = (v[-1] - v[-2]) / (t[-1] - t[-2])
    tail = t[-1] + (s - v[-1]) / slope
    return np.where(last, tail, inner)


def log_tail(dist: DistributionSpec, t: float) -> float:
    """``N(t) = -ln P(|X| >= t)`` for the symmetric part; ``inf`` where the tail vanishes."""
    if not t >= 0:
        raise ValueError(f"log_tail needs t >= 0, got {t}")
    if dist.kind == "gaussian":
        # P(|g| >= t) = 2 Phi(-t/sigma)
        return max(0.0, -(math.log(2.0) + float(special.log_ndtr(-t / dist.sigma))))
    if dist.kind == "rademacher":
        return 0.0 if t <= 1.0 else math.inf
    if dist.kind == "weibull":
        return (t / dist.scale) ** dist.r
    return float(_tabulated_N(dist, t))


def log_tail_slope(dist: DistributionSpec, t: float) -> float:
    """Right derivative ``N'(t)`` (used by the water-filling solver)."""
    if dist.kind == "gaussian":
        z = t / dist.sigma
        log_pdf = -0.5 * z * z - 0.5 * math.log(2.0 * math.pi)
        return math.exp(log_pdf - float(special.log_ndtr(-z))) / dist.sigma
    if dist.kind == "rademacher":
        return 0.0 if t < 1.0 else math.inf
    if dist.kind == "weibull":
        r, c = dist.r, dist.scale
        if t == 0.0:
            return math.inf if r < 1 else (1.0 / c if r == 1 else 0.0)
        return r / c * (t / c) ** (r - 1.0)
    tk, v = _knot_arrays(dist)
    slopes = np.diff(v) / np.diff(tk)
    k = int(np.searchsorted(tk, t, side="right") - 1)
    return float(slopes[min(k, len(slopes) - 1)])


def log_tail_inverse(dist: DistributionSpec, s: float) -> float:
    """Generalized inverse ``sup{t >= 0 : N(t) <= s}``."""
    if not s >= 0:
        raise ValueError(f"log_tail_inverse needs s >= 0, got {s}")
    if dist.kind == "weibull":
        return dist.scale * s ** (1.0 / dist.r)
    if dist.kind == "rademacher":
        return 1.0
    if dist.kind == "tabulated_log_tail":
        return float(_tabulated_inverse(dist, s))
    return _bisect_inverse(lambda x: log_tail(dist, x), s, start=dist.sigma)


def _bisect_inverse(N, s, start=1.0):
    """Largest ``t`` with ``N(t) <= s`` for nondecreasing ``N``, by bisection."""
    lo, hi = 0.0, start
    while N(hi) <= s:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            return math.inf
    while hi - lo > 1e-10 * (1.0 + lo):
        mid = 0.5 * (lo + hi)
        if N(mid) <= s:
            lo = mid
        else:
            hi = mid
    return lo


def tail_shape(dist: DistributionSpec) -> str:
    """Convexity class of ``N``.

    ``"convex"`` (log-concave tails), ``"concave"`` (log-convex tails),
    ``"linear"`` (both, e.g. the exponential law) or ``"neither"``.
    """
    if dist.kind in ("gaussian", "rademacher"):
        return "convex"
    if dist.kind == "weibull":
        if dist.r == 1.0:
            return "linear"
        return "convex" if dist.r > 1.0 else "concave"
    t, v = _knot_arrays(dist)
    d = np.diff(np.diff(v) / np.diff(t))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(v))))
    up, down = bool(np.all(d >= -tol)), bool(np.all(d <= tol))
    if up and down:
        return "linear"
    return "convex" if up else ("concave" if down else "neither")


# --------------------------------------------------------------------------
# regularity


@dataclass(frozen=True)
class RegularityReport:
    """Finite-grid certificate of the moment-doubling condition.

    ``alpha1`` is the largest ratio ``||X||_{2rho} / ||X||_rho`` seen on the
    ``rho`` grid, raised to the family's ``rho -> inf`` limit when that is
    larger (the ratio approaches its limit from below for all built-ins).
    ``alpha2``/``beta2`` are the tail-doubling constants:
    ``N^{-1}(2s) <= alpha2 N^{-1}(s)`` for every grid ``s > beta2``.
    """

    alpha1: float
    alpha2: float
    beta2: float
    consistent: bool
    alpha1_grid: float
    alpha1_limit: float
    rho_range: tuple[float, float]
    s_range: tuple[float, float]
    grid_size: int
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "beta2": self.beta2,
            "consistent": self.consistent,
            "alpha1_grid": self.alpha1_grid,
            "alpha1_limit": self.alpha1_limit,
            "rho_range": list(self.rho_range),
            "s_range": list(self.s_range),
            "grid_size": self.grid_size,
            "notes": list(self.notes),
        }


def moment_ratio_limit(dist: DistributionSpec) -> float:
    """``lim_{rho->inf} ||X||_{2rho}/||X||_rho``."""
    if dist.kind == "gaussian":
        return math.sqrt(2.0)
    if dist.kind == "rademacher":
        return 1.0
    if dist.kind == "weibull":
        return 2.0 ** (1.0 / dist.r)
    return 2.0  # linear extrapolation makes the far tail exponential


def check_regularity(dist: DistributionSpec, rho_max: float = 64.0, grid_size: int = 40) -> RegularityReport:
    if not rho_max >= 2:
        raise ValueError("rho_max must be >= 2")
    grid_size = int(grid_size)
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    rhos = np.geomspace(1.0, rho_max, grid_size) if grid_size > 1 else np.array([1.0])
    ratios = [lp_moment(dist, 2.0 * r) / lp_moment(dist, r) for r in rhos]
    alpha1_grid = max(1.0, float(max(ratios)))
    alpha1_limit = moment_ratio_limit(dist)
    alpha1 = max(alpha1_grid, alpha1_limit)

    beta2 = 2.0 * math.log(2.0 * alpha1)
    s_lo = beta2 * (1.0 + 1e-9)
    s_hi = s_lo * 2.0**10
    s_grid = np.geomspace(s_lo, s_hi, max(grid_size, 2))
    doubling = []
    for s in s_grid:
        base = log_tail_inverse(dist, s)
        doubling.append(math.inf if base == 0 else log_tail_inverse(dist, 2.0 * s) / base)
    alpha2 = max(1.0, float(max(doubling)))

    # constants by which (i) and (ii) imply each other
    alpha2_allowed = 2.0 * math.e * alpha1 * (4.0 * math.log(2.0 * alpha1)) ** math.log2(alpha1)
    alpha1_allowed = alpha2 * (math.exp(beta2) + math.sqrt(2.0))
    notes = []
    ok = math.isfinite(alpha1) and math.isfinite(alpha2)
    if alpha2 > alpha2_allowed:
        notes.append(f"alpha2={alpha2:.6g} exceeds implied bound {alpha2_allowed:.6g}")
        ok = False
    if alpha1 > alpha1_allowed:
        notes.append(f"alpha1={alpha1:.6g} exceeds implied bound {alpha1_allowed:.6g}")
        ok = False
    return RegularityReport(
        alpha1=alpha1,
        alpha2=alpha2,
        beta2=beta2,
        consistent=ok,
        alpha1_grid=alpha1_grid,
        alpha1_limit=alpha1_limit,
        rho_range=(1.0, float(rho_max)),
        s_range=(float(s_grid[0]), float(s_grid[-1])),
        grid_size=grid_size,
        notes=tuple(notes),
    )
