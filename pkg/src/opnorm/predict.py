"""Closed-form predictors for ``E ||X||_{p->q}`` of iid random matrices.

All predictors return the bare formula value (no hidden constant).  Two-sided
equivalence only holds up to constants depending on the entry law, so they
are meant to be compared through ratios.

Notation used below: ``ps`` is the Hölder conjugate ``p*`` and
``Log n = max(1, ln n)``.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .norms import INF, conjugate, parse_exponent
from .randmat import (
    DistributionSpec,
    check_regularity,
    essential_sup,
    log_tail,
    log_tail_inverse,
    log_tail_slope,
    lp_moment,
    tail_shape,
)

__all__ = [
    "PredictorValue",
    "Log",
    "log_clamp",
    "gk_supremum",
    "logconcave_sup",
    "logconvex_sup",
    "smallq_sup",
    "gaussian_sup",
    "linear_form_sup",
    "master_rhs",
    "noncentered_rhs",
    "gaussian_formula",
    "rademacher_formula",
    "weibull_formula",
    "square_formula",
    "square_simplification",
]


@dataclass(frozen=True)
class PredictorValue:
    """A predictor evaluation.

    ``value`` is the sum of ``terms``.  ``clamp`` holds the effective moment
    orders ``q ∧ Log m`` and ``p* ∧ Log n``.  ``unified`` carries the
    alternative closed form when a formula has a case split, and ``details``
    any side information (maximizing k, normalization scale, envelopes).
    """

    value: float
    regime: str
    terms: dict[str, float]
    clamp: dict[str, float] = field(default_factory=dict)
    unified: float | None = None
    details: dict = field(default_factory=dict)

    def scaled(self, c: float) -> PredictorValue:
        return PredictorValue(
            self.value * c,
            self.regime,
            {k: v * c for k, v in self.terms.items()},
            dict(self.clamp),
            None if self.unified is None else self.unified * c,
            dict(self.details),
        )

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "regime": self.regime,
            "terms": dict(self.terms),
            "clamp": {k: _json_num(v) for k, v in self.clamp.items()},
            "unified": self.unified,
            "details": {k: _json_num(v) for k, v in self.details.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _json_num(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, (list, tuple)):
        return [_json_num(x) for x in v]
    return v


def _pv(regime, terms, clamp=None, unified=None, details=None):
    return PredictorValue(float(sum(terms.values())), regime, terms, clamp or {}, unified, details or {})


def _recip(x):
    return 0.0 if x == INF else 1.0 / x


def _pos(x):
    return x if x > 0 else 0.0


def Log(n: float) -> float:
    return max(1.0, math.log(n))


def log_clamp(x: float, n: int) -> float:
    """``min(x, max(1, ln n))``."""
    return min(x, Log(n))


def _check_dim(*dims):
    for d in dims:
        if int(d) != d or d < 1:
            raise ValueError(f"dimensions must be positive integers, got {d}")


# --------------------------------------------------------------------------
# suprema of one linear form  sup_{t in B_p^n} || sum t_j X_j ||_rho


def _concave_n_check(dist, what):
    shape = tail_shape(dist)
    if shape not in ("convex", "linear"):
        raise ValueError(f"{what} needs log-concave tails (convex N); {dist.label} has {shape} N")


def _coordinate_best(dist, c, a, lam):
    """``(s, h)`` maximizing ``a s - lam N(c s)`` over ``s >= 0`` for convex ``N``."""
    if a <= 0:
        return 0.0, 0.0
    if dist.kind == "weibull":
        r = dist.r
        # after normalization N(c s) = s^r
        if r == 1.0:
            return (0.0, 0.0) if a <= lam else (math.inf, math.inf)
        s = (a / (lam * r)) ** (1.0 / (r - 1.0))
        return s, a * s - lam * s**r
    ratio = a / lam

    def slope(s):
        return c * log_tail_slope(dist, c * s)

    if slope(0.0) >= ratio:
        return 0.0, 0.0
    if dist.kind == "tabulated_log_tail":
        t = np.array([k[0] for k in dist.knots])
        v = np.array([k[1] for k in dist.knots])
        tail_slope = (v[-1] - v[-2]) / (t[-1] - t[-2])
        if c * tail_slope < ratio:
            return math.inf, math.inf
        if c * tail_slope == ratio:
            # flat objective beyond the last knot; its value is attained at the knot
            s = t[-1] / c
            return s, a * s - lam * v[-1]
        # concave piecewise-linear objective: the optimum sits on a knot
        s_knots = t / c
        vals = a * s_knots - lam * v
        j = int(np.argmax(vals))
        return float(s_knots[j]), float(vals[j])
    lo, hi = 0.0, 1.0
    while slope(hi) < ratio:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slope(mid) < ratio:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    s = 0.5 * (lo + hi)
    return s, a * s - lam * log_tail(dist, c * s)


def _budgeted_sup(dist, c, a, q):
    """``sup{ sum a_i s_i : sum N(c s_i) <= q, s_i >= 0 }`` by Lagrangian water-filling.

    ``lam`` is bisected (in log scale, to relative 1e-10) on the budget
    ``sum N(c s_i(lam)) = q``; the returned value is the dual function at the
    bracketing multipliers, which equals the supremum by convex duality.
    """
    a = np.asarray(a, dtype=float)
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    top = essential_sup(dist) / c
    if math.isfinite(top):
        # box constraint first; if the corner of the box is affordable the budget is idle
        if a.size * log_tail(dist, c * top) <= q:
            return float(a.sum() * top)
    if dist.kind == "weibull" and dist.r == 1.0:
        return float(q * a.max())  # linear N: the whole budget goes to the largest weight

    def budget(lam):
        return sum(log_tail(dist, c * _coordinate_best(dist, c, ai, lam)[0]) for ai in a)

    def dual(lam):
        return lam * q + sum(_coordinate_best(dist, c, ai, lam)[1] for ai in a)

    lo = hi = float(a.max())
    while budget(lo) <= q:
        lo /= 2.0
    while budget(hi) > q:
        hi *= 2.0
    lo = min(lo, hi / 2.0)
    while hi / lo - 1.0 > 1e-10:
        mid = math.sqrt(lo * hi)
        if budget(mid) > q:
            lo = mid
        else:
            hi = mid
    return float(min(dual(lo), dual(hi)))


def gk_supremum(t, dist: DistributionSpec, q: float) -> float:
    """Two-sided moment expression for ``|| sum t_i X_i ||_q`` (log-concave tails).

    ``sup{ sum_{i<=q∧n} t*_i s_i : sum N(s_i) <= q } + sqrt(q) (sum_{i>q} t*_i^2)^(1/2)``
    with ``t*`` the nonincreasing rearrangement of ``|t|``.  The law is first
    rescaled to ``N^{-1}(1) = 1`` and the result scaled back.
    """
    if not q >= 1:
        raise ValueError("q must be >= 1")
    _concave_n_check(dist, "gk_supremum")
    a = np.sort(np.abs(np.asarray(t, dtype=float).ravel()))[::-1]
    if a.size == 0 or not np.any(a > 0):
        raise ValueError("t must be a nonzero vector")
    c = log_tail_inverse(dist, 1.0)
    k = min(int(math.floor(q)), a.size)
    head = _budgeted_sup(dist, c, a[:k], q)
    tail = math.sqrt(q) * float(np.sqrt(np.sum(a[k:] ** 2)))
    return c * (head + tail)


def logconcave_sup(dist: DistributionSpec, n: int, p, q: float) -> PredictorValue:
    """``max_{1<=k<=q∧n} k^{1/p*} N^{-1}(q/k) + (q∧n)^{1/(p*∨2)} n^{(1/p*-1/2)∨0}``.

    Evaluated for the law rescaled to ``N^{-1}(1) = 1``; the value is scaled
    back by ``N^{-1}(1)`` (recorded as ``details["scale"]``).
    """
    _check_dim(n)
    p = parse_exponent(p)
    if not q >= 1:
        raise ValueError("q must be >= 1")
    _concave_n_check(dist, "logconcave_sup")
    ps = conjugate(p)
    c = log_tail_inverse(dist, 1.0)
    kmax = min(int(math.floor(q)), n)
    cands = [k ** _recip(ps) * log_tail_inverse(dist, q / k) / c for k in range(1, kmax + 1)]
    k_star = int(np.argmax(cands)) + 1
    budgeted = cands[k_star - 1]
    spread = min(q, n) ** (1.0 / max(ps, 2.0)) * n ** _pos(_recip(ps) - 0.5)
    return _pv(
        "log-concave",
        {"budgeted": c * budgeted, "gaussian": c * spread},
        details={"k_star": k_star, "scale": c, "order": q},
    )


def logconvex_sup(dist: DistributionSpec, n: int, p, q: float) -> PredictorValue:
    """``||X||_q + sqrt(q) ||X||_2 n^{(1/p*-1/2)∨0}`` (log-convex tails)."""
    _check_dim(n)
    p = parse_exponent(p)
    if not q >= 1:
        raise ValueError("q must be >= 1")
    shape = tail_shape(dist)
    if shape not in ("concave", "linear"):
        raise ValueError(f"logconvex_sup needs log-convex tails (concave N); {dist.label} has {shape} N")
    ps = conjugate(p)
    return _pv(
        "log-convex",
        {
            "single": lp_moment(dist, q),
            "gaussian": math.sqrt(q) * lp_moment(dist, 2.0) * n ** _pos(_recip(ps) - 0.5),
        },
        details={"order": q},
    )


def smallq_sup(dist: DistributionSpec, n: int, p, qt: float) -> tuple[float, float]:
    """Envelope ``[n^{(1/p*-1/2)+} ||X||_qt / (2 sqrt 2),  n^{(1/p*-1/2)+} ||X||_2]`` for ``qt in [1, 2]``."""
    _check_dim(n)
    p = parse_exponent(p)
    if not 1.0 <= qt <= 2.0:
        raise ValueError(f"qt must lie in [1, 2], got {qt}")
    growth = n ** _pos(_recip(conjugate(p)) - 0.5)
    return growth * lp_moment(dist, qt) / (2.0 * math.sqrt(2.0)), growth * lp_moment(dist, 2.0)


def gaussian_sup(n: int, p, rho: float) -> float:
    """``sup_{t in B_p^n} || sum t_j g_j ||_rho = ||g||_rho n^{(1/p*-1/2)∨0}`` (exact)."""
    _check_dim(n)
    p = parse_exponent(p)
    if not rho >= 1:
        raise ValueError("rho must be >= 1")
    g_rho = math.exp((0.5 * rho * math.log(2.0) + math.lgamma((rho + 1.0) / 2.0) - 0.5 * math.log(math.pi)) / rho)
    return g_rho * n ** _pos(_recip(conjugate(p)) - 0.5)


def linear_form_sup(dist: DistributionSpec, n: int, p, rho: float) -> tuple[float, str, dict]:
    """Point value for ``sup_{t in B_p^n} || sum t_j X_j ||_rho`` and the route taken.

    Gaussian laws are exact.  For ``rho <= 2`` the small-order envelope is
    used with its lower end stripped of the ``1/(2 sqrt 2)`` constant, i.e.
    ``n^{(1/p*-1/2)+} ||X||_rho``.  Otherwise the log-concave or log-convex
    formula is chosen by the shape of ``N``.
    """
    if dist.kind == "gaussian":
        return dist.sigma * gaussian_sup(n, p, rho), "gaussian", {}
    if rho <= 2.0:
        lo, hi = smallq_sup(dist, n, p, rho)
        return lo * 2.0 * math.sqrt(2.0), "small-order", {"envelope": (lo, hi)}
    shape = tail_shape(dist)
    if shape in ("convex", "linear"):
        pv = logconcave_sup(dist, n, p, rho)
        return pv.value, "log-concave", {"k_star": pv.details["k_star"]}
    if shape == "concave":
        return logconvex_sup(dist, n, p, rho).value, "log-convex", {}
    raise ValueError(f"no closed-form route for {dist.label}: N is neither convex nor concave")


@functools.lru_cache(maxsize=64)
def _is_regular(dist: DistributionSpec) -> bool:
    return check_regularity(dist).consistent


def master_rhs(dist: DistributionSpec, m: int, n: int, p, q) -> PredictorValue:
    """Row/column two-term predictor for centered regular laws.

    ``m^{1/q} sup_{t in B_p^n} ||sum t_j X_j||_{q∧Log m}
    + n^{1/p*} sup_{s in B_{q*}^m} ||sum s_i X_i||_{p*∧Log n}``.
    """
    _check_dim(m, n)
    p, q = parse_exponent(p), parse_exponent(q)
    if not dist.centered:
        raise ValueError("master_rhs needs a centered law; use noncentered_rhs")
    if not _is_regular(dist):
        raise ValueError(f"{dist.label} failed the regularity check")
    ps = conjugate(p)
    rho_row, rho_col = log_clamp(q, m), log_clamp(ps, n)
    s_row, route_row, d_row = linear_form_sup(dist, n, p, rho_row)
    s_col, route_col, d_col = linear_form_sup(dist, m, conjugate(q), rho_col)
    details = {f"row_{k}": v for k, v in d_row.items()}
    details.update({f"col_{k}": v for k, v in d_col.items()})
    return _pv(
        f"row:{route_row}|col:{route_col}",
        {"row": m ** _recip(q) * s_row, "col": n ** _recip(ps) * s_col},
        clamp={"q_eff": rho_row, "pstar_eff": rho_col},
        details=details,
    )


def noncentered_rhs(dist: DistributionSpec, m: int, n: int, p, q) -> PredictorValue:
    """``m^{1/q} n^{1/p*} |E X| + master_rhs(centered law)``."""
    p, q = parse_exponent(p), parse_exponent(q)
    base = master_rhs(dist.centered_companion(), m, n, p, q)
    mean_term = m ** _recip(q) * n ** _recip(conjugate(p)) * abs(dist.mean_shift)
    terms = {"mean": mean_term, **base.terms}
    return _pv(base.regime, terms, base.clamp, details=base.details)


# --------------------------------------------------------------------------
# explicit formulas


def _case(ps, q):
    if ps <= 2 and q <= 2:
        return "p*,q≤2"
    if q <= 2 <= ps:
        return "q≤2≤p*"
    if ps <= 2 <= q:
        return "p*≤2≤q"
    return "2≤p*,q"


def _setup(m, n, p, q):
    _check_dim(m, n)
    p, q = parse_exponent(p), parse_exponent(q)
    ps = conjugate(p)
    return ps, q, _recip(ps), _recip(q)


def gaussian_formula(m: int, n: int, p, q) -> PredictorValue:
    """Four-case Chevet formula for standard Gaussian matrices (value), unified form in ``unified``."""
    ps, q, b, a = _setup(m, n, p, q)
    rp, rq = math.sqrt(min(ps, Log(n))), math.sqrt(min(q, Log(m)))
    case = _case(ps, q)
    if case == "p*,q≤2":
        col, row = m ** (a - 0.5) * n**b, n ** (b - 0.5) * m**a
    elif case == "q≤2≤p*":
        col, row = rp * n**b * m ** (a - 0.5), m**a
    elif case == "p*≤2≤q":
        col, row = n**b, rq * m**a * n ** (b - 0.5)
    else:
        col, row = rp * n**b, rq * m**a
    unified = rp * m ** _pos(a - 0.5) * n**b + rq * n ** _pos(b - 0.5) * m**a
    return _pv(case, {"col": col, "row": row}, {"q_eff": min(q, Log(m)), "pstar_eff": min(ps, Log(n))}, unified)


def rademacher_formula(m: int, n: int, p, q) -> PredictorValue:
    """Four-case formula for Rademacher matrices (value), unified form in ``unified``."""
    ps, q, b, a = _setup(m, n, p, q)
    case = _case(ps, q)
    if case == "p*,q≤2":
        col, row = m ** (a - 0.5) * n**b, n ** (b - 0.5) * m**a
    elif case == "q≤2≤p*":
        col, row = math.sqrt(min(ps, m)) * m ** (a - 0.5) * n**b, m**a
    elif case == "p*≤2≤q":
        col, row = n**b, math.sqrt(min(q, n)) * n ** (b - 0.5) * m**a
    else:
        col, row = min(ps, m) ** a * n**b, min(q, n) ** b * m**a
    unified = (
        min(ps, m) ** (1.0 / max(q, 2.0)) * m ** _pos(a - 0.5) * n**b
        + min(q, n) ** (1.0 / max(ps, 2.0)) * n ** _pos(b - 0.5) * m**a
    )
    return _pv(case, {"col": col, "row": row}, {"q_eff": min(q, Log(m)), "pstar_eff": min(ps, Log(n))}, unified)


def weibull_formula(m: int, n: int, p, q, r: float) -> PredictorValue:
    """Unified formula for symmetric Weibull(r) matrices with unit scale.

    Bands: ``r < 1`` (heavy tails), ``1 <= r <= 2`` and ``r > 2``.
    """
    ps, q, b, a = _setup(m, n, p, q)
    if not (r > 0 and math.isfinite(r)):
        raise ValueError("r must be positive and finite")
    lp, lq = min(ps, Log(n)), min(q, Log(m))
    ir = 1.0 / r
    if r < 1.0:
        band = "r<1"
        terms = {
            "row_gauss": math.sqrt(lq) * n ** _pos(b - 0.5) * m**a,
            "row_single": lq**ir * m**a,
            "col_gauss": math.sqrt(lp) * m ** _pos(a - 0.5) * n**b,
            "col_single": lp**ir * n**b,
        }
    elif r <= 2.0:
        band = "1≤r≤2"
        terms = {
            "col_weibull": lp**ir * m ** _pos(a - ir) * n**b,
            "col_gauss": math.sqrt(lp) * m ** _pos(a - 0.5) * n**b,
            "row_weibull": lq**ir * n ** _pos(b - ir) * m**a,
            "row_gauss": math.sqrt(lq) * n ** _pos(b - 0.5) * m**a,
        }
    else:
        band = "r>2"
        terms = {
            "col": m ** _pos(a - 0.5) * lp**ir * min(lp, m) ** _pos(1.0 / max(q, 2.0) - ir) * n**b,
            "row": n ** _pos(b - 0.5) * lq**ir * min(lq, n) ** _pos(1.0 / max(ps, 2.0) - ir) * m**a,
        }
    return _pv(f"{band}|{_case(ps, q)}", terms, {"q_eff": lq, "pstar_eff": lp}, details={"r": r})


def square_formula(dist: DistributionSpec, n: int, p, q) -> PredictorValue:
    """Square-matrix formula driven by the moments of ``dist``."""
    ps, q, b, a = _setup(n, n, p, q)
    if ps <= 2 and q <= 2:
        return _pv("p*,q≤2", {"square": n ** (a + b - 0.5) * lp_moment(dist, 2.0)})
    low = min(ps, q)
    order = log_clamp(low, n)
    return _pv("square p*∨q≥2", {"square": n ** _recip(low) * lp_moment(dist, order)}, {"order": order})


def square_simplification(dist: DistributionSpec, n: int, p, q) -> PredictorValue:
    """``n^{1/(p*∧q)} ||X||_{(p*∧q)∧Log n}`` for finite ``p, q`` with ``p*∨q >= 2``."""
    ps, q, b, a = _setup(n, n, p, q)
    if math.isinf(q) or math.isinf(parse_exponent(p)):
        raise ValueError("square_simplification is only defined for finite p and q")
    if max(ps, q) < 2:
        raise ValueError("square_simplification needs p* ∨ q >= 2")
    low = min(ps, q)
    order = log_clamp(low, n)
    return _pv("square p*∨q≥2", {"square": n ** _recip(low) * lp_moment(dist, order)}, {"order": order})
