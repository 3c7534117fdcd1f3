"""Certified brackets for the operator norm ``||A||_{p->q} = sup_{||t||_p <= 1} ||At||_q``.

Exponents are floats in ``[1, inf]`` with ``math.inf`` as the only representation
of infinity, so corner cases are detected exactly.

Lower bounds always come from an explicit feasible vector (so they are values
``||At||_q / ||t||_p``); upper bounds come from closed-form corners, complex
interpolation between exactly computable corners, and identity embeddings
``||I_n||_{p->r} = n^{max(0, 1/r - 1/p)}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NormBracket",
    "parse_exponent",
    "conjugate",
    "as_matrix",
    "lp_norm",
    "embedding_norm",
    "corner_norm",
    "vertex_norm",
    "power_iteration_lower",
    "interpolation_upper",
    "oracle_norm",
    "bracket",
]

INF = math.inf
GRID = (1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0, INF)
MAX_ITER = 500
# sign-vector enumeration is used when (#vertices * m * n) stays below this
VERTEX_BUDGET = 1 << 24
# same, for the auxiliary grid points feeding the upper bound
GRID_VERTEX_BUDGET = 1 << 16

LOWER_METHODS = ("corner_exact", "power_iteration", "vertex_enum")
UPPER_METHODS = ("corner_exact", "interpolation", "frobenius_fallback", "vertex_enum")


@dataclass(frozen=True)
class NormBracket:
    lower: float
    upper: float
    lower_method: str
    upper_method: str

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def exact(self) -> bool:
        return self.upper - self.lower <= 1e-9 * self.upper

    def scaled(self, c: float) -> NormBracket:
        c = abs(c)
        return NormBracket(c * self.lower, c * self.upper, self.lower_method, self.upper_method)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "lower_method": self.lower_method,
            "upper_method": self.upper_method,
        }


def parse_exponent(p) -> float:
    """Validate an exponent; accepts numbers or the strings ``"inf"``/``"infinity"``."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "+inf", "infinity", "∞"):
            return INF
        try:
            p = float(s)
        except ValueError:
            raise ValueError(f"not an exponent: {p!r}") from None
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


def conjugate(p: float) -> float:
    """Hölder conjugate ``p*`` with ``1/p + 1/p* = 1``."""
    p = parse_exponent(p)
    if p == 1.0:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def _recip(p):
    return 0.0 if p == INF else 1.0 / p


def as_matrix(A) -> np.ndarray:
    """Validate ``A`` as a finite real 2-D array with positive dimensions."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def lp_norm(x, p: float, axis=None):
    x = np.abs(np.asarray(x, dtype=np.float64))
    if p == INF:
        return np.max(x, axis=axis)
    if p == 1.0:
        return np.sum(x, axis=axis)
    if p == 2.0:
        return np.sqrt(np.sum(x * x, axis=axis))
    # rescale by the max entry so large p cannot overflow
    peak = np.max(x, axis=axis, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    out = np.sum((x / safe) ** p, axis=axis, keepdims=True) ** (1.0 / p) * peak
    return np.squeeze(out, axis=axis) if axis is not None else float(out.squeeze())


def embedding_norm(dim: int, p: float, r: float) -> float:
    """``||I||_{l_p^dim -> l_r^dim} = dim^{max(0, 1/r - 1/p)}``."""
    return float(dim) ** max(0.0, _recip(r) - _recip(p))


# --------------------------------------------------------------------------
# exact corners


def _spectral_norm(A):
    return float(np.linalg.svd(A, compute_uv=False)[0])


def corner_norm(A, p, q) -> float | None:
    """Exact ``||A||_{p->q}`` at closed-form corners, else ``None``.

    Corners: ``p = 1`` (largest column q-norm), ``q = inf`` (largest row
    p*-norm) and ``p = q = 2`` (largest singular value).
    """
    A = as_matrix(A)
    p, q = parse_exponent(p), parse_exponent(q)
    if p == 1.0:
        return float(np.max(lp_norm(A, q, axis=0)))
    if q == INF:
        return float(np.max(lp_norm(A, conjugate(p), axis=1)))
    if p == 2.0 and q == 2.0:
        return _spectral_norm(A)
    return None


def _sign_vectors(k, chunk=4096):
    """All ``{-1, 1}^k`` vectors with first entry +1, as row blocks."""
    total = 1 << (k - 1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        bits = (idx[:, None] >> np.arange(k - 1, dtype=np.int64)) & 1
        yield np.hstack([np.ones((len(idx), 1)), 1.0 - 2.0 * bits])


def vertex_norm(A, p, q, budget: int = VERTEX_BUDGET) -> float | None:
    """Exact norm by sign-vector enumeration, when cheap enough.

    For ``p = inf`` the maximum of the convex map ``t -> ||At||_q`` over the
    cube sits at a vertex; for ``q = 1`` the same holds for the transpose
    problem ``||A^T||_{inf -> p*}``.  Returns ``None`` if neither applies or
    the enumeration exceeds ``VERTEX_BUDGET``.
    """
    A = as_matrix(A)
    p, q = parse_exponent(p), parse_exponent(q)
    m, n = A.shape
    options = []
    if p == INF:
        options.append((n, A, q))
    if q == 1.0:
        options.append((m, A.T, conjugate(p)))
    options = [o for o in options if (1 << (o[0] - 1)) * m * n <= budget]
    if not options:
        return None
    k, M, r = min(options, key=lambda o: o[0])
    best = 0.0
    for block in _sign_vectors(k, chunk=max(1, (1 << 20) // max(m, n))):
        best = max(best, float(np.max(lp_norm(block @ M.T, r, axis=1))))
    return best


# --------------------------------------------------------------------------
# lower bound: nonlinear power iteration


def _duality_map(X, r):
    """Columnwise ``sign(x) |x|^{r-1} / ||x||_r^{r-1}``; unit r*-norm, pairs to ``||x||_r``."""
    if r == 1.0:
        return np.sign(X)
    nx = lp_norm(X, r, axis=0)
    safe = np.where(nx > 0, nx, 1.0)
    return np.sign(X) * (np.abs(X) / safe) ** (r - 1.0)


def _sphere_samples(n, count, p, seed):
    rng = np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 64) - 1)))
    T = rng.standard_normal((n, count))
    return T / lp_norm(T, p, axis=0)


def _ratio(A, T, p, q):
    num = lp_norm(A @ T, q, axis=0)
    den = lp_norm(T, p, axis=0)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def power_iteration_lower(A, p, q, restarts: int = 8, tol: float = 1e-10, seed: int = 0, starts=None) -> float:
    """Lower bound from the nonlinear power method for ``||A||_{p->q}``.

    Iterates ``t <- J_{p*}(A^T J_q(A t))`` where ``J_r`` is the l_r duality
    map.  Each step cannot decrease ``||At||_q``.  Restart 1 starts at the
    column with largest q-norm (lowest index on ties), plus the maximizer
    of the exact ``(p, inf)`` corner; the rest start at seeded random
    directions and ``starts`` may add extra columns.  Stops when every
    restart's value changes by less than ``tol`` relative, or after 500 steps.
    """
    A = as_matrix(A)
    p, q = parse_exponent(p), parse_exponent(q)
    if p == 1.0 or q == INF:
        raise ValueError("p = 1 and q = inf are exact corners; use corner_norm")
    if not tol > 0:
        raise ValueError("tol must be positive")
    restarts = int(restarts)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    m, n = A.shape
    ps = conjugate(p)

    first = np.zeros((n, 1))
    first[int(np.argmax(lp_norm(A, q, axis=0))), 0] = 1.0
    # maximizer of the exact (p, inf) corner, so the result is >= ||A||_{p->inf}
    row = A[int(np.argmax(lp_norm(A, ps, axis=1)))][:, None]
    blocks = [first, _duality_map(row, ps) if np.any(row) else first]
    if restarts > 1:
        blocks.append(_sphere_samples(n, restarts - 1, p, seed))
    if starts is not None:
        S = np.asarray(starts, dtype=np.float64).reshape(n, -1)
        blocks.append(S / np.where(lp_norm(S, p, axis=0) > 0, lp_norm(S, p, axis=0), 1.0))
    T = np.hstack(blocks)

    values = _ratio(A, T, p, q)
    best = float(values.max())
    for _ in range(MAX_ITER):
        Z = A.T @ _duality_map(A @ T, q)
        T_new = _duality_map(Z, ps)
        dead = ~np.any(T_new != 0, axis=0)
        T_new[:, dead] = T[:, dead]
        new_values = _ratio(A, T_new, p, q)
        converged = np.all(np.abs(new_values - values) <= tol * np.maximum(new_values, 1e-300))
        T, values = T_new, new_values
        best = max(best, float(values.max()))
        if converged:
            break
    return best


# --------------------------------------------------------------------------
# upper bound: interpolation between exact corners


def _corner_table(A, grid_p, grid_q):
    """Exactly computable corner values as ``(1/p, 1/q, value)`` rows."""
    rows = []
    col = {qq: float(np.max(lp_norm(A, qq, axis=0))) for qq in grid_q}
    for qq, v in col.items():
        rows.append((1.0, _recip(qq), v))
    for pp in grid_p:
        if pp == 1.0:
            continue  # (1, inf) already present
        rows.append((_recip(pp), 0.0, float(np.max(lp_norm(A, conjugate(pp), axis=1)))))
    rows.append((0.5, 0.5, _spectral_norm(A)))
    return np.array(rows)


def _interpolate(table, x, y):
    """Best Riesz-Thorin bound at reciprocal exponents ``(x, y)``; ``inf`` if unreachable."""
    X, Y, V = table[:, 0], table[:, 1], table[:, 2]
    i, j = np.triu_indices(len(table), k=1)
    dx, dy = X[i] - X[j], Y[i] - Y[j]
    vx, vy = x - X[j], y - Y[j]
    dd = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = (vx * dx + vy * dy) / dd
    resid = np.hypot(vx - theta * dx, vy - theta * dy)
    ok = (dd > 0) & (resid <= 1e-12) & (theta >= -1e-12) & (theta <= 1 + 1e-12)
    # a table point coinciding with the target
    hit = np.hypot(X - x, Y - y) <= 1e-12
    best = float(V[hit].min()) if hit.any() else INF
    if ok.any():
        th = np.clip(theta[ok], 0.0, 1.0)
        with np.errstate(divide="ignore"):
            logs = th * np.log(V[i][ok]) + (1 - th) * np.log(V[j][ok])
        best = min(best, float(np.exp(logs.min())))
    return best


def _upper_candidates(A, p, q, grid=GRID, exact_points=None):
    """Return ``(bound, method)`` minimizing over all certified candidates."""
    m, n = A.shape
    gp = sorted(set(grid) | {p})
    gq = sorted(set(grid) | {q})
    table = _corner_table(A, gp, gq)
    exact_points = exact_points or {}

    best, method = INF, "frobenius_fallback"
    for pp in gp:
        for qq in gq:
            if (pp, qq) in exact_points:
                base, how = exact_points[(pp, qq)], "vertex_enum"
            else:
                base, how = _interpolate(table, _recip(pp), _recip(qq)), "interpolation"
            if not math.isfinite(base):
                continue
            factor = embedding_norm(n, p, pp) * embedding_norm(m, qq, q)
            cand = factor * base
            if cand < best:
                best = cand
                method = how if factor == 1.0 else "frobenius_fallback"

    # rank-one part plus spectral remainder: ||s1 u v^T||_{p->q} + ||I||_{p->2} s2 ||I||_{2->q}
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rest = s[1] if len(s) > 1 else 0.0
    cand = s[0] * lp_norm(U[:, 0], q) * lp_norm(Vt[0], conjugate(p)) + embedding_norm(n, p, 2.0) * rest * embedding_norm(m, 2.0, q)
    if cand < best:
        best, method = float(cand), "frobenius_fallback"
    return best, method


def interpolation_upper(A, p, q) -> float:
    """Certified upper bound for ``||A||_{p->q}``.

    Minimum over: Riesz-Thorin interpolation between exact corners
    ``(1, r)``, ``(r, inf)`` and ``(2, 2)`` on a fixed exponent grid (plus the
    targets), those bounds transported along identity embeddings, and a
    rank-one-plus-remainder bound.  Exact corner endpoints have the same value
    over the complex field, so the complex interpolation theorem applies.
    """
    A = as_matrix(A)
    p, q = parse_exponent(p), parse_exponent(q)
    return _upper_candidates(A, p, q)[0]


# --------------------------------------------------------------------------
# brute-force oracle


def _sphere_points(angles, n, p):
    if n == 2:
        X = np.stack([np.cos(angles[0]), np.sin(angles[0])])
    else:
        th, ph = angles
        X = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    return X / lp_norm(X, p, axis=0)


def oracle_norm(A, p, q, resolution: int = 720) -> float:
    """Independent brute-force estimate of ``||A||_{p->q}`` for ``n <= 3``.

    Scans an angular grid of the unit sphere (radially projected onto the
    l_p sphere), then polishes the best few grid points by local pattern
    search.  For ``p = inf`` the cube vertices are scored as well, since a
    convex function on the cube peaks at one of them and the angular grid
    never lands on them exactly.  The result is always an attained value, so
    it never exceeds the true norm.  Test use only.
    """
    A = as_matrix(A)
    p, q = parse_exponent(p), parse_exponent(q)
    m, n = A.shape
    if n > 3:
        raise ValueError("oracle_norm supports at most 3 columns")
    if n == 1:
        return float(lp_norm(A[:, 0], q))
    resolution = int(resolution)
    if resolution < 4:
        raise ValueError("resolution must be >= 4")

    def value(angles):
        size = len(angles[0])
        out = np.empty(size)
        for a in range(0, size, 1 << 16):
            T = _sphere_points([g[a : a + (1 << 16)] for g in angles], n, p)
            out[a : a + (1 << 16)] = lp_norm(A @ T, q, axis=0)
        return out

    if n == 2:
        step = math.pi / resolution
        grid = [np.arange(resolution) * step]  # t and -t give the same value
        steps = [step]
    else:
        th = (np.arange(resolution) + 0.5) * (math.pi / resolution)
        ph = np.arange(2 * resolution) * (math.pi / resolution)
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        grid = [TH.ravel(), PH.ravel()]
        steps = [math.pi / resolution, math.pi / resolution]
    vals = value(grid)
    order = np.argsort(vals)[::-1][:8]
    best = float(vals[order[0]])
    if p == INF:
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)))
        V = np.hstack([np.ones((len(signs), 1)), signs]).T
        best = max(best, float(np.max(lp_norm(A @ V, q, axis=0))))

    offsets1 = np.linspace(-1.0, 1.0, 9)
    O1, O2 = np.meshgrid(offsets1, offsets1, indexing="ij")
    for k in order:
        center = [g[k] for g in grid]
        h = list(steps)
        cur = float(vals[k])
        # pattern search: move while the window improves, shrink when the center wins
        for _ in range(400):
            if n == 2:
                cand = [center[0] + h[0] * offsets1]
            else:
                cand = [center[0] + h[0] * O1.ravel(), center[1] + h[1] * O2.ravel()]
            cv = value(cand)
            j = int(np.argmax(cv))
            if cv[j] > cur:
                cur = float(cv[j])
                center = [c[j] for c in cand]
            else:
                h = [x * 0.25 for x in h]
                if h[0] < 1e-13:
                    break
        best = max(best, cur)
    return best


# --------------------------------------------------------------------------
# bracket


def bracket(A, p, q, restarts: int = 8, tol: float = 1e-10, seed: int = 0) -> NormBracket:
    """Certified ``[lower, upper]`` containing ``||A||_{p->q}``."""
    A = as_matrix(A)
    p, q = parse_exponent(p), parse_exponent(q)
    exact = corner_norm(A, p, q)
    if exact is not None:
        return NormBracket(exact, exact, "corner_exact", "corner_exact")

    # exact vertex values on the interpolation grid keep upper bounds monotone
    exact_points = {}
    for pp, qq in itertools.product(sorted(set(GRID) | {p}), sorted(set(GRID) | {q})):
        if (pp == INF or qq == 1.0) and corner_norm(A, pp, qq) is None:
            budget = VERTEX_BUDGET if (pp, qq) == (p, q) else GRID_VERTEX_BUDGET
            v = vertex_norm(A, pp, qq, budget=budget)
            if v is not None:
                exact_points[(pp, qq)] = v

    upper, upper_method = _upper_candidates(A, p, q, exact_points=exact_points)
    if (p, q) in exact_points:
        lower, lower_method = exact_points[(p, q)], "vertex_enum"
    else:
        lower = power_iteration_lower(A, p, q, restarts=restarts, tol=tol, seed=seed)
        lower_method = "power_iteration"
    # both are floating-point evaluations of certified quantities
    if lower > upper:
        upper = lower
    return NormBracket(float(lower), float(upper), lower_method, upper_method)
