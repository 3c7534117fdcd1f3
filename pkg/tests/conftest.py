import math

import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

INF = math.inf


def _lp(x, p, axis=None):
    x = np.abs(x)
    if p == INF:
        return x.max(axis=axis)
    return (x**p).sum(axis=axis) ** (1.0 / p)


def brute_norm(A, p, q):
    """Reference ``||A||_{p->q}`` for n <= 3 by dense scan plus local polish.

    Deliberately independent of the package: a plain angle scan for n = 2,
    multistart Nelder-Mead on sphere coordinates for n = 3.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if n == 1:
        return _lp(A[:, 0], q)

    def value(t):
        return _lp(A @ t, q) / _lp(t, p)

    if n == 2:
        th = np.linspace(0.0, math.pi, 100_001)
        T = np.stack([np.cos(th), np.sin(th)])
        vals = _lp(A @ T, q, axis=0) / _lp(T, p, axis=0)
        k = int(np.argmax(vals))
        h = th[1] - th[0]
        res = minimize_scalar(
            lambda a: -value(np.array([math.cos(a), math.sin(a)])),
            bounds=(th[k] - h, th[k] + h),
            method="bounded",
            options={"xatol": 1e-13},
        )
        return max(vals[k], -res.fun)

    def sph(x):
        a, b = x
        return np.array([math.sin(a) * math.cos(b), math.sin(a) * math.sin(b), math.cos(a)])

    a = np.linspace(0, math.pi, 121)
    b = np.linspace(0, 2 * math.pi, 241)
    aa, bb = np.meshgrid(a, b, indexing="ij")
    T = np.stack([np.sin(aa) * np.cos(bb), np.sin(aa) * np.sin(bb), np.cos(aa)]).reshape(3, -1)
    vals = _lp(A @ T, q, axis=0) / _lp(T, p, axis=0)
    best = float(vals.max())
    for idx in np.argsort(vals)[-6:]:
        x0 = (aa.ravel()[idx], bb.ravel()[idx])
        res = minimize(lambda x: -value(sph(x)), x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
        best = max(best, -res.fun)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
