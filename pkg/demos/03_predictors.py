# Two-sided formulas for E||X||_{p->q} of an m x n iid matrix.
import math

from opnorm.predict import gaussian_formula, master_rhs, rademacher_formula, square_simplification, weibull_formula
from opnorm.randmat import gaussian, rademacher, weibull

# Gaussian at (2, 2): sqrt(m) + sqrt(n)
print(gaussian_formula(16, 16, 2, 2).value)
print(master_rhs(gaussian(), 16, 16, 2, 2).value)

# which regime fired, and the pieces
pv = master_rhs(weibull(0.5), 64, 16, math.inf, 1)
print(pv.regime, pv.terms, pv.clamp)

# the four-case and unified forms differ only by a constant
for p, q in [(1.5, 1.5), (math.inf, 1.25), (4, 4)]:
    pv = rademacher_formula(64, 64, p, q)
    print(p, q, round(pv.value, 3), round(pv.unified, 3))

# r = 8 already looks a lot like Rademacher
print(weibull_formula(16, 16, 4, 4, 8.0).value, rademacher_formula(16, 16, 4, 4).unified)

# squares: the whole thing collapses to one moment
for d in (gaussian(), rademacher(), weibull(1.0)):
    print(d.label, master_rhs(d, 64, 64, 1.5, 3).value, square_simplification(d, 64, 1.5, 3).value)
