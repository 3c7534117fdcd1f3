# Brackets for ||A||_{p->q}: exact at the corners, an interval elsewhere.
import math

import numpy as np

from opnorm import bracket, oracle_norm

A = np.array([[1.0, -2.0], [3.0, 4.0]])

# p = 1 is a corner: the largest column in the q-norm
print(bracket(A, 1, math.inf))      # [4, 4]

# (3, 4) is not, so we get power iteration below and interpolation above
b = bracket(A, 3, 4)
print(b)

# two columns is small enough to just scan the unit sphere
print("scan:", oracle_norm(A, 3, 4))

# all-ones matrices have a closed form m^{1/q} n^{1/p*}
J = np.ones((2, 2))
print(bracket(J, 3, 4).lower, 2 ** (1 / 4) * 2 ** (2 / 3))

# on a bigger random matrix the interval is wider, most of all when q > p
G = np.random.default_rng(0).standard_normal((64, 64))
for p, q in [(4, 4), (4, 1.5), (1.5, 4)]:
    b = bracket(G, p, q)
    print(p, q, round(b.lower, 3), round(b.upper, 3), b.upper_method)
