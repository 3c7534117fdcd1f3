# Entry laws: moments, log-tails and the moment doubling constant.
import math

from opnorm.randmat import check_regularity, gaussian, log_tail, log_tail_inverse, lp_moment, rademacher, weibull

laws = [gaussian(), rademacher(), weibull(2.0), weibull(1.0), weibull(0.5)]

for d in laws:
    row = [round(lp_moment(d, rho), 4) for rho in (1, 2, 4, 8)]
    print(f"{d.label:28s} moments {row}")

# N(t) = -ln P(|X| >= t) and its generalized inverse
w = weibull(2.0)
print(log_tail(w, 2.0), log_tail_inverse(w, 4.0))
print(log_tail_inverse(gaussian(), 8.0))

# ||X||_{2rho} / ||X||_rho creeps up to 2^{1/r} for Weibull(r)
for r in (0.5, 1.0, 2.0):
    rep = check_regularity(weibull(r))
    print(r, round(rep.alpha1_grid, 4), rep.alpha1, 2 ** (1 / r), rep.consistent)

print(check_regularity(gaussian()).alpha1, math.sqrt(2))
