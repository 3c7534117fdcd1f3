# Monte Carlo: how far is the empirical mean from the formula?
#
# Set OPNORM_THREADS to use more processes; the output does not change.
import math
import sys

from opnorm.experiment import ExperimentGrid, ratio_summary, records_to_csv, run_grid
from opnorm.randmat import gaussian, rademacher, weibull

grid = ExperimentGrid(
    dists=[gaussian(), rademacher(), weibull(1.0), weibull(0.5)],
    sizes=[(16, 16), (64, 64)],
    exponents=[(2, 2), (math.inf, 1), (1, math.inf), (4, 1.5), (1.5, 4)],
    trials=10,
    master_seed=1,
)

records = run_grid(grid)
sys.stdout.write(records_to_csv(records))

# constants hidden in "~" show up as the spread of these ratios
for k, v in ratio_summary(records, key="dist").items():
    print(f"{k:28s} ratios in [{v['min_ratio']:.2f}, {v['max_ratio']:.2f}], spread {v['spread']:.2f}")
