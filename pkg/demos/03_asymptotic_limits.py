"""Empirical check of the Laplacian regularizers' asymptotic limits.

Samples x_1..x_n uniform on [0,1], sets f(x) = cos(pi x), builds the
all-pairs Gaussian kernel graph at bandwidth sigma = n^(-1/6), and
evaluates the scaled quadratic forms

    (2 / (n^2 sigma^2)) f' L_un f     and     (2 / (n sigma^2)) f' L_nrw f.

Both converge to E[f'(x)^2] = pi^2 / 2 ~ 4.9348 as n grows, which is what
licenses Laplacian smoothing as a local individual-fairness regularizer:
in the large-sample limit it penalizes exactly the metric-weighted output
gradient.

Run: python3 demos/03_asymptotic_limits.py   (about a minute)
"""

import numpy as np

from fairsmooth import SyntheticSpec, analytic_limit, convergence_report

spec = SyntheticSpec(dimension=1, target_function="cosine_product")
limit, _ = analytic_limit(spec)
print(f"analytic limit: pi^2/2 = {limit:.5f}\n")

rows = convergence_report(spec, n_grid=[250, 500, 1000, 2000], seeds=[0, 1, 2])

print(f"{'kind':<24} {'n':>5} {'sigma':>7} {'mean':>8} {'std':>7} {'rel err':>8}")
for r in rows:
    print(
        f"{r['kind']:<24} {r['n']:>5} {r['sigma']:>7.4f} "
        f"{r['empirical_mean']:>8.4f} {r['empirical_std']:>7.4f} "
        f"{r['relative_error']:>8.4f}"
    )

print(
    "\nBoth columns drift toward the limit as n grows.  The unnormalized "
    "form approaches from below (its finite-bandwidth expectation lags the "
    "limit by O(sigma^2), and sigma shrinks slowly at n^(-1/6)); the "
    "normalized random-walk form closes the gap faster."
)
