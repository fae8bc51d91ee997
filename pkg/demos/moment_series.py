"""Moment series for a run of variable steps followed by check steps.

Compares the truncated series, its tail bound and a Monte Carlo estimate
with the exact engine value.  The series converges slowly when the base
state has atoms close to 1, which is visible in the printed error.
"""

from polarce import bsc_density, polarize
from polarce.bsc import q_base_check_state
from polarce.series import MomentProvider, ba_series, mc_product_estimate

p = 0.1
for q, ell in ((2, 0), (2, 2), (3, 1)):
    exact = polarize(bsc_density(p), "1" * q + "0" * ell)
    m = MomentProvider(q_base_check_state(p, q))
    print(f"q={q} l={ell} exact={exact:.10f}")
    for K in (30, 300, 3000):
        value, bound = ba_series(m, 2**ell, K)
        print(f"   K={K:5d} series={value:.10f} error={value - exact:.2e} bound={bound:.2e}")
    mean, se = mc_product_estimate(2 ** (q - 1), 2**ell, p, 200_000, seed=7)
    print(f"   Monte Carlo {mean:.6f} +- {se:.1e}")
