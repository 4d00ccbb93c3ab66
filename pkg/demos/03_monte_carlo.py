"""
Checking interval coverage by simulation
========================================

Small Monte Carlo runs of the rank-based intervals and of the studentized
estimator. The acceptance suite runs larger versions of the same
experiments; these sizes finish in a few seconds.

Run with ``python3 demos/03_monte_carlo.py``.
"""

# %%
import wassdep as wd

SEED = 20240601

# %%
# Coverage of nominal 95% intervals for d1 in two settings.
print("setting    n     coverage  mean LB  mean UB")
for name in ("setting1", "setting3"):
    for n in (200, 1000):
        rep = wd.run_coverage(name, "d1", "rank", n=n, reps=400, seed=SEED)
        print(f"{rep.setting:9s}  {n:4d}  {100 * rep.coverage:6.1f}%   {rep.mean_lower:.4f}   {rep.mean_upper:.4f}")

# %%
# Studentized errors sqrt(n) (estimate - truth) / zeta should look standard
# normal. Shrinkage pulls the median toward zero.
print("\nshrinkage  mean    median  sd      ks")
for shrinkage in (None, "ds1", "ds2"):
    pp = wd.run_pp("setting3", "d1", "gaussian", shrinkage, n=200, reps=600, seed=SEED)
    print(f"{pp.shrinkage.value:9s}  {pp.mean:+.3f}  {pp.median:+.3f}  {pp.sd:.3f}  {pp.ks:.3f}")
