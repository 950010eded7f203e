"""The box function converges to the half-line one weakly and in Cesaro mean.

Run: python demos/04_weak_and_cesaro.py
"""

# %% Weak convergence: integrate against a hat supported in (0.5, 2.5).
from ssfkit import limits, ssf
from ssfkit import potentials as P

V = P.square_well(4.0, 1.0)
g = limits.TestFunction.hat(0.5, 2.5)
rep = limits.weak_convergence_study(V, g, [10, 20, 40, 80, 160])
for r, obs, target, err in rep.rows:
    print(f"r = {r:5.0f}   {obs: .8f}   target {target: .8f}   error {err:.2e}")
print("successive error ratios:", [round(x, 2) for x in rep.ratios()])

# %% Pointwise, xi^r(lambda) keeps oscillating in r; its running mean over r converges.
for lam in (1.0, 0.0, -0.2):
    rep = limits.cesaro_study(V, lam, [50, 100, 200, 500])
    print(f"lambda = {lam}: target {ssf.ssf_halfline(V, lam): .6f}, errors",
          [f"{e:.1e}" for e in rep.errors])

# %% At lambda = 0 the Dirichlet solution has one zero at 1 - tan(2)/2, so the
# mean is exactly -(R - 2.0925)/R.
print(limits.cesaro_mean(V, 0.0, 100.0))
