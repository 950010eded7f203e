"""Averages of floor differences, and the lemma behind the Cesaro limit.

Run: python demos/05_floor_averages.py
"""

# %% (1/R) int_0^R (floor(x + h(x)) - floor(x)) dx tends to the limit of h.
from ssfkit import limits

h = limits.ProbeFunction.exp(0.3)
for R in (1, 10, 100, 1000):
    print(f"R = {R:5d}: {limits.floor_average(h, R):.6f}")

# %% Integer shifts pass straight through.
print(limits.floor_average(h + 2, 10), limits.floor_average(h, 10) + 2)

# %% Sequences f_n -> f on (0, 1]: the floor-difference integral tends to int f g.
g = limits.TestFunction.hat(0.1, 0.9, 0.4)
for fam in limits.standard_lemma_families() + [limits.slow_lemma_family()]:
    rep = limits.lemma_sequence_check(fam, g, [10, 40, 160, 640])
    print(f"{fam.name:20s}", [f"{e:.1e}" for e in rep.errors])
