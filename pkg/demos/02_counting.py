"""Counting box eigenvalues with the Prufer angle.

Run: python demos/02_counting.py
"""

# %% The scaled Prufer angle only crosses multiples of pi upwards; the number of
# crossings on (0, r) is the number of Dirichlet eigenvalues below lambda.
import math

from ssfkit import counting, phase, trace_check
from ssfkit import potentials as P

V = P.square_well(4.0, 1.0)
res = counting.oscillation_count(V, 10.0, 3.0, diagnostics=True)
print(f"N^10(3) = {res.count}, zeros at", [round(z, 4) for z in res.zero_locations])

# %% The same count from a finite-difference matrix.
eigs = trace_check.discretize(V, 10.0, 4000).eigenvalues()
print("matrix count below 3:", int((eigs < 3.0).sum()))

# %% The counting principle: N^r(lambda) = floor((r k + delta^r(k)) / pi).
r, lam = 7.5, 2.3
k = math.sqrt(lam)
print(counting.count(V, r, lam), math.floor((r * k + phase.phase_at(V, k, r)) / math.pi))

# %% Box eigenvalues below zero converge to the half-line bound state.
for r in (2.0, 5.0, 20.0):
    print(f"r = {r:5.1f}:", counting.negative_eigenvalues_box(V, r))
print("half-line:", counting.negative_eigenvalues_halfline(V))

# %% A deeper exponential well has more bound states, still under Bargmann's bound.
W = P.exponential(-10.0, 1.0)
print(counting.negative_eigenvalues_halfline(W), "<=", P.negative_part_moment(W))
