"""The trace formula against a finite-difference discretisation.

Run: python demos/06_trace_formula.py
"""

# %% sum f(lam_i(H^r)) - sum f(lam_i(H_0^r)) should equal int xi^r f'.
from ssfkit import trace_check as T
from ssfkit import potentials as P

V = P.square_well(4.0, 1.0)
f = T.TraceFunction.heat(1.0)
for n, lhs, rhs, res in T.residual_table(V, 10.0, [500, 1000, 2000, 4000], f):
    print(f"n = {n:5d}   lhs {lhs:.10f}   rhs {rhs:.10f}   residual {res:.2e}")

# %% A weight supported on the negative axis only sees the bound state.
s = T.TraceFunction.spline([-6.0, -3.0, -0.1], [0.0, 1.0, 0.0])
print(T.trace_formula_residual(V, 10.0, 4000, s))
