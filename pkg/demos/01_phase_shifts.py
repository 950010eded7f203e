"""Phase shifts of a square well, the Jost function and Levinson's count.

Run: python demos/01_phase_shifts.py
"""

# %% Setup: a well of depth 4 and width 1 holds one bound state.
import cmath
import math

import numpy as np

from ssfkit import phase
from ssfkit import potentials as P

V = P.square_well(4.0, 1.0)
print("first moment   ", P.first_moment(V))
print("Bargmann bound ", P.negative_part_moment(V))

# %% The variable-phase equation, integrated out to the edge of the well.
for k in (0.1, 0.5, 1.0, 3.0, 10.0):
    delta, bound = phase.full_phase(V, k)
    print(f"k = {k:5.2f}   delta = {delta: .10f}   (certified error <= {bound:.1e})")

# %% Against the Jost function: exp(i delta) F / |F| should be 1.
for k in (0.5, 2.0):
    F = phase.jost(V, k)
    delta = phase.full_phase(V, k)[0]
    print(f"k = {k}: |exp(i delta) F/|F| - 1| = {abs(cmath.exp(1j * delta) * F.value / F.modulus - 1):.1e}")

# %% A phase curve, refined until neighbouring samples differ by less than pi/2.
curve = phase.phase_curve(V, np.geomspace(0.05, 10, 25))
print("phase at the smallest k, in units of pi:", curve.values[0] / math.pi)

# %% delta(0+) / pi counts bound states, unless there is a zero-energy resonance.
print(phase.levinson_count(V))
print(phase.detect_resonance(V))
tuned = P.square_well((math.pi / 2) ** 2, 1.0)
print("tuned well:", phase.detect_resonance(tuned), phase.levinson_count(tuned))
