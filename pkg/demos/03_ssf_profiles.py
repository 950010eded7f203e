"""The spectral shift function of the half-line pair and of a box.

Run: python demos/03_ssf_profiles.py [output.csv]
"""

# %% On the negative axis xi = -N; on the positive axis xi = -delta / pi.
import sys

import numpy as np

from ssfkit import ssf
from ssfkit import potentials as P

V = P.square_well(4.0, 1.0)
for lam in (-3.0, -0.2, 0.0, 1.0, 25.0):
    print(f"xi({lam:5.1f}) = {ssf.ssf_halfline(V, lam): .6f}")

# %% The box function is an integer staircase: free count minus perturbed count.
grid = np.linspace(-1.0, 6.0, 15)
print([ssf.ssf_box(V, 10.0, lam) for lam in grid])

# %% A profile keeps track of where the steps are; values on a step take the left limit.
prof = ssf.ssf_box_profile(V, 10.0, ssf.default_energy_grid(V, 10.0, 400))
print(len(prof.free_jumps), "free jumps,", len(prof.perturbed_jumps), "perturbed jumps below 10")
if len(sys.argv) > 1:
    prof.to_csv(sys.argv[1], {"potential": V.digest})
