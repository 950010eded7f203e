"""Spectral shift functions of the half-line pair and of its box truncations.

Normalisation: both functions vanish below the spectrum, and the
left-continuous representative is used throughout.

Half-line:  xi(lam) = -N(lam) for lam < 0,  xi(lam) = -delta(sqrt(lam)) / pi for lam > 0,
            xi(0) = -N(0) (the left limit).
Box (0, r): xi^r(lam) = -N^r(lam) for lam <= 0 and, for lam > 0,
            xi^r(lam) = floor(r k / pi) - floor((r k + delta^r(k)) / pi),  k = sqrt(lam),
            i.e. N_0^r(lam) - N^r(lam), a difference of two integer staircases.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _csvio
from .counting import (
    box_eigenvalues,
    count,
    free_count,
    halfline_count,
    negative_eigenvalues_box,
    negative_eigenvalues_halfline,
)
from .errors import JumpAmbiguityError
from .phase import detect_resonance, full_phase, levinson_count, phase_at

GUARD = 1e-9


class ResonanceWarning(UserWarning):
    """xi(0) requested for a potential with a zero-energy resonance."""


def _left_floor(x):
    """floor, made left-continuous: integer arguments map to x - 1."""
    n = math.floor(x)
    return n - 1 if n == x else n


def ssf_halfline(V, lam, tol=1e-8):
    """xi(lam) for the half-line pair (H_0, H)."""
    if lam < 0:
        return float(-halfline_count(V, lam, tol))
    if lam == 0:
        if V.is_zero:
            return 0.0
        res = detect_resonance(V)
        if res.resonant:
            warnings.warn(f"zero-energy resonance: {res}", ResonanceWarning, stacklevel=2)
            return float(-len(negative_eigenvalues_halfline(V, tol)))
        return float(-levinson_count(V).bound_states)
    return -full_phase(V, math.sqrt(lam), tol)[0] / math.pi


def ssf_box(V, r, lam, tol=1e-10, guard=GUARD, on_ambiguity="left"):
    """xi^r(lam) for the Dirichlet box (0, r); an integer.

    When the perturbed floor argument lies within ``guard`` of an integer the
    phase is recomputed at a tighter tolerance; if it is still ambiguous the
    left-limit value is returned (``on_ambiguity="left"``) or
    :class:`JumpAmbiguityError` is raised (``"raise"``).
    """
    if not r > 0:
        raise ValueError("r must be > 0")
    if lam <= 0:
        return -count(V, r, lam, tol)
    k = math.sqrt(lam)
    free = free_count(r, lam)
    theta = (r * k + phase_at(V, k, r, tol)) / math.pi
    n = round(theta)
    if abs(theta - n) <= guard:
        fine = max(tol * 1e-3, 1e-14)
        theta = (r * k + phase_at(V, k, r, fine)) / math.pi
        if abs(theta - n) <= guard:
            if on_ambiguity == "raise":
                raise JumpAmbiguityError(
                    f"floor argument {theta!r} at lambda={lam!r} is within {guard} of {n}",
                    (free - (n - 1), free - n),
                )
            return free - (n - 1)
    return free - _left_floor(theta)


# -- jumps ---------------------------------------------------------------------


def free_jumps(r, lam_max):
    """Jumps of N_0^r in (0, lam_max): (n pi / r)**2."""
    n_max = free_count(r, lam_max)
    return [(n * math.pi / r) ** 2 for n in range(1, n_max + 1)]


def perturbed_jumps(V, r, lam_max, tol=1e-10, lam_split=None):
    """Jumps of N^r below lam_max, i.e. the box eigenvalues.

    Negative ones come from the counting module. Positive ones are the
    solutions of r k + delta^r(k) = j pi, bracketed on a k-grid and refined
    by Brent's method; below ``lam_split`` (tiny k, where the phase
    equation degenerates) the Prufer route is used instead.
    """
    out = list(negative_eigenvalues_box(V, r, tol))
    if lam_max <= 0:
        return [e for e in out if e < lam_max]
    k_split = math.pi / (8.0 * r) if lam_split is None else math.sqrt(lam_split)
    k_max = math.sqrt(lam_max)
    if k_split >= k_max:
        return out + box_eigenvalues(V, r, lam_max, tol, lam_min=0.0)
    out += box_eigenvalues(V, r, k_split**2, tol, lam_min=0.0)
    out += [k * k for k in _theta_roots(V, r, k_split, k_max, tol)]
    return out


def _theta_roots(V, r, k_lo, k_hi, tol):
    """k in (k_lo, k_hi) with r k + delta^r(k) crossing a multiple of pi."""

    def theta(k):
        return r * k + phase_at(V, k, r, tol)

    n = max(int(math.ceil((k_hi - k_lo) * r / (math.pi / 4))), 1)
    ks = np.linspace(k_lo, k_hi, n + 1)
    th = [theta(k) for k in ks]
    roots = []
    for i in range(n):
        l0, l1 = _left_floor(th[i] / math.pi), _left_floor(th[i + 1] / math.pi)
        # left floors: the jump at ks[i] itself belongs to the previous cell
        for j in range(l0 + 1, l1 + 1):
            target = j * math.pi
            a, b = ks[i], ks[i + 1]
            fa, fb = th[i] - target, th[i + 1] - target
            if fa >= 0:
                roots.append(a)
            elif fb == 0:
                roots.append(b)
            else:
                roots.append(brentq(lambda k: theta(k) - target, a, b, xtol=1e-14, rtol=1e-15))
    return [k for k in roots if k_lo < k < k_hi]


# -- profiles ------------------------------------------------------------------


@dataclass
class SsfProfile:
    lambdas: np.ndarray
    values: np.ndarray
    r: float = None
    free_jumps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    perturbed_jumps: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def jump_locations(self):
        return np.sort(np.concatenate((self.free_jumps, self.perturbed_jumps)))

    def is_jump(self, tol=GUARD):
        jumps = self.jump_locations
        if jumps.size == 0:
            return np.zeros(self.lambdas.shape, dtype=bool)
        idx = np.clip(np.searchsorted(jumps, self.lambdas), 1, jumps.size - 1)
        near = np.minimum(abs(jumps[idx] - self.lambdas), abs(jumps[idx - 1] - self.lambdas))
        return near <= tol * (1.0 + abs(self.lambdas))

    def to_csv(self, target, metadata=None):
        meta = {"r": "halfline" if self.r is None else self.r}
        meta.update(metadata or {})
        rows = zip(self.lambdas, self.values, self.is_jump())
        return _csvio.write_table(target, ("lambda", "value", "is_jump"), rows, meta)


def ssf_box_profile(V, r, lambda_grid, tol=1e-10):
    """xi^r on a sorted grid, plus every jump location below the grid's end."""
    grid = np.asarray(lambda_grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("lambda grid must be sorted")
    values = np.array([ssf_box(V, r, lam, tol) for lam in grid], dtype=float)
    top = np.nextafter(grid[-1], math.inf)
    prof = SsfProfile(
        grid,
        values,
        float(r),
        np.array(free_jumps(r, top)),
        np.array(sorted(perturbed_jumps(V, r, top, tol))),
    )
    # a grid point on a jump takes the left limit, read off the jump lists
    for i in np.flatnonzero(prof.is_jump()):
        lam = grid[i]
        prof.values[i] = _count_below(prof.free_jumps, lam) - _count_below(prof.perturbed_jumps, lam)
    return prof


def _count_below(jumps, lam):
    """Jumps strictly left of lam, treating those within the guard as at lam."""
    jumps = np.asarray(jumps)
    return int(np.sum(jumps < lam - GUARD * (1.0 + abs(lam))))


def ssf_halfline_profile(V, lambda_grid, tol=1e-8):
    grid = np.asarray(lambda_grid, dtype=float)
    values = np.array([ssf_halfline(V, lam, tol) for lam in grid])
    return SsfProfile(grid, values, None, np.zeros(0), np.array(negative_eigenvalues_halfline(V, tol)))


def default_energy_grid(V, lam_max, n=2000):
    """Uniform below 0, geometric over (0, lam0], uniform above.

    The interval starts at ``-max(0, max V_-) - 1``.
    """
    lo = min(V.min_value, 0.0) - 1.0
    if not math.isfinite(lo):
        lo = -10.0
    n_neg = n // 4
    n_geo = n // 4
    n_uni = n - n_neg - n_geo - 1
    lam0 = min(1.0, lam_max / 10.0)
    neg = np.linspace(lo, 0.0, n_neg, endpoint=False)
    geo = np.geomspace(1e-6 * lam0, lam0, n_geo)
    uni = np.linspace(lam0, lam_max, n_uni + 1)[1:]
    return np.concatenate((neg, [0.0], geo, uni))
