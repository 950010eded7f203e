"""Eigenvalue counting for Dirichlet problems by Sturm oscillation.

For the box (0, r) the number of eigenvalues strictly below lambda equals
the number of zeros in (0, r) of the solution with u(0) = 0, u'(0) = 1.
Zeros are counted through the scaled Prufer angle, tan(theta) = s u / u',

    theta' = s cos(theta)**2 + ((lambda - V) / s) sin(theta)**2,  theta(0) = 0,

which only ever crosses multiples of pi upwards. Where V vanishes the angle
is propagated in closed form.

All counts are strict (left-continuous in lambda): an eigenvalue equal to
lambda is not counted.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

from scipy.optimize import brentq

from . import _csvio
from ._ode import pieces, solve_piece, upward_crossings
from .errors import SlowConvergenceError
from .potentials import negative_part_moment

DEFAULT_TOL = 1e-10


@dataclass
class CountingResult:
    count: int
    zero_locations: list = field(default_factory=list)
    lam: float = 0.0
    r: float = 0.0

    def __int__(self):
        return self.count


def free_count(r, lam):
    """N_0^r(lambda) = #{n >= 1 : (n pi / r)**2 < lambda}."""
    if not r > 0:
        raise ValueError("r must be > 0")
    if lam <= 0:
        return 0
    x = r * math.sqrt(lam) / math.pi
    n = math.floor(x)
    if n >= 1 and (n * math.pi / r) ** 2 >= lam:
        n -= 1
    return max(n, 0)


def default_scale(lam):
    return max(1.0, math.sqrt(abs(lam)))


def _remap(theta, a, b):
    """Prufer angle at scale a -> scale b, keeping its pi-window."""
    n = math.floor(theta / math.pi)
    phi = theta - n * math.pi
    return n * math.pi + math.atan2(b * math.sin(phi), a * math.cos(phi))


def _free_gap(theta, lam, s, L, x0, zeros):
    """Closed-form Prufer propagation over a stretch where V = 0."""
    if lam > 0:
        c = math.sqrt(lam)
        tc = _remap(theta, s, c)
        if zeros is not None:
            j = math.floor(tc / math.pi) + 1
            while (j * math.pi - tc) / c <= L:
                zeros.append(x0 + (j * math.pi - tc) / c)
                j += 1
        return _remap(tc + c * L, c, s)
    u0, du0 = math.sin(theta) / s, math.cos(theta)
    if lam == 0:
        u1, du1 = u0 + du0 * L, du0
        t_zero = -u0 / du0 if du0 != 0 else math.inf
    else:
        kap = math.sqrt(-lam)
        th = math.tanh(kap * L)
        u1, du1 = u0 + du0 / kap * th, u0 * kap * th + du0
        rho = -kap * u0 / du0 if du0 != 0 else math.inf
        t_zero = math.atanh(rho) / kap if 0 < rho < 1 else math.inf
    crossed = 0 < t_zero <= L
    if crossed and zeros is not None:
        zeros.append(x0 + t_zero)
    phi = math.atan2(s * u1, du1) % math.pi
    return (math.floor(theta / math.pi) + int(crossed)) * math.pi + phi


def _prufer_rhs(lam, s):
    def rhs(x, y, vw, w):
        c = math.cos(y[0])
        sn = math.sin(y[0])
        return [s * c * c * w + (lam * w - vw) / s * sn * sn]

    return rhs


def prufer_angle(V, r, lam, tol=DEFAULT_TOL, scale=None, zeros=None, max_step=math.inf):
    """theta(r) for energy lam; appends zero locations to ``zeros`` if given."""
    s = default_scale(lam) if scale is None else scale
    rhs = _prufer_rhs(lam, s)
    theta = 0.0
    for seg, a, b in pieces(V, 0.0, float(r)):
        if seg is None:
            theta = _free_gap(theta, lam, s, b - a, a, zeros)
            continue
        y, sol = solve_piece(
            seg, a, b, rhs, [theta], tol, dense=zeros is not None, max_step=max_step
        )
        if zeros is not None:
            zeros.extend(upward_crossings(sol, lambda x: 0.0, lambda v: math.floor(v / math.pi)))
        theta = float(y[0])
    return theta


def _strict_count(theta, snap):
    x = theta / math.pi
    n = round(x)
    if abs(x - n) <= snap:
        return max(n - 1, 0)
    return max(math.floor(x), 0)


def oscillation_count(V, r, lam, tol=DEFAULT_TOL, diagnostics=False):
    """N^r(lam): eigenvalues of the Dirichlet box (0, r) strictly below lam.

    A Prufer angle within ``100 * tol * max(1, r)`` (in units of pi) of a
    multiple of pi is read as an eigenvalue located exactly at lam.
    """
    if not r > 0:
        raise ValueError("r must be > 0")
    zeros = [] if diagnostics else None
    theta = _prufer_count_angle(V, float(r), float(lam), float(tol), zeros)
    count = _strict_count(theta, 100.0 * tol * max(1.0, r))
    if zeros is not None:
        zeros = [z for z in zeros if z < r][:count]
    return CountingResult(count, zeros or [], lam, r)


def _prufer_count_angle(V, r, lam, tol, zeros):
    if zeros is not None:
        return prufer_angle(V, r, lam, tol, zeros=zeros)
    return _cached_angle(V, r, lam, tol)


@lru_cache(maxsize=65536)
def _cached_angle(V, r, lam, tol):
    return prufer_angle(V, r, lam, tol)


def count(V, r, lam, tol=DEFAULT_TOL):
    return oscillation_count(V, r, lam, tol).count


# -- eigenvalues ---------------------------------------------------------------


def spectrum_floor(V, r, tol=DEFAULT_TOL):
    """A lambda with no box eigenvalue below it."""
    lo = V.min_value - 1.0 if math.isfinite(V.min_value) else -1.0
    while count(V, r, lo, tol) > 0:
        lo = 2.0 * lo - 1.0
    return lo


def box_eigenvalues(V, r, lam_max, tol=DEFAULT_TOL, lam_min=None):
    """Sorted Dirichlet eigenvalues of the box (0, r) in [lam_min, lam_max).

    Brackets come from bisection on the counting function; each bracket
    holding one eigenvalue (index j) is refined by Brent's method on the
    continuous, increasing map lam -> theta_s(r; lam) - j pi at a fixed
    scale s.
    """
    return list(_box_eigenvalues(V, float(r), float(lam_max), float(tol),
                                 None if lam_min is None else float(lam_min)))


@lru_cache(maxsize=4096)
def _box_eigenvalues(V, r, lam_max, tol, lam_min):
    lo = spectrum_floor(V, r, tol) if lam_min is None else lam_min
    c_lo, c_hi = count(V, r, lo, tol), count(V, r, lam_max, tol)
    out = []
    stack = [(lo, c_lo, lam_max, c_hi)]
    while stack:
        a, ca, b, cb = stack.pop()
        if cb == ca:
            continue
        if cb - ca == 1 or b - a <= tol:
            out.append(_refine(V, r, a, b, cb, tol))
            continue
        m = 0.5 * (a + b)
        cm = count(V, r, m, tol)
        stack.append((m, cm, b, cb))
        stack.append((a, ca, m, cm))
    return tuple(sorted(out))


def _refine(V, r, a, b, j, tol):
    s = default_scale(b)

    def g(lam):
        return prufer_angle(V, r, lam, tol, scale=s) - j * math.pi

    ga, gb = g(a), g(b)
    if ga >= 0:
        return a
    if gb <= 0:
        return b
    return brentq(g, a, b, xtol=tol, rtol=1e-15)


def negative_eigenvalues_box(V, r, tol=DEFAULT_TOL):
    """All eigenvalues < 0 of the Dirichlet box (0, r), sorted."""
    return box_eigenvalues(V, r, 0.0, tol)


def negative_eigenvalues_halfline(V, tol=1e-8, r0=25.0, r_cap=1600.0):
    """Bound states of the half-line operator, as limits of box eigenvalues.

    r doubles from r0 until two successive lists have equal length and
    agree elementwise within tol.
    """
    return list(_halfline(V, float(tol), float(r0), float(r_cap)))


@lru_cache(maxsize=512)
def _halfline(V, tol, r0, r_cap):
    bound = negative_part_moment(V)
    ode_tol = min(DEFAULT_TOL, 0.01 * tol)
    r = r0
    prev = negative_eigenvalues_box(V, r, ode_tol)
    while True:
        r *= 2.0
        cur = negative_eigenvalues_box(V, r, ode_tol)
        if len(cur) > bound:
            raise SlowConvergenceError(
                f"box count {len(cur)} exceeds the Bargmann bound {bound:g}", prev, cur
            )
        if len(cur) == len(prev) and all(abs(x - y) <= tol for x, y in zip(prev, cur)):
            return tuple(cur)
        if r >= r_cap:
            raise SlowConvergenceError("half-line eigenvalues did not stabilise", prev, cur)
        prev = cur


def halfline_count(V, lam, tol=1e-8):
    """N(lam) for lam < 0: half-line bound states strictly below lam."""
    if not lam < 0:
        raise ValueError("halfline_count needs lam < 0")
    return sum(1 for e in negative_eigenvalues_halfline(V, tol) if e < lam)


def counts_to_csv(target, triples, metadata=None):
    """Write (lambda, r, count) triples."""
    return _csvio.write_table(target, ("lambda", "r", "count"), triples, metadata)
