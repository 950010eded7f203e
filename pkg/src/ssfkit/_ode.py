"""Piecewise ODE driver shared by the phase, Prufer and Jost integrators.

``[lo, hi]`` is split into potential segments and gaps where V vanishes.
Segments are integrated with an embedded Runge-Kutta 5(4) pair
(``scipy.integrate.solve_ivp``, method ``RK45``); gaps are handled by the
caller in closed form.

Right-hand sides have the signature ``rhs(x, y, vw, w)`` where ``w = dx/dt``
and ``vw = V(x) * dx/dt``. On regular segments ``t = x`` so ``w = 1``. On
segments with an integrable endpoint singularity ``|x - a|**(-alpha)`` the
variable ``t = |x - a|**(1 - alpha)`` makes ``vw`` constant, so the solver
never evaluates V at the singular point.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SingularIntegrationError

METHOD = "RK45"


def pieces(V, lo, hi):
    """Cover ``[lo, hi]`` by ``(segment_or_None, a, b)`` in increasing x."""
    out = []
    x = lo
    for seg in V.segments:
        if seg.end <= x:
            continue
        if seg.start >= hi:
            break
        a = max(seg.start, x)
        b = min(seg.end, hi)
        if a > x:
            out.append((None, x, a))
        out.append((seg, a, b))
        x = b
    if x < hi:
        out.append((None, x, hi))
    return out


class _Chart:
    """Map between the integration variable t and x on one segment piece."""

    def __init__(self, seg, a, b):
        self.seg = seg
        side = seg.singular
        if side == "left" and a == seg.start or side == "right" and b == seg.end:
            coeff, alpha, anchor = seg.params
            self.q = 1.0 - alpha
            self.anchor = anchor
            self.sigma = 1.0 if side == "left" else -1.0
            self.vw_const = self.sigma * coeff / self.q
            self.singular = True
        else:
            self.singular = False

    def t_of(self, x):
        if not self.singular:
            return x
        return abs(x - self.anchor) ** self.q

    def x_of(self, t):
        if not self.singular:
            return t
        return self.anchor + self.sigma * max(t, 0.0) ** (1.0 / self.q)

    def wrap(self, rhs):
        seg = self.seg
        if not self.singular:
            value = seg.value
            return lambda t, y: rhs(t, y, value(t), 1.0)
        q, vw, sigma = self.q, self.vw_const, self.sigma
        expo = (1.0 - q) / q

        def f(t, y):
            t = max(t, 0.0)
            return rhs(self.x_of(t), y, vw, sigma * t**expo / q)

        return f


class PieceSolution:
    """Dense solution of one segment piece, addressed by x."""

    def __init__(self, chart, sol):
        self.chart = chart
        self.sol = sol

    @property
    def xs(self):
        return np.array([self.chart.x_of(t) for t in self.sol.t])

    @property
    def ys(self):
        return self.sol.y

    def __call__(self, x):
        return self.sol.sol(self.chart.t_of(x))

    def t_of(self, x):
        return self.chart.t_of(x)

    def at_t(self, t):
        return self.sol.sol(t)


# solve_ivp silently raises smaller relative tolerances to this floor
RTOL_FLOOR = 100 * np.finfo(float).eps


def solve_piece(seg, a, b, rhs, y0, tol, backward=False, dense=False, max_step=math.inf):
    """Integrate ``rhs`` over the piece, from a to b (or b to a if backward).

    Returns ``(y_end, PieceSolution or None)``.
    """
    chart = _Chart(seg, a, b)
    ta, tb = chart.t_of(a), chart.t_of(b)
    span = (tb, ta) if backward else (ta, tb)
    if chart.singular:
        max_step = math.inf
    sol = solve_ivp(
        chart.wrap(rhs),
        span,
        np.asarray(y0),
        method=METHOD,
        rtol=max(tol, RTOL_FLOOR),
        atol=tol,
        dense_output=dense,
        max_step=max_step,
    )
    if sol.status != 0:
        raise SingularIntegrationError(sol.message, chart.x_of(float(sol.t[-1])))
    return sol.y[:, -1], (PieceSolution(chart, sol) if dense else None)


def upward_crossings(piece, offset_fn, level_of, y_index=0):
    """Locate x where ``y + offset_fn(x)`` crosses multiples of pi upward.

    ``level_of(value)`` maps the angle to its floor level. Only crossings
    between consecutive accepted steps are searched, each by a bracketing
    root finder on the dense interpolant.
    """
    from scipy.optimize import brentq

    ts = piece.sol.t
    chart = piece.chart
    vals = [piece.sol.y[y_index, i] + offset_fn(chart.x_of(t)) for i, t in enumerate(ts)]
    found = []
    for i in range(len(ts) - 1):
        l0, l1 = level_of(vals[i]), level_of(vals[i + 1])
        for j in range(l0 + 1, l1 + 1):
            target = j * math.pi

            def g(t):
                return piece.at_t(t)[y_index] + offset_fn(chart.x_of(t)) - target

            t0, t1 = ts[i], ts[i + 1]
            g0, g1 = g(t0), g(t1)
            if g0 >= 0:
                root = t0
            elif g1 <= 0:
                root = t1
            else:
                root = brentq(g, t0, t1, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            found.append(chart.x_of(root))
    return found
