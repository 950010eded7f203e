"""Finite-difference check of the trace formula on a Dirichlet box.

The box operators H^r and H_0^r are discretised by second-order central
differences on the interior nodes x_i = i h, h = r / (n + 1). Their
spectra come from a symmetric tridiagonal eigensolver, and

    sum f(lam_i(H^r)) - sum f(lam_i(H_0^r))

is compared with int xi^r f', assembled from the exact jump lists.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigvalsh_tridiagonal

from . import _csvio
from .limits import jump_integral
from .potentials import cell_averages, evaluate, tail_integral


@dataclass(frozen=True)
class DiscreteOperator:
    n: int
    h: float
    diagonal: np.ndarray
    off_diagonal: float

    @property
    def nodes(self):
        return self.h * np.arange(1, self.n + 1)

    def eigenvalues(self, select="a", select_range=None):
        off = np.full(self.n - 1, self.off_diagonal)
        return eigvalsh_tridiagonal(self.diagonal, off, select=select, select_range=select_range)

    def count_below(self, lam):
        """Eigenvalues strictly below lam."""
        return int(np.sum(self.eigenvalues() < lam))

    def dense(self):
        return (np.diag(self.diagonal) + np.diag(np.full(self.n - 1, self.off_diagonal), 1)
                + np.diag(np.full(self.n - 1, self.off_diagonal), -1))


def discretize(V, r, n, sampling="average"):
    """Tridiagonal H^r on n interior nodes.

    ``sampling="average"`` uses the mean of V over [x_i - h/2, x_i + h/2],
    which keeps the scheme second order when V jumps between nodes;
    ``"point"`` samples V(x_i).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not r > 0:
        raise ValueError("r must be > 0")
    h = r / (n + 1)
    x = h * np.arange(1, n + 1)
    if sampling == "average":
        edges = np.concatenate(([0.0], x + 0.5 * h))
        edges[-1] = min(edges[-1], r)
        vals = cell_averages(V, edges)
    elif sampling == "point":
        vals = evaluate(V, x)
    else:
        raise ValueError(f"unknown sampling {sampling!r}")
    return DiscreteOperator(n, h, 2.0 / h**2 + vals, -1.0 / h**2)


# -- the admissible f classes --------------------------------------------------


@dataclass(frozen=True)
class TraceFunction:
    """f with closed-form f and f' and a cut-off energy beyond which f' is negligible."""

    kind: str
    params: tuple

    @classmethod
    def heat(cls, t=1.0):
        if not t > 0:
            raise ValueError("heat kernel needs t > 0")
        return cls("heat", (float(t),))

    @classmethod
    def resolvent(cls, z):
        z = complex(z)
        if z.imag == 0:
            raise ValueError("resolvent needs z off the real axis")
        return cls("resolvent", (z.real, z.imag))

    @classmethod
    def spline(cls, knots, values):
        if values[0] != 0 or values[-1] != 0:
            raise ValueError("spline f must vanish at its end knots")
        return cls("spline", (tuple(map(float, knots)), tuple(map(float, values))))

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.kind == "heat":
            return np.exp(-self.params[0] * lam)
        if self.kind == "resolvent":
            x, y = self.params
            d = lam - x
            return d / (d * d + y * y)
        knots, _ = self.params
        inside = (lam >= knots[0]) & (lam <= knots[-1])
        return np.where(inside, self._pp(np.clip(lam, knots[0], knots[-1])), 0.0)

    @property
    def _pp(self):
        knots, values = self.params
        return CubicSpline(knots, values, bc_type="clamped")

    def derivative(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.kind == "heat":
            t = self.params[0]
            return -t * np.exp(-t * lam)
        if self.kind == "resolvent":
            x, y = self.params
            d = lam - x
            return (y * y - d * d) / (d * d + y * y) ** 2
        knots, _ = self.params
        inside = (lam >= knots[0]) & (lam <= knots[-1])
        return np.where(inside, self._pp.derivative()(np.clip(lam, knots[0], knots[-1])), 0.0)

    def tail(self, mu):
        """int_mu^inf f' = -f(mu), since f vanishes at +inf."""
        return -float(self(mu))

    def cutoff_energy(self, bound, eps=1e-14, cap=1e4):
        """Energy above which |f'| * bound < eps (capped)."""
        if self.kind == "spline":
            return self.params[0][-1]
        if self.kind == "heat":
            t = self.params[0]
            lam = max(math.log(max(t * bound, 1.0) / eps) / t, 1.0)
            return min(lam, cap)
        x, y = self.params
        return min(abs(x) + math.sqrt(max(bound, 1.0) / eps), cap)

    def __add__(self, other):
        return TraceSum((self, other))


@dataclass(frozen=True)
class TraceSum:
    """Sum of trace functions (used for linearity checks)."""

    parts: tuple

    def __call__(self, lam):
        return sum(p(lam) for p in self.parts)

    def derivative(self, lam):
        return sum(p.derivative(lam) for p in self.parts)

    def tail(self, mu):
        return sum(p.tail(mu) for p in self.parts)

    def cutoff_energy(self, bound, eps=1e-14, cap=1e4):
        return max(p.cutoff_energy(bound, eps, cap) for p in self.parts)

    def __add__(self, other):
        return TraceSum(self.parts + (other,))


def free_operator(r, n):
    h = r / (n + 1)
    return DiscreteOperator(n, h, np.full(n, 2.0 / h**2), -1.0 / h**2)


def trace_diff(V, r, n, f):
    """sum f(lam_i) over H^r_disc minus the same for H_0^r_disc."""
    if V.is_zero:
        return 0.0
    lam = discretize(V, r, n).eigenvalues()
    lam0 = free_operator(r, n).eigenvalues()
    return math.fsum(np.asarray(f(lam), dtype=float)) - math.fsum(np.asarray(f(lam0), dtype=float))


def trace_rhs(V, r, f, tol=1e-10, lam_max=None):
    """int xi^r f' over the real line, truncated where xi^r f' is negligible.

    xi^r is bounded by the number of free levels plus pi^-1 sup|delta^r|
    plus one; that bound sets the truncation energy.
    """
    if V.is_zero:
        return 0.0
    if lam_max is None:
        bound = tail_integral(V, 0.0) / math.pi + 2.0
        lam_max = f.cutoff_energy(bound)
    return jump_integral(V, r, f.tail, lam_max, tol)


def trace_formula_residual(V, r, n, f, tol=1e-10, lam_max=None):
    """(lhs, rhs, |lhs - rhs|) for the finite-difference trace formula."""
    lhs = trace_diff(V, r, n, f)
    rhs = trace_rhs(V, r, f, tol, lam_max)
    return lhs, rhs, abs(lhs - rhs)


def residual_table(V, r, ns, f, tol=1e-10, target=None):
    """Rows (n, lhs, rhs, residual); rhs is computed once."""
    rhs = trace_rhs(V, r, f, tol)
    rows = []
    for n in ns:
        lhs = trace_diff(V, r, n, f)
        rows.append((int(n), lhs, rhs, abs(lhs - rhs)))
    if target is not None:
        _csvio.write_table(target, ("n", "lhs", "rhs", "residual"), rows,
                           {"potential": V.digest, "r": r, "f": f"{f.kind}{f.params}"})
    return rows
