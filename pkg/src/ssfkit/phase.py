"""Scattering phase shifts by the variable-phase method, and the Jost function.

The truncated phase delta^r(k) solves

    d/dr delta = -(V(r) / k) * sin(k r + delta)**2,    delta(0) = 0,

and is returned unwrapped (continuous in r, never reduced mod pi). Beyond
the support of V the right-hand side vanishes, so compactly supported
potentials only need the ODE over their support. The full phase is the
truncated one at a radius where the tail bound ``tail_integral(V, R) / k``
is below tolerance.

Convention: delta(k) -> 0 as k -> inf and delta(k) = -arg F(k), with F the
Jost function, so that Levinson's theorem reads delta(0+) = pi * m.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _csvio
from ._ode import pieces, solve_piece, upward_crossings
from .errors import InconclusiveError, TailTooSlowError
from .potentials import tail_integral

CONVENTION = "delta(0 at infinity), continuous"
DEFAULT_TOL = 1e-10
R_CAP = 1e4


def _phase_rhs(k):
    def rhs(x, y, vw, w):
        s = math.sin(k * x + y[0])
        return [-(vw / k) * s * s]

    return rhs


def phase_at(V, k, r, tol=DEFAULT_TOL):
    """Truncated phase delta^r(k) of the cut-off potential V^r."""
    if not k > 0:
        raise ValueError("phase_at needs k > 0")
    if r < 0:
        raise ValueError("r must be >= 0")
    return _phase_at(V, float(k), float(min(r, V.support_radius)), float(tol))


@lru_cache(maxsize=65536)
def _phase_at(V, k, r, tol):
    delta = 0.0
    rhs = _phase_rhs(k)
    for seg, a, b in pieces(V, 0.0, r):
        if seg is not None:
            delta = float(solve_piece(seg, a, b, rhs, [delta], tol)[0][0])
    return delta


@dataclass
class PhaseSweep:
    """delta^r(k) for every r in [0, R] from one forward integration.

    ``crossings`` are the r in (0, R] where ``k r + delta^r(k)`` passes a
    positive multiple of pi (always upward).
    """

    k: float
    R: float
    final: float
    crossings: list
    _pieces: list

    def delta(self, r):
        for seg_sol, a, b, d0 in self._pieces:
            if a <= r <= b:
                return d0 if seg_sol is None else float(seg_sol(r)[0])
        return self.final


def phase_sweep(V, k, R, tol=DEFAULT_TOL, max_step=math.inf):
    """Integrate the phase equation once over [0, R], recording level crossings."""
    rhs = _phase_rhs(k)
    delta = 0.0
    crossings = []
    stored = []

    def level(v):
        return math.floor(v / math.pi)

    for seg, a, b in pieces(V, 0.0, float(R)):
        if seg is None:
            th0, th1 = k * a + delta, k * b + delta
            for j in range(level(th0) + 1, level(th1) + 1):
                crossings.append((j * math.pi - delta) / k)
            stored.append((None, a, b, delta))
            continue
        y, sol = solve_piece(seg, a, b, rhs, [delta], tol, dense=True, max_step=max_step)
        crossings.extend(upward_crossings(sol, lambda x: k * x, level))
        stored.append((sol, a, b, delta))
        delta = float(y[0])
    return PhaseSweep(k, float(R), delta, crossings, stored)


def truncation_radius(V, target, cap=R_CAP):
    """Smallest R with tail_integral(V, R) <= target (the support if finite)."""
    supp = V.support_radius
    if math.isfinite(supp):
        return supp
    if tail_integral(V, 0.0) <= target:
        return 0.0
    hi = 1.0
    while tail_integral(V, hi) > target:
        hi *= 2.0
        if hi > cap:
            raise TailTooSlowError(
                f"tail integral still above {target:g} at R = {cap:g}"
            )
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if tail_integral(V, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def full_phase(V, k, tol=1e-8, cap=R_CAP):
    """Half-line phase shift delta(k) with a certified error bound.

    The radius R is chosen so that ``tail_integral(V, R) / k <= tol / 2``.
    The solver tolerance is ``tol / 2`` shared over the integration length
    with a safety factor, since RK local tolerances do not bound the global
    error one-to-one; the returned bound is the tail term plus ``tol / 2``.
    """
    if not k > 0:
        raise ValueError("full_phase needs k > 0")
    R = truncation_radius(V, 0.5 * tol * k, cap)
    ode_tol = max(0.5 * tol / (20.0 * max(1.0, R)), 1e-13)
    value = phase_at(V, k, R, ode_tol)
    bound = tail_integral(V, R) / k + (0.5 * tol if not V.is_zero else 0.0)
    return value, bound


# -- phase curves --------------------------------------------------------------


@dataclass
class PhaseCurve:
    momenta: np.ndarray
    values: np.ndarray
    truncation_radius: float
    error_bounds: np.ndarray
    convention_tag: str = CONVENTION

    def rows(self):
        return zip(self.momenta, self.values, self.error_bounds)

    def to_csv(self, target, metadata=None):
        meta = {"convention": self.convention_tag, "truncation_radius": self.truncation_radius}
        meta.update(metadata or {})
        return _csvio.write_table(target, ("k", "delta", "error_bound"), self.rows(), meta)

    @classmethod
    def from_csv(cls, source):
        meta, header, rows = _csvio.read_table(source)
        if header != ["k", "delta", "error_bound"]:
            raise ValueError(f"unexpected PhaseCurve header {header}")
        arr = np.array(rows, dtype=float).reshape(-1, 3)
        return cls(
            arr[:, 0], arr[:, 1], float(meta.get("truncation_radius", "nan")), arr[:, 2],
            meta.get("convention", CONVENTION),
        )


def phase_curve(V, momenta, r=None, tol=DEFAULT_TOL, max_refine=20):
    """delta^r on a momentum grid, refined until neighbours differ by < pi/2.

    With ``r=None`` the radius is chosen from the smallest momentum so that
    every point obeys the full-phase tail criterion at ``tol``.
    """
    ks = np.unique(np.asarray(momenta, dtype=float))
    if ks.size == 0 or ks[0] <= 0:
        raise ValueError("momenta must be positive")
    if r is None:
        r = truncation_radius(V, 0.5 * tol * ks[0])
    vals = [phase_at(V, k, r, tol) for k in ks]
    ks = list(ks)
    for _ in range(max_refine):
        jumps = [i for i in range(len(ks) - 1) if abs(vals[i + 1] - vals[i]) >= math.pi / 2]
        if not jumps:
            break
        for i in reversed(jumps):
            km = 0.5 * (ks[i] + ks[i + 1])
            ks.insert(i + 1, km)
            vals.insert(i + 1, phase_at(V, km, r, tol))
    ks = np.array(ks)
    tail = tail_integral(V, r)
    return PhaseCurve(ks, np.array(vals), float(r), tail / ks)


# -- Jost function -------------------------------------------------------------


@dataclass(frozen=True)
class JostValue:
    k: float
    value: complex

    @property
    def modulus(self):
        return abs(self.value)

    @property
    def argument(self):
        return math.atan2(self.value.imag, self.value.real)


def _jost_rhs(k):
    k2 = k * k

    def rhs(x, y, vw, w):
        return [y[1] * w, (vw - k2 * w) * y[0]]

    return rhs


def jost_radius(V, k, tol):
    """Start point X for backward integration: tail_integral(V, X) <= tol * max(k, 1)."""
    return truncation_radius(V, tol * max(k, 1.0))


def jost(V, k, tol=DEFAULT_TOL):
    """Jost function F(k) = f(0, k), f the solution asymptotic to exp(i k x)."""
    if k < 0:
        raise ValueError("jost needs k >= 0")
    k = float(k)
    X = jost_radius(V, k, tol)
    if k > 0:
        e = complex(math.cos(k * X), math.sin(k * X))
        y = np.array([e, 1j * k * e], dtype=complex)
    else:
        y = np.array([1.0 + 0j, 0j])
    rhs = _jost_rhs(k)
    for seg, a, b in reversed(pieces(V, 0.0, X)):
        if seg is None:
            L = b - a
            c = math.cos(k * L)
            sk = math.sin(k * L) / k if k > 0 else L
            y = np.array([c * y[0] - sk * y[1], k * k * sk * y[0] + c * y[1]])
        else:
            y = solve_piece(seg, a, b, rhs, y, tol, backward=True)[0]
    return JostValue(k, complex(y[0]))


@dataclass(frozen=True)
class Resonance:
    resonant: bool
    witness: float

    def __str__(self):
        return ("Resonant" if self.resonant else "NonResonant") + f" (|F(0)| = {self.witness:.6g})"


def detect_resonance(V, tol=1e-8):
    """Zero-energy resonance test: resonant iff |F(0)| <= tol."""
    witness = jost(V, 0.0, min(tol, DEFAULT_TOL)).modulus
    return Resonance(witness <= tol, witness)


# -- Levinson ------------------------------------------------------------------


@dataclass(frozen=True)
class LevinsonCount:
    """Extrapolated delta(0+)/pi and its interpretation.

    ``resonant`` marks a half-integer limit; then ``bound_states`` is the
    integer part.
    """

    bound_states: int
    resonant: bool
    ratio: float

    def __int__(self):
        return self.bound_states


def extrapolate_zero(ks, values):
    """Richardson table for a geometric grid k_j = k0 2^-j, error a1 k + a2 k^2 + ..."""
    table = list(values)
    ratio = ks[0] / ks[1]
    for p in range(1, len(table)):
        f = ratio**p
        table = [(f * table[i + 1] - table[i]) / (f - 1.0) for i in range(len(table) - 1)]
    return table[0]


def levinson_count(V, tol=0.05, k0=0.05, levels=5, phase_tol=1e-9):
    """Bound-state count m = delta(0+)/pi from the k -> 0 limit of the phase.

    The phase ODE is never evaluated at k = 0: delta(k_j) for
    ``k_j = k0 * 2**-j`` is extrapolated to zero.
    """
    ks = [k0 * 2.0**-j for j in range(levels)]
    values = [full_phase(V, k, phase_tol)[0] for k in ks]
    # only the first three correction orders: beyond that the table amplifies ODE noise
    depth = min(levels, 4)
    ratio = extrapolate_zero(ks[-depth:], values[-depth:]) / math.pi
    nearest = round(ratio)
    if abs(ratio - nearest) <= tol:
        return LevinsonCount(int(nearest), False, ratio)
    half = math.floor(ratio) + 0.5
    if abs(ratio - half) <= tol:
        return LevinsonCount(int(math.floor(ratio)), True, ratio)
    raise InconclusiveError(
        f"delta(0+)/pi = {ratio:.6f} is within {tol} of neither an integer nor a half-integer"
    )
