"""Weak and Cesaro convergence of xi^r to xi, and the floor-averaging machinery.

Every integrand here is an integer step function (a difference of floors),
so integrals are assembled from exactly located jumps instead of
quadrature.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import _csvio
from .counting import negative_eigenvalues_halfline, prufer_angle
from .errors import FloorIntegrationError
from .phase import detect_resonance, phase_sweep
from .ssf import free_jumps, perturbed_jumps, ssf_halfline

# -- test functions g ----------------------------------------------------------


@dataclass(frozen=True)
class _Hat:
    a: float
    b: float
    peak: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        up = (x - self.a) / (self.peak - self.a)
        down = (self.b - x) / (self.b - self.peak)
        return np.clip(np.minimum(up, down), 0.0, None)

    def primitive(self, x):
        """int_a^x g."""
        a, b, p = self.a, self.b, self.peak
        x = min(max(x, a), b)
        if x <= p:
            return 0.5 * (x - a) ** 2 / (p - a)
        return 0.5 * (p - a) + 0.5 * ((b - p) - (b - x) ** 2 / (b - p))

    modulus = property(lambda self: 1.0 / min(self.peak - self.a, self.b - self.peak))


@dataclass(frozen=True)
class _Bump:
    center: float
    width: float

    @property
    def a(self):
        return self.center - self.width

    @property
    def b(self):
        return self.center + self.width

    def __call__(self, x):
        t = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(t) < 1
        safe = np.where(inside, t, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe * safe)), 0.0)

    def primitive(self, x):
        x = min(max(x, self.a), self.b)
        return quad(lambda s: float(self(s)), self.a, x, epsabs=1e-13, epsrel=1e-12)[0]

    modulus = property(lambda self: 2.0 / self.width)


@dataclass(frozen=True)
class _Spline:
    knots: tuple
    values: tuple

    @property
    def a(self):
        return self.knots[0]

    @property
    def b(self):
        return self.knots[-1]

    @property
    def _pp(self):
        return CubicSpline(self.knots, self.values, bc_type="clamped")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        return np.where(inside, self._pp(np.clip(x, self.a, self.b)), 0.0)

    def primitive(self, x):
        x = min(max(x, self.a), self.b)
        return float(self._pp.integrate(self.a, x))

    modulus = property(lambda self: float(np.max(np.abs(self._pp.derivative()(
        np.linspace(self.a, self.b, 2001))))))


@dataclass(frozen=True)
class _Uniform:
    """Constant on [a, b], for use on the unit interval only."""

    a: float
    b: float
    height: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), self.height, 0.0)

    def primitive(self, x):
        return self.height * (min(max(x, self.a), self.b) - self.a)

    modulus = property(lambda self: math.inf)


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported weight g: a finite linear combination of shapes."""

    terms: tuple

    __test__ = False  # not a pytest class

    @classmethod
    def hat(cls, a, b, peak=None):
        peak = 0.5 * (a + b) if peak is None else peak
        if not a < peak < b:
            raise ValueError("hat needs a < peak < b")
        return cls(((1.0, _Hat(float(a), float(b), float(peak))),))

    @classmethod
    def bump(cls, center, width):
        return cls(((1.0, _Bump(float(center), float(width))),))

    @classmethod
    def spline(cls, knots, values):
        """Clamped cubic spline; end values must be 0 so g is C^1 on R."""
        if values[0] != 0 or values[-1] != 0:
            raise ValueError("spline test function must vanish at its end knots")
        return cls(((1.0, _Spline(tuple(map(float, knots)), tuple(map(float, values)))),))

    @classmethod
    def uniform(cls, a=0.0, b=1.0, height=1.0):
        return cls(((1.0, _Uniform(float(a), float(b), float(height))),))

    def __add__(self, other):
        return TestFunction(self.terms + other.terms)

    def __rmul__(self, c):
        return TestFunction(tuple((c * w, s) for w, s in self.terms))

    @property
    def support(self):
        return min(s.a for _, s in self.terms), max(s.b for _, s in self.terms)

    @property
    def modulus_bound(self):
        """Lipschitz constant, bounding the modulus of continuity."""
        return sum(abs(w) * s.modulus for w, s in self.terms)

    def __call__(self, x):
        return sum(w * s(x) for w, s in self.terms)

    def integral(self, lo, hi):
        """int_lo^hi g, exact for hats, uniforms and splines."""
        return sum(w * (s.primitive(hi) - s.primitive(lo)) for w, s in self.terms)

    def kinks(self):
        pts = set()
        for _, s in self.terms:
            pts.update((s.a, s.b))
            if isinstance(s, _Hat):
                pts.add(s.peak)
            if isinstance(s, _Spline):
                pts.update(s.knots)
        return sorted(pts)


# -- reports -------------------------------------------------------------------


@dataclass
class ConvergenceReport:
    parameters: list
    observed: list
    targets: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.parameters, dtype=float)
        if np.any(np.diff(p) <= 0):
            raise ValueError("report parameter column must be strictly increasing")

    @property
    def errors(self):
        return [abs(o - t) for o, t in zip(self.observed, self.targets)]

    @property
    def rows(self):
        return list(zip(self.parameters, self.observed, self.targets, self.errors))

    def ratios(self):
        """Successive error ratios e_i / e_{i+1}, recorded, never asserted."""
        e = self.errors
        return [e[i] / e[i + 1] if e[i + 1] else math.inf for i in range(len(e) - 1)]

    def to_csv(self, target, parameter_name="r"):
        return _csvio.write_table(
            target, (parameter_name, "observed", "target", "abs_error"), self.rows, self.metadata
        )


# -- weak convergence ----------------------------------------------------------


def jump_integral(V, r, tail, lam_max, tol=1e-10):
    """int xi^r w for a weight w vanishing above ``lam_max``.

    ``tail(mu)`` must return int_mu^inf w. xi^r = N_0^r - N^r is a step
    function, so each free jump at mu contributes +tail(mu) and each box
    eigenvalue -tail(mu).
    """
    if V.is_zero:
        return 0.0
    total = math.fsum(tail(mu) for mu in free_jumps(r, lam_max))
    return total - math.fsum(tail(e) for e in perturbed_jumps(V, r, lam_max, tol))


def weak_integral(V, r, g, tol=1e-10):
    """int xi^r(lam) g(lam) dlam, exact up to the jump locations."""
    a, b = g.support
    return jump_integral(V, r, lambda mu: g.integral(max(mu, a), b), b, tol)


def halfline_weak_target(V, g, tol=1e-8):
    """int xi(lam) g(lam) dlam for the half-line pair.

    Negative axis: xi = -N is a step function summed exactly over the bound
    states. Positive axis: adaptive quadrature of xi(k^2) g(k^2) 2k over k.
    """
    a, b = g.support
    total = 0.0
    if a < 0:
        for e in negative_eigenvalues_halfline(V, tol):
            if e < 0:
                total -= g.integral(max(e, a), min(b, 0.0))
    if b > 0:
        k_lo, k_hi = math.sqrt(max(a, 0.0)), math.sqrt(b)
        pts = [math.sqrt(p) for p in g.kinks() if max(a, 0.0) < p < b]

        def f(k):
            return ssf_halfline(V, k * k, tol) * float(g(k * k)) * 2.0 * k

        total += quad(f, k_lo, k_hi, points=pts or None, epsabs=tol, epsrel=tol, limit=200)[0]
    return total


def weak_convergence_study(V, g, r_list, tol=1e-10, target_tol=1e-9):
    target = halfline_weak_target(V, g, target_tol)
    obs = [weak_integral(V, r, g, tol) for r in r_list]
    meta = {"potential": V.digest, "g_support": str(g.support), "tol": tol}
    return ConvergenceReport(list(r_list), obs, [target] * len(obs), meta)


# -- Cesaro means --------------------------------------------------------------


def cesaro_jumps(V, lam, R, dr=math.inf, tol=1e-10):
    """Box lengths in (0, R] where r -> xi^r(lam) steps up and down.

    For lam > 0 the up-steps are r = n pi / k and the down-steps the
    crossings of k r + delta^r(k) through multiples of pi, taken from one
    forward sweep of the phase equation. For lam <= 0 only down-steps occur,
    at the zeros of the Dirichlet solution at energy lam.
    """
    if lam > 0:
        k = math.sqrt(lam)
        ups = [n * math.pi / k for n in range(1, math.floor(R * k / math.pi) + 1)]
        downs = phase_sweep(V, k, R, tol, max_step=dr).crossings
    else:
        ups, downs = [], []
        prufer_angle(V, R, lam, tol, zeros=downs, max_step=dr)
    return [u for u in ups if u <= R], [d for d in downs if d <= R]


def cesaro_mean(V, lam, R, dr=math.inf, tol=1e-10):
    """(1/R) int_0^R xi^r(lam) dr, integrated exactly between the r-jumps."""
    if not R > 0:
        raise ValueError("R must be > 0")
    if lam == 0 and not V.is_zero and detect_resonance(V).resonant:
        warnings.warn("Cesaro limit at lambda = 0 is not covered for resonant potentials")
    if V.is_zero:
        return 0.0
    ups, downs = cesaro_jumps(V, lam, R, dr, tol)
    integral = math.fsum(R - u for u in ups) - math.fsum(R - d for d in downs)
    return integral / R


def cesaro_study(V, lam, R_list, dr=math.inf, tol=1e-10):
    target = ssf_halfline(V, lam)
    obs = [cesaro_mean(V, lam, R, dr, tol) for R in R_list]
    meta = {"potential": V.digest, "lambda": lam, "tol": tol}
    return ConvergenceReport(list(R_list), obs, [target] * len(obs), meta)


# -- floor averaging -----------------------------------------------------------


@dataclass(frozen=True)
class ProbeFunction:
    """Bounded h on [0, inf) with known limit at infinity.

    kinds: ``exp``  h = limit + c exp(-rate x);
           ``damped_sine``  h = limit + c sin(omega x) / (1 + x);
           ``step``  h = values[i] on [breaks[i], breaks[i+1]), limit beyond.
    ``offset`` is an integer shift kept separate so that h + k is exact.
    """

    kind: str
    limit: float
    params: tuple = ()
    offset: int = 0

    @classmethod
    def exp(cls, limit, c=1.0, rate=1.0):
        return cls("exp", float(limit), (float(c), float(rate)))

    @classmethod
    def damped_sine(cls, limit, c=1.0, omega=1.0):
        return cls("damped_sine", float(limit), (float(c), float(omega)))

    @classmethod
    def step(cls, breaks, values, limit):
        if len(breaks) != len(values) + 1 or breaks[0] != 0:
            raise ValueError("step probe needs breaks[0] = 0 and len(breaks) = len(values) + 1")
        return cls("step", float(limit), (tuple(map(float, breaks)), tuple(map(float, values))))

    @classmethod
    def constant(cls, a):
        return cls("exp", float(a), (0.0, 1.0))

    def __add__(self, k):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return ProbeFunction(self.kind, self.limit, self.params, self.offset + int(k))

    __radd__ = __add__

    @property
    def sup_abs(self):
        if self.kind == "step":
            return max(abs(v) for v in self.params[1] + (self.limit,)) + abs(self.offset)
        return abs(self.limit) + abs(self.params[0]) + abs(self.offset)

    def base(self, x):
        """h(x) - offset."""
        x = np.asarray(x, dtype=float)
        if self.kind == "exp":
            c, rate = self.params
            return self.limit + c * np.exp(-rate * x)
        if self.kind == "damped_sine":
            c, om = self.params
            return self.limit + c * np.sin(om * x) / (1.0 + x)
        breaks, values = self.params
        idx = np.searchsorted(breaks, x, side="right") - 1
        table = np.append(values, self.limit)
        return table[np.clip(idx, 0, len(values))]

    def __call__(self, x):
        return self.base(x) + self.offset

    def breakpoints(self):
        return list(self.params[0][1:]) if self.kind == "step" else []


def _floor_pieces(phi, lo, hi, spacing, n_samples):
    """Partition [lo, hi] into pieces with floor(phi) constant.

    ``phi`` must be continuous on [lo, hi) (evaluated with a left limit at
    hi). Returns (edges, values).
    """
    n = max(int(math.ceil((hi - lo) / spacing * n_samples)), 1)
    xs = np.linspace(lo, hi, n + 1)
    xs[-1] = np.nextafter(hi, -math.inf) if hi > lo else hi
    ph = np.asarray(phi(xs), dtype=float)
    fl = np.floor(ph)
    edges = [lo]
    for i in np.flatnonzero(fl[1:] != fl[:-1]):
        a, b = xs[i], xs[i + 1]
        up = ph[i + 1] > ph[i]
        levels = range(int(fl[i]) + 1, int(fl[i + 1]) + 1) if up else range(int(fl[i]), int(fl[i + 1]), -1)
        roots = []
        for m in levels:
            fa, fb = ph[i] - m, ph[i + 1] - m
            if fa == 0:
                roots.append(a)
            elif fb == 0:
                roots.append(b)
            else:
                roots.append(brentq(lambda x, m=m: float(phi(x)) - m, a, b, xtol=1e-15, rtol=1e-15))
        edges.extend(sorted(roots))
    edges.append(hi)
    edges = np.array(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    values = np.floor(np.asarray(phi(mids), dtype=float))
    return edges, values


def integrate_floor(phi, reference, lo, hi, primitive, spacing, breakpoints=(), n_samples=16,
                    max_refine=4):
    """int_lo^hi (floor(phi) - floor(reference)) w, with W = primitive of w.

    ``reference`` is linear and increasing; its integer crossings and the
    given breakpoints partition the domain. The piece partition is checked
    by re-evaluating floor(phi) inside every piece; failures trigger
    refinement, then :class:`FloorIntegrationError`.
    """
    cuts = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
    total = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        for attempt in range(max_refine + 1):
            edges, values = _floor_pieces(phi, a, b, spacing, n_samples * 2**attempt)
            ok = _pieces_consistent(phi, edges, values)
            if ok:
                break
        else:
            raise FloorIntegrationError(f"could not isolate floor crossings on [{a}, {b}]")
        edges, values = _merge_reference(edges, values, reference, a, b)
        prims = np.array([primitive(e) for e in edges])
        total.append(math.fsum(values * np.diff(prims)))
    return math.fsum(total)


def _pieces_consistent(phi, edges, values):
    widths = np.diff(edges)
    # quarter points: a missed pair of crossings shows up as a value mismatch
    for frac in (0.25, 0.75):
        pts = edges[:-1] + frac * widths
        if np.any(np.floor(np.asarray(phi(pts), dtype=float)) != values):
            return False
    return True


def _merge_reference(edges, values, reference, a, b):
    """Refine pieces at integer crossings of reference; return floor differences."""
    ra, rb = reference(a), reference(b)
    slope = (rb - ra) / (b - a) if b > a else 1.0
    ints = np.arange(math.floor(ra) + 1, math.ceil(rb))
    cross = a + (ints - ra) / slope
    all_edges = np.union1d(edges, cross[(cross > a) & (cross < b)])
    # crossings of phi and of the reference that agree to round-off are one edge
    keep = np.concatenate(([True], np.diff(all_edges) > 1e-13 * (1.0 + np.abs(all_edges[1:]))))
    keep[-1] = True
    all_edges = all_edges[keep]
    mids = 0.5 * (all_edges[:-1] + all_edges[1:])
    pos = np.searchsorted(edges, mids, side="right") - 1
    diff = values[np.clip(pos, 0, len(values) - 1)] - np.floor(ra + slope * (mids - a))
    return all_edges, diff


def floor_average(h, R, n_samples=16):
    """(1/R) int_0^R (floor(x + h(x)) - floor(x)) dx, exact piecewise."""
    if not R > 0:
        raise ValueError("R must be > 0")
    integral = integrate_floor(
        lambda x: np.asarray(x) + h.base(x),
        lambda x: x,
        0.0,
        float(R),
        lambda x: x,
        1.0,
        h.breakpoints(),
        n_samples,
    )
    return integral / R + h.offset


def riemann_floor_average(h, R, step=1e-5):
    """Midpoint Riemann sum of the floor-average integrand (brute-force oracle)."""
    n = int(round(R / step))
    total = 0.0
    for chunk in np.array_split(np.arange(n), max(n // 200000, 1)):
        x = (chunk + 0.5) * (R / n)
        total += np.sum(np.floor(x + h(x)) - np.floor(x))
    return total * (R / n) / R


# -- lemma harness -------------------------------------------------------------


@dataclass
class LemmaFamily:
    """A sequence f_n -> f on (0, 1] with majorant F, indexed by r_n.

    ``f_n(x, r)`` and ``f(x)`` must be vectorised.
    """

    name: str
    f_n: callable
    f: callable
    majorant: callable
    breakpoints: callable = None

    def check(self, g, r_list, n=4001):
        x = np.linspace(1e-6, 1.0, n)
        F = self.majorant(x)
        for r in r_list:
            if np.any(np.abs(self.f_n(x, r)) > F * (1 + 1e-12) + 1e-12):
                raise ValueError(f"family {self.name!r} violates its majorant at r = {r}")
        val, err = quad(lambda s: float(self.majorant(s) * abs(g(s))), 0.0, 1.0, limit=200)
        if not math.isfinite(val):
            raise ValueError(f"family {self.name!r}: majorant is not |g|-integrable")


def lemma_integral(family, g, r, n_samples=16):
    """int_0^1 (floor(r x + f_n(x)) - floor(r x)) g(x) dx, exact piecewise."""
    a, b = max(g.support[0], 0.0), min(g.support[1], 1.0)
    bps = list(family.breakpoints(r)) if family.breakpoints else []
    bps += [p for p in g.kinks() if a < p < b]
    return integrate_floor(
        lambda x: r * np.asarray(x) + family.f_n(x, r),
        lambda x: r * x,
        a,
        b,
        lambda x: g.integral(a, x),
        1.0 / r,
        bps,
        n_samples,
    )


def lemma_sequence_check(family, g, r_list, n_samples=16):
    family.check(g, r_list)
    a, b = max(g.support[0], 0.0), min(g.support[1], 1.0)
    pts = [p for p in g.kinks() if a < p < b]
    target = quad(lambda x: float(family.f(x) * g(x)), a, b, points=pts or None,
                  epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    obs = [lemma_integral(family, g, r, n_samples) for r in r_list]
    return ConvergenceReport(list(r_list), obs, [target] * len(obs), {"family": family.name})


def standard_lemma_families():
    """Five closed-form families satisfying the lemma's hypotheses."""
    f = lambda x: 0.4 + 0.2 * np.asarray(x)  # noqa: E731
    fams = [
        LemmaFamily(
            "exp-boundary-layer",
            lambda x, r: f(x) + 0.5 * np.exp(-r * np.asarray(x)),
            f,
            lambda x: 1.1 + 0 * np.asarray(x),
        ),
        LemmaFamily(
            "capped-inverse",
            lambda x, r: f(x) + np.minimum(2.0 / (r * np.maximum(np.asarray(x), 1e-300)), 3.0),
            f,
            lambda x: 3.6 + 0 * np.asarray(x),
        ),
        LemmaFamily(
            "algebraic-decay",
            lambda x, r: f(x) + 1.0 / (1.0 + r * np.asarray(x)),
            f,
            lambda x: 1.6 + 0 * np.asarray(x),
        ),
        LemmaFamily(
            "uniform-shift",
            lambda x, r: f(x) + 3.0 / r,
            f,
            lambda x: 0.6 + 3.0 / 10.0 + 0 * np.asarray(x),
        ),
        LemmaFamily(
            "oscillating-decay",
            lambda x, r: f(x) + 2.0 * np.sin(3.0 * r * np.asarray(x)) / (1.0 + r * np.asarray(x)),
            f,
            lambda x: 2.6 + 0 * np.asarray(x),
        ),
    ]
    return fams


def slow_lemma_family():
    """An admissible family whose perturbation decays only like (r x)^(-1/2)."""
    f = lambda x: 0.4 + 0.2 * np.asarray(x)  # noqa: E731
    return LemmaFamily(
        "sqrt-singular",
        lambda x, r: f(x) + np.minimum(1.0 / np.sqrt(r * np.maximum(np.asarray(x), 1e-300)), 2.0),
        f,
        lambda x: 2.6 + 0 * np.asarray(x),
    )
