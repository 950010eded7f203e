"""Short-range potentials on the half-line built from closed-form pieces.

A :class:`PotentialSpec` is an ordered tuple of disjoint :class:`Segment`
objects. Outside every segment the potential vanishes. Each segment kind has
closed-form integrals, so first moments, tail integrals and the Bargmann
moment are exact rather than quadrature estimates.

Segment kinds
-------------
``constant``     V = value on a finite interval
``exponential``  V = amplitude * exp(-rate * x), rate > 0
``sech2``        V = amplitude * sech(x / scale)**2
``power``        V = coeff * |x - anchor|**(-alpha), 0 < alpha < 1, with the
                 anchor at or beyond one endpoint (singular if at it)
``tabulated``    linear interpolation of (xs, values) samples
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InadmissiblePotentialError

__all__ = [
    "Segment",
    "PotentialSpec",
    "zero",
    "square_well",
    "constant",
    "exponential",
    "sech2",
    "power_law",
    "tabulated",
    "evaluate",
    "first_moment",
    "tail_integral",
    "negative_part_moment",
    "cutoff",
    "scaled",
]

KINDS = ("constant", "exponential", "sech2", "power", "tabulated")
LN2 = math.log(2.0)


def _log_cosh(y):
    y = abs(y)
    return y + math.log1p(math.exp(-2.0 * y)) - LN2


def _simpson_linear(lo, hi, vlo, vhi):
    """(int V, int x V) over [lo, hi] for V linear; both integrands are exact."""
    mid = 0.5 * (lo + hi)
    vmid = 0.5 * (vlo + vhi)
    length = hi - lo
    return (
        length * vmid,
        length / 6.0 * (lo * vlo + 4.0 * mid * vmid + hi * vhi),
    )


@dataclass(frozen=True)
class Segment:
    """One closed-form piece of a potential, living on ``[start, end]``."""

    kind: str
    start: float
    end: float
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InadmissiblePotentialError(f"unknown segment kind {self.kind!r}")
        if not (0.0 <= self.start < self.end):
            raise InadmissiblePotentialError(
                f"segment interval [{self.start}, {self.end}] must satisfy 0 <= start < end"
            )
        finite_only = self.kind in ("constant", "power", "tabulated")
        if finite_only and math.isinf(self.end):
            raise InadmissiblePotentialError(
                f"{self.kind} segment with infinite support has infinite first moment"
            )
        if self.kind == "exponential":
            amplitude, rate = self.params
            if not rate > 0:
                raise InadmissiblePotentialError("exponential rate must be > 0")
        elif self.kind == "sech2":
            amplitude, scale = self.params
            if not scale > 0:
                raise InadmissiblePotentialError("sech2 scale must be > 0")
        elif self.kind == "power":
            coeff, alpha, anchor = self.params
            if not 0.0 < alpha < 1.0:
                raise InadmissiblePotentialError(
                    "power-law exponent must satisfy 0 < alpha < 1 (L1 singularity)"
                )
            if self.start < anchor < self.end:
                raise InadmissiblePotentialError("power-law anchor must lie outside the open segment")
        elif self.kind == "tabulated":
            xs, vs = self.params
            if len(xs) != len(vs) or len(xs) < 2:
                raise InadmissiblePotentialError("tabulated potential needs >= 2 matching samples")
            if np.any(np.diff(xs) <= 0):
                raise InadmissiblePotentialError("tabulated abscissae must be increasing")
            if xs[0] != self.start or xs[-1] != self.end:
                raise InadmissiblePotentialError("tabulated samples must span the segment")
        values = [v for v in self.params if isinstance(v, float)]
        if any(not math.isfinite(v) for v in values):
            raise InadmissiblePotentialError("segment parameters must be finite")

    # -- pointwise ---------------------------------------------------------

    @property
    def singular(self):
        """'left' or 'right' if V blows up at that endpoint, else None."""
        if self.kind != "power":
            return None
        anchor = self.params[2]
        if anchor == self.start:
            return "left"
        if anchor == self.end:
            return "right"
        return None

    def value(self, x):
        """Scalar V(x) for ``start <= x <= end``."""
        kind, p = self.kind, self.params
        if kind == "constant":
            return p[0]
        if kind == "exponential":
            return p[0] * math.exp(-p[1] * x)
        if kind == "sech2":
            c = math.cosh(x / p[1]) if x / p[1] < 700 else math.inf
            return p[0] / (c * c)
        if kind == "power":
            d = abs(x - p[2])
            return p[0] * d ** (-p[1]) if d > 0 else math.copysign(math.inf, p[0])
        xs, vs = p
        return float(np.interp(x, xs, vs))

    # -- closed-form integrals over [lo, hi] clipped to the segment --------

    def _clip(self, lo, hi):
        return max(lo, self.start), min(hi, self.end)

    def integrals(self, lo=0.0, hi=math.inf):
        """Return ``(int V, int |V|, int x|V|, int x V_-)`` over ``[lo, hi]``."""
        lo, hi = self._clip(lo, hi)
        if hi <= lo:
            return 0.0, 0.0, 0.0, 0.0
        if self.kind == "tabulated":
            return self._tabulated_integrals(lo, hi)
        plain, moment, sign = self._signed_integrals(lo, hi)
        neg = -moment if sign < 0 else 0.0
        return plain, abs(plain), abs(moment), neg

    def _signed_integrals(self, lo, hi):
        """(int V, int x V, sign of V) for the sign-definite kinds."""
        kind, p = self.kind, self.params
        if kind == "constant":
            c = p[0]
            return c * (hi - lo), 0.5 * c * (hi * hi - lo * lo), c
        if kind == "exponential":
            a, mu = p
            e_lo = math.exp(-mu * lo)
            e_hi = 0.0 if math.isinf(hi) else math.exp(-mu * hi)
            plain = a * (e_lo - e_hi) / mu

            def anti(x, e):
                return 0.0 if math.isinf(x) else -e * (x / mu + 1.0 / mu**2)

            return plain, a * (anti(hi, e_hi) - anti(lo, e_lo)), a
        if kind == "sech2":
            a, s = p
            t_hi = 1.0 if math.isinf(hi) else math.tanh(hi / s)
            plain = a * s * (t_hi - math.tanh(lo / s))

            def anti(x):
                if math.isinf(x):
                    return s * s * LN2
                return s * x * math.tanh(x / s) - s * s * _log_cosh(x / s)

            return plain, a * (anti(hi) - anti(lo)), a
        # power law
        c, alpha, anchor = p
        q1, q2 = 1.0 - alpha, 2.0 - alpha
        if anchor <= self.start:
            a0 = anchor
            u_lo, u_hi = lo - a0, hi - a0
            plain = c * (u_hi**q1 - u_lo**q1) / q1
            moment = c * (a0 * (u_hi**q1 - u_lo**q1) / q1 + (u_hi**q2 - u_lo**q2) / q2)
        else:
            b0 = anchor
            u_lo, u_hi = b0 - hi, b0 - lo
            plain = c * (u_hi**q1 - u_lo**q1) / q1
            moment = c * (b0 * (u_hi**q1 - u_lo**q1) / q1 - (u_hi**q2 - u_lo**q2) / q2)
        return plain, moment, c

    def _tabulated_integrals(self, lo, hi):
        xs, vs = np.asarray(self.params[0]), np.asarray(self.params[1])
        knots = np.concatenate(([lo], xs[(xs > lo) & (xs < hi)], [hi]))
        vals = np.interp(knots, xs, vs)
        plain = absval = absmom = negmom = 0.0
        for x0, x1, v0, v1 in zip(knots[:-1], knots[1:], vals[:-1], vals[1:]):
            pieces = [(x0, x1, v0, v1)]
            if v0 * v1 < 0:
                xr = x0 + (x1 - x0) * v0 / (v0 - v1)
                pieces = [(x0, xr, v0, 0.0), (xr, x1, 0.0, v1)]
            for a, b, va, vb in pieces:
                i0, i1 = _simpson_linear(a, b, va, vb)
                plain += i0
                absval += abs(i0)
                absmom += abs(i1)
                if va + vb < 0:
                    negmom -= i1
        return plain, absval, absmom, negmom

    # -- transformations ---------------------------------------------------

    def truncated(self, r):
        """The segment restricted to ``[start, min(end, r)]``, or None if empty."""
        if r <= self.start:
            return None
        if r >= self.end:
            return self
        if self.kind == "tabulated":
            xs, vs = np.asarray(self.params[0]), np.asarray(self.params[1])
            keep = xs < r
            new_xs = tuple(float(x) for x in xs[keep]) + (float(r),)
            new_vs = tuple(float(v) for v in vs[keep]) + (float(np.interp(r, xs, vs)),)
            return Segment("tabulated", self.start, float(r), (new_xs, new_vs))
        return Segment(self.kind, self.start, float(r), self.params)

    def scaled(self, factor):
        p = self.params
        if self.kind == "constant":
            new = (factor * p[0],)
        elif self.kind in ("exponential", "sech2"):
            new = (factor * p[0], p[1])
        elif self.kind == "power":
            new = (factor * p[0], p[1], p[2])
        else:
            new = (p[0], tuple(factor * v for v in p[1]))
        return Segment(self.kind, self.start, self.end, new)

    def descriptor(self):
        params = [list(v) if isinstance(v, tuple) else v for v in self.params]
        return {"kind": self.kind, "start": self.start, "end": self.end, "params": params}


@dataclass(frozen=True)
class PotentialSpec:
    """A real short-range potential on (0, inf) as ordered disjoint segments.

    Admissibility (finite first moment) is checked at construction.
    """

    segments: tuple = ()
    _moments: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for prev, nxt in zip(segs[:-1], segs[1:]):
            if nxt.start < prev.end:
                raise InadmissiblePotentialError("segments must be disjoint and ordered")
        totals = [0.0, 0.0, 0.0]
        for seg in segs:
            _, absval, absmom, negmom = seg.integrals()
            totals[0] += absval
            totals[1] += absmom
            totals[2] += negmom
        fm = totals[0] + totals[1]
        if not math.isfinite(fm):
            raise InadmissiblePotentialError(
                f"first moment int (1+x)|V| dx diverges ({fm})"
            )
        object.__setattr__(self, "_moments", (fm, totals[2], totals[0]))

    def __hash__(self):
        return hash(self.segments)

    @property
    def is_zero(self):
        return self._moments[2] == 0.0

    @property
    def support_radius(self):
        """Right end of the support: 0 for V = 0, possibly +inf."""
        nonzero = [s for s in self.segments if s.integrals()[1] > 0]
        return nonzero[-1].end if nonzero else 0.0

    @property
    def min_value(self):
        """Lower bound for V, used to bracket the spectrum from below."""
        lows = [0.0]
        for s in self.segments:
            if s.kind == "constant":
                lows.append(s.params[0])
            elif s.kind in ("exponential", "sech2"):
                lows.append(s.value(s.start) if s.params[0] < 0 else 0.0)
            elif s.kind == "tabulated":
                lows.append(min(s.params[1]))
            else:
                lows.append(min(s.value(s.start), s.value(s.end)))
        return min(lows)

    def __call__(self, x):
        return evaluate(self, x)

    def tail_integral(self, r):
        return tail_integral(self, r)

    def breakpoints(self):
        """Sorted segment endpoints (where V may be discontinuous)."""
        pts = set()
        for s in self.segments:
            pts.update((s.start, s.end))
        return sorted(p for p in pts if math.isfinite(p))

    def descriptor(self):
        return {"segments": [s.descriptor() for s in self.segments]}

    @cached_property
    def digest(self):
        blob = json.dumps(self.descriptor(), sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- constructors --------------------------------------------------------------


def zero():
    return PotentialSpec(())


def square_well(depth, width, start=0.0):
    """V = -depth on [start, start + width]."""
    return PotentialSpec((Segment("constant", float(start), float(start + width), (-float(depth),)),))


def constant(value, start, end):
    return PotentialSpec((Segment("constant", float(start), float(end), (float(value),)),))


def exponential(amplitude, rate, start=0.0, end=math.inf):
    return PotentialSpec(
        (Segment("exponential", float(start), float(end), (float(amplitude), float(rate))),)
    )


def sech2(amplitude, scale=1.0, start=0.0, end=math.inf):
    return PotentialSpec(
        (Segment("sech2", float(start), float(end), (float(amplitude), float(scale))),)
    )


def power_law(coeff, alpha, start, end, side="left"):
    """coeff * d**(-alpha) with d the distance to the ``side`` endpoint."""
    anchor = float(start) if side == "left" else float(end)
    return PotentialSpec(
        (Segment("power", float(start), float(end), (float(coeff), float(alpha), anchor)),)
    )


def tabulated(xs, values):
    xs = tuple(float(x) for x in xs)
    vs = tuple(float(v) for v in values)
    return PotentialSpec((Segment("tabulated", xs[0], xs[-1], (xs, vs)),))


def combine(*potentials):
    """Concatenate the segments of several potentials with disjoint supports."""
    segs = sorted((s for p in potentials for s in p.segments), key=lambda s: s.start)
    return PotentialSpec(tuple(segs))


# -- operations ----------------------------------------------------------------


def evaluate(V, x):
    """V(x); zero outside every segment. Accepts scalars or arrays."""
    if np.ndim(x) == 0:
        x = float(x)
        if x < 0:
            raise ValueError("potentials live on x >= 0")
        for seg in V.segments:
            if seg.start <= x <= seg.end:
                return seg.value(x)
        return 0.0
    xs = np.asarray(x, dtype=float)
    return np.array([evaluate(V, xi) for xi in xs.ravel()]).reshape(xs.shape)


def first_moment(V):
    """int_0^inf (1 + x) |V(x)| dx, exact from the segment closed forms."""
    return V._moments[0]


def negative_part_moment(V):
    """int_0^inf x V_-(x) dx, the Bargmann bound on the bound-state count."""
    return V._moments[1]


def tail_integral(V, r):
    """int_r^inf |V(x)| dx."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return sum(seg.integrals(r, math.inf)[1] for seg in V.segments)


def signed_integral(V, lo, hi):
    """int_lo^hi V(x) dx."""
    return sum(seg.integrals(lo, hi)[0] for seg in V.segments)


def cell_averages(V, edges):
    """Mean of V over each cell ``[edges[i], edges[i+1]]``."""
    edges = np.asarray(edges, dtype=float)
    out = np.zeros(len(edges) - 1)
    for seg in V.segments:
        i0 = max(np.searchsorted(edges, seg.start, side="right") - 1, 0)
        i1 = min(np.searchsorted(edges, seg.end, side="left"), len(edges) - 1)
        for i in range(i0, i1):
            out[i] += seg.integrals(edges[i], edges[i + 1])[0]
    return out / np.diff(edges)


def cutoff(V, r):
    """V^r: equal to V on [0, r] and zero beyond."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if r >= V.support_radius:
        return V
    segs = [seg.truncated(r) for seg in V.segments]
    return PotentialSpec(tuple(s for s in segs if s is not None))


def scaled(V, factor):
    """The potential factor * V."""
    return PotentialSpec(tuple(s.scaled(float(factor)) for s in V.segments))


def from_descriptor(desc):
    """Inverse of :meth:`PotentialSpec.descriptor`."""
    segs = []
    for d in desc["segments"]:
        params = tuple(tuple(p) if isinstance(p, list) else p for p in d["params"])
        segs.append(Segment(d["kind"], float(d["start"]), float(d["end"]), params))
    return PotentialSpec(tuple(segs))
