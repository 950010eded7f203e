import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ssfkit import limits, ssf
from ssfkit import potentials as P
from ssfkit._csvio import read_table
from ssfkit.errors import FloorIntegrationError

from oracles import fd_eigenvalues, riemann_mean, well_bound_states, well_phase

TF = limits.TestFunction
PF = limits.ProbeFunction


# -- test functions ------------------------------------------------------------


@pytest.mark.parametrize(
    "g",
    [TF.hat(0.5, 2.5), TF.hat(-3, 0.5, -1.0), TF.bump(1.0, 0.7),
     TF.spline([0, 0.3, 0.8, 1.0], [0, 1.0, -0.4, 0]), TF.uniform(0.2, 0.6, 2.0),
     TF.hat(0, 1) + 2.5 * TF.bump(0.5, 0.5)],
)
def test_test_function_integrals(g):
    a, b = g.support
    pts = g.kinks()
    for lo, hi in [(a, b), (a + 0.3 * (b - a), b), (a - 1, a + 0.61 * (b - a))]:
        ref = quad(lambda x: float(g(x)), lo, hi, points=[p for p in pts if lo < p < hi] or None,
                   epsabs=1e-13, limit=200)[0]
        assert g.integral(lo, hi) == pytest.approx(ref, abs=1e-11)
    assert float(g(a - 1e-9)) == 0.0 and float(g(b + 1e-9)) == 0.0


def test_spline_must_vanish_at_ends():
    with pytest.raises(ValueError):
        TF.spline([0, 1, 2], [1, 0, 0])


# -- weak convergence ----------------------------------------------------------


def test_weak_integral_trivial_cases(zero, well):
    assert limits.weak_integral(zero, 10.0, TF.hat(0.5, 2.5)) == 0.0
    # ess. below every spectrum
    assert limits.weak_integral(well, 10.0, TF.hat(-9, -6)) == 0.0


def test_weak_integral_matches_step_quadrature(well):
    """Midpoint-rule integration of xi^r g with xi^r from closed-form oracles."""
    g = TF.hat(-3, 1.5, -0.5)
    r = 6.0
    n = 450000
    lam = -3 + (np.arange(n) + 0.5) * (4.5 / n)
    box_e = fd_eigenvalues(well, r, 4000)
    vals = np.where(lam <= 0, -np.searchsorted(box_e, lam), 0.0)
    pos = lam > 0
    vals[pos] = _well_box_ssf(r, lam[pos])
    ref = np.sum(vals * g(lam)) * (4.5 / n)
    assert limits.weak_integral(well, r, g) == pytest.approx(ref, abs=1e-4)


def test_weak_integral_linear_in_g(well):
    g1, g2 = TF.hat(0.5, 2.5), TF.bump(-1.0, 1.5)
    r = 12.0
    combo = limits.weak_integral(well, r, 2.0 * g1 + (-0.5) * g2)
    assert combo == pytest.approx(2.0 * limits.weak_integral(well, r, g1)
                                  - 0.5 * limits.weak_integral(well, r, g2), abs=1e-12)


def test_halfline_weak_target_negative_part_exact(well):
    g = TF.hat(-3, -0.1)
    e = well_bound_states(4.0, 1.0)[0]
    assert limits.halfline_weak_target(well, g) == pytest.approx(-g.integral(e, -0.1), abs=1e-9)


def test_weak_convergence_cauchy(well):
    g = TF.hat(0.5, 2.5)
    rep = limits.weak_convergence_study(well, g, [10, 20, 40, 80])
    cauchy = np.abs(np.diff(rep.observed))
    assert np.all(np.diff(cauchy) < 0)
    assert rep.errors[-1] < rep.errors[0]
    assert len(rep.ratios()) == 3


def test_weak_study_free(zero):
    rep = limits.weak_convergence_study(zero, TF.hat(0.5, 2.5), [5, 10])
    assert rep.errors == [0.0, 0.0]


# -- Cesaro --------------------------------------------------------------------


def _well_box_ssf(r, lam, depth=4.0, width=1.0):
    """xi^r(lam), lam > 0, for the square well from the closed-form interior angle.

    Broadcasts over r and lam.
    """
    r, lam = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(lam, dtype=float))
    k = np.sqrt(lam)
    kap = np.sqrt(lam + depth)
    phi = kap * np.minimum(r, width)
    n = np.floor(phi / math.pi + 0.5)
    inside = n * math.pi + np.arctan((k / kap) * np.tan(phi - n * math.pi))
    ku = np.unique(k)
    delta = np.interp(k, ku, well_phase(depth, width, ku))
    theta = np.where(r <= width, inside, k * r + delta)
    return np.floor(r * k / math.pi) - np.floor(theta / math.pi)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_cesaro_mean_matches_riemann(well, lam):
    R = 50.0
    ref = riemann_mean(lambda r: _well_box_ssf(r, lam), R)
    assert limits.cesaro_mean(well, lam, R) == pytest.approx(ref, abs=1e-4)


def test_cesaro_zero_energy_closed_form(well):
    # at lam = 0 the Dirichlet solution is sin(2x), then linear: one zero at 1 - tan(2)/2
    z = 1.0 - math.tan(2.0) / 2.0
    for R in (10.0, 50.0, 500.0):
        assert limits.cesaro_mean(well, 0.0, R) == pytest.approx(-(R - z) / R, abs=1e-9)


def test_cesaro_negative_energy_stabilises(well):
    # xi^r(lam) is eventually constant, so R * (mean - target) is eventually constant
    lam = -0.2
    target = ssf.ssf_halfline(well, lam)
    offsets = [R * (limits.cesaro_mean(well, lam, R) - target) for R in (50, 100, 200)]
    assert offsets[0] == pytest.approx(offsets[1], abs=1e-8) == pytest.approx(offsets[2], abs=1e-8)
    assert limits.cesaro_mean(well, -0.5, 100.0) == 0.0 == ssf.ssf_halfline(well, -0.5)


def test_cesaro_free(zero):
    assert limits.cesaro_mean(zero, 1.0, 30.0) == 0.0
    assert limits.cesaro_mean(zero, -1.0, 30.0) == 0.0


def test_cesaro_max_step_does_not_change_value(well):
    a = limits.cesaro_mean(well, 1.0, 40.0)
    b = limits.cesaro_mean(well, 1.0, 40.0, dr=0.05)
    assert a == pytest.approx(b, abs=1e-9)


def test_cesaro_mean_exponential_against_box_samples():
    V = P.exponential(-3.0, 1.0)
    lam, R, m = 0.7, 8.0, 1600
    rs = (np.arange(m) + 0.5) * (R / m)
    ref = np.mean([ssf.ssf_box(V, r, lam) for r in rs])
    # midpoint sampling misplaces each of the ~4 jumps by at most R / (2 m)
    assert limits.cesaro_mean(V, lam, R) == pytest.approx(ref, abs=4 * 0.5 / m)


# -- floor averaging -----------------------------------------------------------


def test_floor_average_constants():
    assert limits.floor_average(PF.constant(0.0), 17.3) == 0.0
    for a in (0.0, 0.25, 0.7, 0.999):
        for N in (1, 5, 40):
            assert limits.floor_average(PF.constant(a), N) == pytest.approx(a, abs=1e-13)


def test_floor_average_limit():
    h = PF.exp(0.3)
    assert abs(limits.floor_average(h, 1000) - 0.3) < 0.01


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_floor_average_integer_shift(k):
    for h in (PF.exp(0.3), PF.damped_sine(-0.4, 1.5, 2.0), PF.step([0, 1.5, 3.2], [0.6, -1.7], 0.3)):
        for N in (1, 4, 25):
            assert limits.floor_average(h + k, N) == limits.floor_average(h, N) + k


@pytest.mark.parametrize(
    "h,R",
    [(PF.exp(0.3), 1000.0), (PF.damped_sine(0.3, 1.0, 3.0), 40.0), (PF.constant(0.7), 10.0),
     (PF.step([0, 0.5, 2.2], [0.9, -1.3], 0.3), 20.0), (PF.exp(-0.6, 2.5, 0.4), 30.0)],
)
def test_floor_average_matches_riemann(h, R):
    ref = riemann_mean(lambda x: np.floor(x + h(x)) - np.floor(x), R)
    assert limits.floor_average(h, R) == pytest.approx(ref, abs=1e-4)


def test_floor_integration_failure_raises():
    def wild(x):
        return np.asarray(x) + 0.5 * np.sin(1e4 * np.asarray(x))

    with pytest.raises(FloorIntegrationError):
        limits.integrate_floor(wild, lambda x: x, 0.0, 3.0, lambda x: x, 1.0, n_samples=2, max_refine=1)


# -- lemma ---------------------------------------------------------------------


def test_lemma_trivial_and_constant():
    zero_fam = limits.LemmaFamily("zero", lambda x, r: 0 * np.asarray(x), lambda x: 0 * np.asarray(x),
                                  lambda x: 1 + 0 * np.asarray(x))
    rep = limits.lemma_sequence_check(zero_fam, TF.hat(0.1, 0.9), [10, 20])
    assert rep.observed == [0.0, 0.0]
    a = 0.37
    const = limits.LemmaFamily("const", lambda x, r: a + 0 * np.asarray(x), lambda x: a + 0 * np.asarray(x),
                               lambda x: 1 + 0 * np.asarray(x))
    rep = limits.lemma_sequence_check(const, TF.uniform(0.0, 1.0), [10, 20, 40])
    # integer r: exactly a
    assert rep.observed == pytest.approx([a] * 3, abs=1e-13)


def test_lemma_rejects_majorant_violation():
    bad = limits.LemmaFamily("bad", lambda x, r: r * np.asarray(x), lambda x: 0 * np.asarray(x),
                             lambda x: 1 + 0 * np.asarray(x))
    with pytest.raises(ValueError):
        limits.lemma_sequence_check(bad, TF.hat(0.1, 0.9), [10, 20])


@pytest.mark.parametrize("family", limits.standard_lemma_families() + [limits.slow_lemma_family()],
                         ids=lambda f: f.name)
def test_lemma_integral_matches_riemann(family):
    g = TF.hat(0.1, 0.9, 0.4)
    for r in (10.0, 37.0):
        ref = riemann_mean(lambda x: (np.floor(r * x + family.f_n(x, r)) - np.floor(r * x)) * g(x), 1.0)
        assert limits.lemma_integral(family, g, r) == pytest.approx(ref, abs=1e-4)


def test_slow_family_still_converges():
    rep = limits.lemma_sequence_check(limits.slow_lemma_family(), TF.hat(0.1, 0.9, 0.4),
                                      [10 * 4**j for j in range(5)])
    assert np.all(np.diff(rep.errors) < 0)


# -- reports -------------------------------------------------------------------


def test_report_invariants_and_csv():
    rep = limits.ConvergenceReport([1, 2, 4], [0.5, 0.2, 0.1], [0.0, 0.0, 0.0], {"lambda": 1.0})
    assert rep.errors == [0.5, 0.2, 0.1]
    assert rep.ratios() == pytest.approx([2.5, 2.0])
    buf = io.StringIO()
    rep.to_csv(buf, "R")
    meta, header, rows = read_table(io.StringIO(buf.getvalue()))
    assert header == ["R", "observed", "target", "abs_error"]
    assert meta == {"lambda": "1.0"}
    with pytest.raises(ValueError):
        limits.ConvergenceReport([2, 1], [0, 0], [0, 0])


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-2, 2), st.floats(0.2, 3), st.integers(1, 30), st.integers(-3, 3))
def test_floor_shift_property(limit, c, rate, N, k):
    h = PF.exp(limit, c, rate)
    assert limits.floor_average(h + k, N) == limits.floor_average(h, N) + k
