import io
import math

import numpy as np
import pytest

from ssfkit import counting, trace_check as T
from ssfkit import potentials as P
from ssfkit._csvio import read_table

from oracles import fd_eigenvalues, matrix_count

HEAT = T.TraceFunction.heat(1.0)


def test_discretize_free_lowest_eigenvalue(zero):
    errs = []
    for n in (200, 400, 800):
        e = T.discretize(zero, math.pi, n).eigenvalues(select="i", select_range=(0, 0))[0]
        errs.append(abs(e - 1.0))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


def test_discrete_operator_structure(well):
    op = T.discretize(well, 5.0, 50)
    D = op.dense()
    assert np.array_equal(D, D.T)
    assert op.off_diagonal == -1.0 / op.h**2
    assert op.h == pytest.approx(5.0 / 51)
    assert np.allclose(np.sort(np.linalg.eigvalsh(D)), op.eigenvalues())


def test_symmetric_potential_parity_alternates():
    V = P.combine(P.constant(-3.0, 1.0, 2.0), P.constant(-3.0, 4.0, 5.0))
    op = T.discretize(V, 6.0, 299, sampling="point")
    w, vecs = np.linalg.eigh(op.dense())
    for j in range(6):
        v = vecs[:, j]
        parity = np.sign(np.dot(v, v[::-1]))
        assert parity == (1 if j % 2 == 0 else -1)


def test_well_lowest_eigenvalue_second_order(well):
    exact = counting.negative_eigenvalues_box(well, 10.0)[0]
    errs = [abs(T.discretize(well, 10.0, n).eigenvalues()[0] - exact) for n in (1000, 2000, 4000)]
    assert 3.0 < errs[0] / errs[1] < 5.0 and 3.0 < errs[1] / errs[2] < 5.0


def test_point_sampling_is_first_order_at_a_jump(well):
    exact = counting.negative_eigenvalues_box(well, 10.0)[0]
    errs = [abs(T.discretize(well, 10.0, n, sampling="point").eigenvalues()[0] - exact)
            for n in (1000, 2000, 4000)]
    assert errs[-1] > 10 * abs(T.discretize(well, 10.0, 4000).eigenvalues()[0] - exact)


def test_cell_average_matches_independent_oracle(well):
    ours = T.discretize(well, 7.0, 600).eigenvalues()
    assert np.allclose(ours, fd_eigenvalues(well, 7.0, 600), atol=1e-9, rtol=1e-12)


def test_trace_diff_free_and_linear(zero, well):
    assert T.trace_diff(zero, 10.0, 500, HEAT) == 0.0
    assert T.trace_formula_residual(zero, 10.0, 500, HEAT) == (0.0, 0.0, 0.0)
    f1, f2 = T.TraceFunction.heat(0.5), T.TraceFunction.resolvent(complex(-1.0, 2.0))
    lhs = T.trace_diff(well, 10.0, 800, f1 + f2)
    assert lhs == pytest.approx(T.trace_diff(well, 10.0, 800, f1) + T.trace_diff(well, 10.0, 800, f2),
                                abs=1e-12)


def test_heat_kernel_residual_shrinks(well):
    rows = T.residual_table(well, 10.0, [1000, 2000, 4000], HEAT)
    res = [row[3] for row in rows]
    assert res[0] / res[1] > 3 and res[1] / res[2] > 3


def test_spline_single_eigenvalue_bookkeeping(well):
    f = T.TraceFunction.spline([-6.0, -3.0, -0.1], [0.0, 1.0, 0.0])
    lhs, rhs, res = T.trace_formula_residual(well, 10.0, 4000, f)
    e_disc = T.discretize(well, 10.0, 4000).eigenvalues()[0]
    e = counting.negative_eigenvalues_box(well, 10.0)[0]
    assert lhs == pytest.approx(float(f(e_disc)), abs=1e-14)
    assert rhs == pytest.approx(float(f(e)), abs=1e-12)
    assert res < 1e-6


def test_resolvent_residual_within_truncation_and_discretization(well):
    f = T.TraceFunction.resolvent(complex(-1.0, 1.0))
    lam_max = 2500.0
    lhs, rhs, res = T.trace_formula_residual(well, 10.0, 4000, f, lam_max=lam_max)
    # the neglected levels shift by ~ 2 int|V| / r each, density r / (2 pi sqrt(lam))
    tail = (2 * 4.0 / 10.0) * (10.0 / (2 * math.pi)) * (2.0 / 3.0) * lam_max**-1.5
    assert res < 2 * tail + 1e-6


def test_spline_derivative_closed_form():
    f = T.TraceFunction.spline([-6.0, -3.0, -0.1], [0.0, 1.0, 0.0])
    x = np.linspace(-5.9, -0.2, 7)
    h = 1e-6
    assert np.allclose(f.derivative(x), (f(x + h) - f(x - h)) / (2 * h), atol=1e-6)
    for t in (0.3, 2.0):
        g = T.TraceFunction.heat(t)
        assert np.allclose(g.derivative(x), (g(x + h) - g(x - h)) / (2 * h), rtol=1e-6)


def test_count_agrees_with_oscillation(well):
    op = T.discretize(well, 8.0, 8000)
    eigs = op.eigenvalues()
    for lam in (-2.0, -0.3, 1.1, 5.5, 9.7):
        if np.min(np.abs(eigs - lam)) > 1e-6:
            assert matrix_count(eigs, lam) == counting.count(well, 8.0, lam)


def test_heat_trace_monotone_in_depth():
    vals = [T.trace_diff(P.square_well(d, 1.0), 10.0, 1000, HEAT) for d in (1.0, 2.0, 4.0, 8.0)]
    assert np.all(np.diff(vals) > 0)


def test_residual_csv(well):
    buf = io.StringIO()
    T.residual_table(well, 10.0, [200, 400], HEAT, target=buf)
    meta, header, rows = read_table(io.StringIO(buf.getvalue()))
    assert header == ["n", "lhs", "rhs", "residual"]
    assert [int(r[0]) for r in rows] == [200, 400]
    assert meta["potential"] == well.digest
