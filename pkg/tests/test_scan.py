import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nzqlq.model import JCParams
from nzqlq.oracles import degenerate_perturbation_matrix, lindblad_slope
from nzqlq.scan import (
    DeformedGenerator, ScanGrid, ScanResult, complex_intervals, kappa_sweep, lambda_scan,
    perturbation_scaling_table, phase_map, refine_transition, sigmax_continuation,
)


def test_grid_points_include_endpoint():
    pts = ScanGrid(start=0.0, stop=1.0, step=0.002).points
    assert pts.size == 501 and pts[-1] == 1.0 and pts[250] == 0.5
    assert ScanGrid(start=0, stop=1, step=0.3).points[-1] == 1.0
    assert np.allclose(ScanGrid.parse("0.1,0.2,0.5").points, [0.1, 0.2, 0.5])
    assert ScanGrid.parse("0:1:0.25").points.size == 5


@pytest.mark.parametrize("kw", [dict(step=0), dict(start=1, stop=0), dict(tol_imag=0),
                                dict(explicit=(0.2, 0.1))])
def test_grid_validation(kw):
    with pytest.raises(ValueError):
        ScanGrid(**kw)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=40))
def test_classification_consistent_with_mask(mask):
    pts = np.arange(len(mask), dtype=float)
    mi = np.where(mask, 1.0, 0.0)
    iv, gaps = complex_intervals(pts, mi, 0.5)
    r = ScanResult("lambda", pts, mi, mi.astype(int), 0.5, iv, gaps)
    m = np.array(mask)
    runs = int(m[0]) + int(np.count_nonzero(~m[:-1] & m[1:]))
    assert len(iv) == runs
    assert r.classification == ("P" if not m.any() else "B" if m[-1] else "R")
    assert r.n_bub == runs - int(m[-1])
    assert len(r.transitions()) == int(np.count_nonzero(m[:-1] != m[1:]))
    if m.any():
        assert r.lambda_first == pts[np.argmax(m)]


def test_failed_points_split_runs():
    pts = np.arange(5.0)
    iv, gaps = complex_intervals(pts, np.array([1, 1, np.nan, 1, 0.0]), 0.5)
    assert iv == [(0.0, 1.0), (3.0, 3.0)] and gaps == [2.0]


def test_undeformed_point_is_real():
    gen = DeformedGenerator(JCParams(g=0.7, n_max=3))
    assert np.abs(gen.eigvals(0.0).imag).max() < 1e-10
    w_full = np.sort_complex(np.linalg.eigvals(gen.matrix(0.3)))
    assert np.allclose(w_full, np.sort_complex(gen.eigvals(0.3)), atol=1e-9)


def test_scan_deterministic_and_thread_independent():
    p, grid = JCParams(g=0.5, n_max=3), ScanGrid(start=0, stop=1, step=0.05)
    a = lambda_scan(p, grid)
    b = lambda_scan(p, grid, threads=3)
    assert np.array_equal(a.max_imag, b.max_imag)
    assert a.intervals == b.intervals and a.classification == "B"


def test_finer_grid_resolves_no_fewer_intervals():
    p = JCParams(g=0.5, n_max=3)
    coarse = lambda_scan(p, ScanGrid(start=0, stop=1, step=0.05))
    fine = lambda_scan(p, ScanGrid(start=0, stop=1, step=0.01))
    assert len(fine.intervals) >= len(coarse.intervals)
    assert fine.lambda_first <= coarse.lambda_first


def test_refine_transition():
    p = JCParams(omega0=1.0, omega_c=1.0, g=1.0, n_max=4)
    x = refine_transition(p, (0.0, 0.002))
    assert x is not None and x < 1e-3
    y = refine_transition(p, (0.0, 2 * x), tol_lambda=1e-5)
    assert y is not None and abs(y - x) < 1e-4
    assert refine_transition(JCParams(g=0.2, n_max=3), (0.0, 0.5)) is None


def test_perturbation_ratio_matches_first_order_matrix():
    d = degenerate_perturbation_matrix(4)
    rows = perturbation_scaling_table(4, 1.0, (1e-4, 1e-3))
    for r in rows:
        assert r["ratio"] == pytest.approx(d.max_imag_slope, rel=1e-3)


def test_phase_map_rows():
    rows = phase_map([0.2, 0.5], [3], ScanGrid(start=0, stop=1, step=0.05))
    assert [(r.g, r.n_max) for r in rows] == [(0.2, 3), (0.5, 3)]
    assert rows[1].classification == "B"


@pytest.mark.parametrize("delta", [0.0, 0.3])
def test_kappa_sweep_slope(delta):
    p = JCParams(omega0=1.0 + delta, g=0.5, n_max=3)
    r = kappa_sweep(p, np.linspace(0, 0.2, 11))
    assert r.tracked.all()
    assert r.slope == pytest.approx(lindblad_slope(delta, 0.5), abs=1e-6)
    assert r.lambda1[0] == pytest.approx(np.sqrt(delta ** 2 + 0.5))


def test_sigmax_continuation_turns_complex():
    r = sigmax_continuation(2, np.linspace(0.05, 0.5, 10))
    assert r.g_c is not None and 0.05 < r.g_c < 0.5
    assert r.block in (1, -1)
    assert all(v[0] < 1e-8 for v in r.max_imag.values())
