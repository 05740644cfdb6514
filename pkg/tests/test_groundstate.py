import numpy as np
import pytest

from dicke_qb.groundstate import (
    PhasePoint, classify, curvature_peak, diagonal_scan, first_below, ground_energy, lowest_eigenvalue,
    phase_scan, scan_points,
)
from dicke_qb.hilbert import Operator
from dicke_qb.model import ModelParams, build_system


def test_zero_coupling_exact():
    pt = ground_energy(ModelParams(g12=0.0, g23=0.0))
    assert pt.E_g == 0.0 and pt.phase == "normal"


def test_gauge_symmetry():
    params = ModelParams(N=3)
    pts = scan_points([(0.7, 0.4), (0.7, -0.4), (-0.7, 0.4), (-0.7, -0.4)], params)
    E = [p.E_g for p in pts]
    assert max(E) - min(E) < 1e-9


def test_superradiant_at_strong_coupling():
    pt = ground_energy(ModelParams(g12=0.8, g23=0.8))
    assert pt.E_g < 0 and pt.phase == "superradiant"


def test_dense_and_iterative_agree():
    H = build_system(ModelParams(N=3, n_max=40, g12=0.9, g23=0.5)).hamiltonian()
    assert lowest_eigenvalue(H, "dense") == pytest.approx(lowest_eigenvalue(H, "iterative"), abs=1e-10)


def test_diagonal_operator_shortcut():
    H = Operator(np.diag([3.0, 0.5, 0.5, 2.0]), "joint")
    assert lowest_eigenvalue(H, "iterative") == 0.5


def test_fixed_cutoff_respected():
    pt = ground_energy(ModelParams(N=2, n_max=12, g12=0.5, g23=0.5))
    assert pt.n_max == 12


def test_line_is_concave_and_bounded():
    pts = phase_scan((0.0, 2.0), (0.2, 0.2), 21, ModelParams())
    E = np.array([p.E_g for p in pts])
    assert [p.g23 for p in pts] == [0.2] * 21
    assert np.all(E <= 1e-9)
    assert np.max(E[:-2] - 2 * E[1:-1] + E[2:]) / 2 <= 1e-8


def test_grid_is_row_major_and_exact():
    pts = phase_scan((0.0, 2.0), (0.0, 2.0), 11, ModelParams(N=1))
    assert (pts[1].g12, pts[1].g23) == (0.2, 0.0)
    assert (pts[11].g12, pts[11].g23) == (0.0, 0.2)
    assert any(p.g12 == 0.8 and p.g23 == 0.8 for p in pts)


def test_classify_and_markers():
    assert classify(-1e-7) == "normal" and classify(-1e-5) == "superradiant"
    line = [PhasePoint(g, g, e, classify(e)) for g, e in [(0, 0), (0.1, -1e-5), (0.2, -2e-4), (0.3, -1.0), (0.4, -2.1)]]
    assert first_below(line).g12 == 0.2
    assert curvature_peak(line).g12 == 0.2
    assert first_below(line[:2]) is None
    assert curvature_peak(line[:2]) is None


def test_diagonal_scan_small():
    pts = diagonal_scan((0.0, 1.0), 5, ModelParams(N=2))
    assert [p.g12 for p in pts] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert pts[0].E_g == 0.0
    assert all(b.E_g <= a.E_g + 1e-12 for a, b in zip(pts, pts[1:]))


def test_decoupled_ground_block_found_by_iterative_solver():
    # g12 = 0 leaves |0> x (N,0,0) as an isolated one-state block at energy 0
    H = build_system(ModelParams(n_max=100, g12=0.0, g23=1.0)).hamiltonian()
    assert H.dim > 2000
    assert lowest_eigenvalue(H, "iterative") == 0.0
    assert ground_energy(ModelParams(g12=0.0, g23=0.5)).E_g == 0.0
