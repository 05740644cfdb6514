"""Ground-state energy of the coupled Hamiltonian and phase classification."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import NumericalError, TruncationError
from .hilbert import Operator
from .model import ModelParams, System, build_system

PHASE_TOL = 1e-6
DENSE_LIMIT = 2000
CUTOFF_TOL = 1e-7


@dataclass(frozen=True)
class PhasePoint:
    g12: float
    g23: float
    E_g: float
    phase: str
    n_max: int = 0


def classify(E_g: float, tol: float = PHASE_TOL) -> str:
    return "normal" if E_g > -tol else "superradiant"


def _block_minimum(M: sp.csr_matrix, solver: str, tol: float) -> float:
    dim = M.shape[0]
    if solver == "auto":
        solver = "dense" if dim < DENSE_LIMIT else "iterative"
    if solver == "dense" or dim <= 2:
        return float(sla.eigh(M.toarray(), eigvals_only=True, subset_by_index=[0, 0])[0])
    if solver != "iterative":
        raise ValueError(f"unknown solver {solver!r}")
    # deterministic start vector with weight on every basis state
    v0 = np.linspace(1.0, 2.0, dim)
    v0 /= np.linalg.norm(v0)
    try:
        vals = eigsh(M, k=1, which="SA", v0=v0, tol=tol, maxiter=20 * dim, ncv=min(dim - 1, 40))[0]
    except ArpackNoConvergence as exc:
        raise NumericalError(
            f"Lanczos ground-state search did not converge (dim={dim}, "
            f"{len(exc.eigenvalues)} eigenvalues converged)"
        ) from exc
    return float(vals[0])


def lowest_eigenvalue(H: Operator, solver: str = "auto", tol: float = 1e-13) -> float:
    """Smallest eigenvalue of a Hermitian operator.

    ``H`` is split into the connected components of its sparsity graph and
    the minimum is taken over components: a Krylov solver started in one
    vector cannot be trusted to find an eigenvalue of a decoupled block
    (for ``g12 = 0`` the bare ground state is such a block). Per component,
    ``solver`` is ``"dense"``, ``"iterative"`` (ARPACK Lanczos) or
    ``"auto"``, which uses dense LAPACK below ``DENSE_LIMIT``.
    """
    if solver not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown solver {solver!r}")
    M = sp.csr_matrix(H.matrix, copy=True)
    M.eliminate_zeros()
    n_comp, labels = connected_components(M, directed=False)
    sizes = np.bincount(labels, minlength=n_comp)
    diag = M.diagonal().real
    single = sizes[labels] == 1
    best = float(diag[single].min()) if single.any() else np.inf
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_comp + 1))
    for c in np.nonzero(sizes > 1)[0]:
        idx = order[bounds[c]:bounds[c + 1]]
        best = min(best, _block_minimum(M[idx][:, idx].tocsr(), solver, tol))
    return best


def _initial_cutoff(params: ModelParams) -> int:
    g = max(abs(params.g12), abs(params.g23))
    return 2 * params.N + math.ceil(8 * params.N * g * g) + 20


def ground_energy(params: ModelParams, solver: str = "auto") -> PhasePoint:
    """Ground energy at ``(params.g12, params.g23)``.

    Unless ``params.n_max`` is fixed, the cutoff is doubled until the energy
    changes by less than ``CUTOFF_TOL``.
    """
    return _CachedSystems(params).energy(params.g12, params.g23, solver)


def _grid(lo: float, hi: float, resolution: int) -> np.ndarray:
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if resolution == 1:
        return np.array([lo])
    # rounding keeps decimal grid points such as 0.2 exact
    return np.round(lo + (hi - lo) * np.arange(resolution) / (resolution - 1), 12)


class _CachedSystems:
    """Coupling-independent operators per cutoff, reused across a scan."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.systems: dict[int, System] = {}

    def get(self, n: int) -> System:
        if n not in self.systems:
            self.systems[n] = build_system(self.params, n)
        return self.systems[n]

    def energy(self, g12: float, g23: float, solver: str) -> PhasePoint:
        fixed = self.params.n_max
        if fixed is not None:
            E = lowest_eigenvalue(self.get(fixed).hamiltonian(g12, g23), solver)
            return PhasePoint(g12, g23, E, classify(E), fixed)
        n = _initial_cutoff(self.params.with_(g12=abs(g12), g23=abs(g23)))
        E = lowest_eigenvalue(self.get(n).hamiltonian(g12, g23), solver)
        for _ in range(4):
            E2 = lowest_eigenvalue(self.get(2 * n).hamiltonian(g12, g23), solver)
            if abs(E2 - E) < CUTOFF_TOL:
                return PhasePoint(g12, g23, E2, classify(E2), 2 * n)
            n, E = 2 * n, E2
        raise TruncationError(f"ground energy at ({g12}, {g23}) not converged up to n_max={n}")


def scan_points(points: Sequence[tuple[float, float]], params: ModelParams,
                solver: str = "auto") -> list[PhasePoint]:
    cache = _CachedSystems(params)
    return [cache.energy(float(a), float(b), solver) for a, b in points]


def phase_scan(g12_range=(0.0, 2.0), g23_range=(0.0, 2.0), resolution=41,
               params: Optional[ModelParams] = None, solver: str = "auto") -> list[PhasePoint]:
    """Ground energies on a ``g12 x g23`` grid, row-major with ``g23`` as the row index.

    ``resolution`` is an int or a ``(n_g12, n_g23)`` pair. A degenerate range
    ``(a, a)`` gives a single line.
    """
    params = params or ModelParams()
    r12, r23 = (resolution, resolution) if np.isscalar(resolution) else resolution
    g12s = _grid(*g12_range, r12 if g12_range[0] != g12_range[1] else 1)
    g23s = _grid(*g23_range, r23 if g23_range[0] != g23_range[1] else 1)
    return scan_points([(a, b) for b in g23s for a in g12s], params, solver)


def diagonal_scan(g_range=(0.0, 2.0), resolution=41, params: Optional[ModelParams] = None,
                  solver: str = "auto") -> list[PhasePoint]:
    """Ground energies along ``g12 = g23``."""
    params = params or ModelParams()
    gs = _grid(*g_range, resolution)
    return scan_points([(g, g) for g in gs], params, solver)


def first_below(points: Sequence[PhasePoint], threshold: float = 1e-4) -> Optional[PhasePoint]:
    """First scan point whose ground energy is below ``-threshold``."""
    for p in points:
        if p.E_g < -threshold:
            return p
    return None


def curvature_peak(points: Sequence[PhasePoint]) -> Optional[PhasePoint]:
    """Point of the most negative second difference of ``E_g`` along a line.

    A finite-size marker of the crossover into the superradiant phase; the
    points must be uniformly spaced.
    """
    if len(points) < 3:
        return None
    E = np.array([p.E_g for p in points])
    d2 = E[:-2] - 2 * E[1:-1] + E[2:]
    return points[int(np.argmin(d2)) + 1]
