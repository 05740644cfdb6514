"""Closed-system propagation ``psi(t) = exp(-iHt) psi0`` on a time grid.

Two independent integrators are provided:

* :func:`propagate_spectral` diagonalizes ``H`` once and applies the phases
  exactly. It is the reference method.
* :func:`propagate_krylov` is a short-iterative Lanczos integrator that only
  needs sparse matrix-vector products and scales to large cutoffs.

Both split ``H`` into the connected components of its sparsity graph first.
For the Dicke Hamiltonian these are the two photon-atom parity sectors, so a
state that lives in one sector (Fock or squeezed charger) is propagated in a
space of half the size.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
import scipy.sparse as sp
import scipy.linalg as sla
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.csgraph import connected_components

from .errors import IntegrationError, InvalidParameterError, NumericalError, StaleStateError
from .hilbert import JointState, Operator

NORM_TOL = 1e-8


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples ``0, ..., t_end`` (both ends included)."""

    t_end: float = 20.0
    n_samples: int = 2001

    def __post_init__(self):
        if self.n_samples < 1 or int(self.n_samples) != self.n_samples:
            raise InvalidParameterError("n_samples must be a positive integer")
        if self.t_end < 0 or (self.n_samples > 1 and self.t_end == 0):
            raise InvalidParameterError("t_end must be positive")

    @property
    def samples(self) -> np.ndarray:
        if self.n_samples == 1:
            return np.zeros(1)
        return np.linspace(0.0, self.t_end, self.n_samples)

    @property
    def spacing(self) -> float:
        return self.t_end / (self.n_samples - 1) if self.n_samples > 1 else 0.0


@dataclass
class StateTrajectory:
    grid: TimeGrid
    states: np.ndarray  # (n_samples, dim), complex

    def __len__(self) -> int:
        return self.states.shape[0]

    def state(self, k: int, like: JointState) -> JointState:
        return JointState(self.states[k], like.cavity, like.atoms)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def expectation(self, op: Operator) -> np.ndarray:
        M = op.matrix
        return np.real(np.einsum("ij,ij->i", self.states.conj(), (M @ self.states.T).T))


# --------------------------------------------------------------------------
# block structure


def invariant_blocks(H: Operator, psi0: np.ndarray) -> list[np.ndarray]:
    """Index sets of the components of ``H`` that carry weight in ``psi0``."""
    M = sp.csr_matrix(H.matrix, copy=True)
    M.eliminate_zeros()
    n_comp, labels = connected_components(M, directed=False)
    active = np.unique(labels[np.abs(psi0) > 0])
    if n_comp == 1:
        return [np.arange(M.shape[0])]
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_comp + 1))
    return [order[bounds[c]:bounds[c + 1]] for c in active]


def _as_vector(psi0) -> np.ndarray:
    vec = psi0.amplitudes if isinstance(psi0, JointState) else np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > NORM_TOL:
        raise StaleStateError(f"initial state norm {norm:.12f} deviates from 1")
    return vec.astype(complex)


def _check_hamiltonian(H: Operator, dim: int) -> None:
    if H.basis != "joint" and H.basis not in ("cavity", "atom"):
        raise InvalidParameterError(f"unexpected basis tag {H.basis!r}")
    if H.dim != dim:
        raise InvalidParameterError(f"Hamiltonian dimension {H.dim} does not match state length {dim}")


# --------------------------------------------------------------------------
# spectral propagation


def iter_spectral(H: Operator, psi0, times, chunk: int = 64) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(k, psi(times[k]))`` using one eigendecomposition per block."""
    vec = _as_vector(psi0)
    _check_hamiltonian(H, vec.size)
    times = np.asarray(times, dtype=float)
    M = sp.csr_matrix(H.matrix)
    decomps = []
    for idx in invariant_blocks(H, vec):
        block = M[idx][:, idx].toarray()
        try:
            # divide and conquer: the fastest LAPACK driver for a full spectrum
            lam, V = sla.eigh(block, driver="evd", overwrite_a=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"eigendecomposition failed for block of size {idx.size} "
                f"(max |H_ij| = {np.abs(block).max():.3e}): {exc}"
            ) from exc
        decomps.append((idx, lam, V, V.conj().T @ vec[idx]))

    for start in range(0, times.size, chunk):
        ts = times[start:start + chunk]
        out = np.zeros((ts.size, vec.size), dtype=complex)
        for idx, lam, V, c in decomps:
            phases = np.exp(-1j * np.outer(lam, ts)) * c[:, None]
            if np.isrealobj(V):
                # one real product on [Re | Im]; a complex product would upcast V, and
                # the strided .real/.imag views would bypass BLAS
                both = V @ np.hstack([phases.real, phases.imag])
                out[:, idx] = (both[:, : ts.size] + 1j * both[:, ts.size:]).T
            else:
                out[:, idx] = (V @ phases).T
        out[ts == 0.0] = vec  # the propagator at t = 0 is exactly the identity
        for k in range(ts.size):
            yield start + k, out[k]


def propagate_spectral(H: Operator, psi0, grid: TimeGrid) -> StateTrajectory:
    vec = _as_vector(psi0)
    states = np.empty((grid.n_samples, vec.size), dtype=complex)
    for k, psi in iter_spectral(H, vec, grid.samples):
        states[k] = psi
    return StateTrajectory(grid, states)


# --------------------------------------------------------------------------
# short-iterative Lanczos


class _LanczosStepper:
    """Advances one invariant block by steps of at most ``dt``."""

    def __init__(self, M: sp.csr_matrix, krylov_dim: int, tol: float, min_fraction: float = 2.0**-20):
        self.M = M
        self.m_max = krylov_dim
        self.tol = tol
        self.min_fraction = min_fraction
        self.basis = np.empty((krylov_dim + 1, M.shape[0]), dtype=complex)

    def _lanczos(self, psi: np.ndarray, dt: float):
        """Build the Krylov basis until the step error estimate drops below tol.

        Returns ``(coeffs, m)``, or ``None`` if ``m_max`` vectors do not suffice.
        """
        Q = self.basis
        beta0 = np.linalg.norm(psi)
        Q[0] = psi / beta0
        alpha = np.zeros(self.m_max)
        beta = np.zeros(self.m_max)
        for j in range(self.m_max):
            w = self.M @ Q[j]
            alpha[j] = np.vdot(Q[j], w).real
            w = w - alpha[j] * Q[j]
            if j > 0:
                w -= beta[j - 1] * Q[j - 1]
            # full reorthogonalization; m_max is small
            w -= Q[: j + 1].T @ (Q[: j + 1].conj() @ w)
            b = np.linalg.norm(w)
            m = j + 1
            evals, evecs = (
                eigh_tridiagonal(alpha[:m], beta[: m - 1]) if m > 1 else (alpha[:1], np.ones((1, 1)))
            )
            coeffs = evecs @ (np.exp(-1j * evals * dt) * evecs[0].conj())
            if b < 1e-14 * max(1.0, abs(alpha[j])):
                return beta0 * coeffs, m  # invariant subspace, exact
            if m >= 4 and b * abs(coeffs[-1]) < self.tol:
                return beta0 * coeffs, m
            beta[j] = b
            Q[j + 1] = w / b
        return None

    def advance(self, psi: np.ndarray, h: float, dt: float) -> np.ndarray:
        """Propagate by total time ``h`` using substeps no longer than ``dt``."""
        remaining = h
        step = min(dt, h)
        floor = h * self.min_fraction
        while remaining > 1e-15 * max(1.0, h):
            step = min(step, remaining)
            result = self._lanczos(psi, step)
            if result is None:
                step *= 0.5
                if step < floor:
                    raise IntegrationError(
                        f"Lanczos step did not reach tolerance {self.tol:.1e} with "
                        f"{self.m_max} vectors even at dt={step:.3e}"
                    )
                continue
            coeffs, m = result
            psi = coeffs @ self.basis[:m]
            remaining -= step
        return psi


def iter_krylov(H: Operator, psi0, times, krylov_dim: int = 30, dt: Optional[float] = None,
                tol: float = 1e-10) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(k, psi(times[k]))`` by Lanczos steps between consecutive samples."""
    if krylov_dim < 4:
        raise InvalidParameterError("krylov_dim must be at least 4")
    vec = _as_vector(psi0)
    _check_hamiltonian(H, vec.size)
    times = np.asarray(times, dtype=float)
    gaps = np.diff(times)
    if gaps.size and np.any(gaps <= 0):
        raise InvalidParameterError("sample times must be strictly increasing")
    spacing = gaps.min() if gaps.size else 0.0
    if dt is None:
        dt = spacing if spacing > 0 else 1.0
    elif gaps.size and dt > spacing * (1 + 1e-12):
        raise InvalidParameterError(f"dt={dt} exceeds the sample spacing {spacing}")

    M = sp.csr_matrix(H.matrix)
    blocks = []
    for idx in invariant_blocks(H, vec):
        sub = M[idx][:, idx].tocsr()
        blocks.append((idx, _LanczosStepper(sub, min(krylov_dim, idx.size), tol), vec[idx].copy()))

    t_now = 0.0
    for k, t in enumerate(times):
        h = t - t_now
        if h > 0:
            for b, (idx, stepper, psi) in enumerate(blocks):
                blocks[b] = (idx, stepper, stepper.advance(psi, h, dt))
        elif h < 0:
            raise InvalidParameterError("sample times must start at or after t = 0")
        t_now = t
        out = np.zeros(vec.size, dtype=complex)
        for idx, _, psi in blocks:
            out[idx] = psi
        yield k, out


def propagate_krylov(H: Operator, psi0, grid: TimeGrid, krylov_dim: int = 30,
                     dt: Optional[float] = None, tol: float = 1e-10) -> StateTrajectory:
    vec = _as_vector(psi0)
    states = np.empty((grid.n_samples, vec.size), dtype=complex)
    for k, psi in iter_krylov(H, vec, grid.samples, krylov_dim=krylov_dim, dt=dt, tol=tol):
        states[k] = psi
    return StateTrajectory(grid, states)


def top_population(psi: np.ndarray, cavity_dim: int, atom_dim: int, levels: int = 3) -> float:
    """Probability in the highest ``levels`` photon numbers of a joint vector."""
    coeffs = psi.reshape(cavity_dim, atom_dim)
    return float(np.sum(np.abs(coeffs[-levels:]) ** 2))
