"""Energetic and entropic figures of merit of the battery.

Pointwise quantities come from the reduced atomic state; trajectory
reductions pick global maxima on the sample grid (earliest sample wins ties).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError, InvalidStateError
from .hilbert import DensityMatrix, JointState, Operator, partial_trace

ENTROPY_CUTOFF = 1e-14
NEGATIVE_EIG_TOL = 1e-8
EMPTY_BATTERY = 1e-12


def _atomic_energies(H_B_atomic: Operator) -> np.ndarray:
    return np.linalg.eigvalsh(H_B_atomic.dense())


def stored_energy(rho_B: DensityMatrix, H_B_atomic: Operator) -> float:
    """``Tr[H_B rho_B]``."""
    if rho_B.dim != H_B_atomic.dim:
        raise InvalidParameterError(f"rho_B has dimension {rho_B.dim}, H_B has {H_B_atomic.dim}")
    return float(np.real(np.sum(H_B_atomic.dense().T * rho_B.matrix)))


def ergotropy(rho_B: DensityMatrix, H_B_atomic: Operator, energies=None) -> tuple[float, float]:
    """Return ``(ergotropy, locked_energy)``.

    The locked energy is that of the passive state: populations sorted in
    descending order placed on energies sorted in ascending order.
    """
    eps = _atomic_energies(H_B_atomic) if energies is None else energies
    return _split(stored_energy(rho_B, H_B_atomic), rho_B.eigenvalues(), eps)


def _split(E: float, r_ascending: np.ndarray, eps: np.ndarray) -> tuple[float, float]:
    if r_ascending[0] < -NEGATIVE_EIG_TOL:
        raise InvalidStateError(f"rho_B has negative eigenvalue {r_ascending[0]:.3e}")
    locked = float(np.dot(np.clip(r_ascending[::-1], 0.0, None), eps))
    W = E - locked
    if W < 0:
        # round-off only; keep E = W + locked exact
        return 0.0, E
    return W, locked


def entropy_from_spectrum(p: np.ndarray) -> float:
    p = p[p > ENTROPY_CUTOFF]
    s = -float(np.sum(p * np.log2(p)))
    return s if s > 0 else 0.0


def entropy(rho: DensityMatrix) -> float:
    """von Neumann entropy in bits."""
    return entropy_from_spectrum(rho.eigenvalues())


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    E_B: float
    ergotropy: float
    E_locked: float
    P_B: float
    P_ergo: float
    S: float
    R: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in self.columns())


def record_from_rho(t: float, rho_B: DensityMatrix, H_B_atomic: Operator, energies=None) -> ObservableRecord:
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    eps = _atomic_energies(H_B_atomic) if energies is None else energies
    r = rho_B.eigenvalues()
    E = stored_energy(rho_B, H_B_atomic)
    W, locked = _split(E, r, eps)
    S = entropy_from_spectrum(r)
    P_B = E / t if t > 0 else 0.0
    P_ergo = W / t if t > 0 else 0.0
    R = W / E if E > EMPTY_BATTERY else 0.0
    return ObservableRecord(float(t), E, W, locked, P_B, P_ergo, S, R)


def record(t: float, state: JointState, H_B_atomic: Operator, energies=None) -> ObservableRecord:
    """All pointwise observables of the battery at time ``t``."""
    return record_from_rho(t, partial_trace(state, "atoms"), H_B_atomic, energies)


@dataclass(frozen=True)
class TrajectorySummary:
    E_max: float
    t_E: float
    ergo_max: float
    t_ergo: float
    P_max: float
    t_P: float
    Pergo_max: float
    t_Pergo: float
    S_at_tE: float
    S_at_tP: float
    R_e: float
    R_p: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def to_dict(self) -> dict:
        return asdict(self)


def _peak(t: np.ndarray, y: np.ndarray, refine: bool) -> tuple[int, float, float]:
    k = int(np.argmax(y))  # first occurrence on ties
    if not refine or k == 0 or k == y.size - 1:
        return k, float(t[k]), float(y[k])
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    denom = y0 - 2 * y1 + y2
    if denom >= 0:
        return k, float(t[k]), float(y[k])
    shift = 0.5 * (y0 - y2) / denom
    h = t[k + 1] - t[k]
    return k, float(t[k] + shift * h), float(y1 - 0.25 * (y0 - y2) * shift)


def summarize(traj: Sequence[ObservableRecord], refine: bool = False) -> TrajectorySummary:
    """Maxima of stored energy, ergotropy and both powers, with entropies and ratios.

    With ``refine=True`` the peak values and times are improved by a parabola
    through the maximal sample and its neighbours; the entropies are still
    taken at the maximal sample.
    """
    if len(traj) == 0:
        raise InvalidParameterError("cannot summarize an empty trajectory")
    t = np.array([r.t for r in traj])
    E = np.array([r.E_B for r in traj])
    W = np.array([r.ergotropy for r in traj])
    P = np.array([r.P_B for r in traj])
    PW = np.array([r.P_ergo for r in traj])
    S = np.array([r.S for r in traj])
    kE, tE, Emax = _peak(t, E, refine)
    _, tW, Wmax = _peak(t, W, refine)
    kP, tP, Pmax = _peak(t, P, refine)
    _, tPW, PWmax = _peak(t, PW, refine)
    return TrajectorySummary(
        E_max=Emax, t_E=tE, ergo_max=Wmax, t_ergo=tW,
        P_max=Pmax, t_P=tP, Pergo_max=PWmax, t_Pergo=tPW,
        S_at_tE=float(S[kE]), S_at_tP=float(S[kP]),
        R_e=Wmax / Emax if Emax > EMPTY_BATTERY else 0.0,
        R_p=PWmax / Pmax if Pmax > EMPTY_BATTERY else 0.0,
    )


def records_to_columns(traj: Sequence[ObservableRecord]) -> dict[str, np.ndarray]:
    return {c: np.array([getattr(r, c) for r in traj]) for c in ObservableRecord.columns()}
