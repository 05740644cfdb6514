"""Phase-space pictures of the charger: Wigner function, characteristic
function and photon-number distribution.

Conventions: ``alpha = x + i p`` so a coherent state ``|alpha0>`` peaks at
``alpha0``; ``W`` integrates to one over ``d^2 alpha = dx dp`` and the vacuum
has ``W(0) = 2 / pi``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import AccuracyWarning, InvalidParameterError, InvalidStateError
from .hilbert import DensityMatrix, annihilator, CavityBasis

LEAKAGE_TOL = 1e-6
BOUNDARY_TOL = 1e-3


@dataclass(frozen=True)
class PhaseGrid:
    x_min: float = -7.0
    x_max: float = 7.0
    p_min: float = -7.0
    p_max: float = 7.0
    nx: int = 201
    np_: int = 201

    def __post_init__(self):
        if self.nx < 2 or self.np_ < 2:
            raise InvalidParameterError("phase grid needs at least 2 points per axis")
        if not (np.isfinite([self.x_min, self.x_max, self.p_min, self.p_max]).all()
                and self.x_min < self.x_max and self.p_min < self.p_max):
            raise InvalidParameterError("phase grid extents must be finite and increasing")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np_)

    @property
    def alpha(self) -> np.ndarray:
        """Complex points, shape ``(nx, np_)`` with ``x`` along axis 0."""
        X, P = np.meshgrid(self.x, self.p, indexing="ij")
        return X + 1j * P

    @property
    def cell_area(self) -> float:
        return (self.x[1] - self.x[0]) * (self.p[1] - self.p[0])


@dataclass
class WignerMap:
    grid: PhaseGrid
    values: np.ndarray  # (nx, np_)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_area)

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))


@dataclass
class PhotonDistribution:
    probabilities: np.ndarray

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.probabilities.size)

    def odd_mass(self) -> float:
        return float(self.probabilities[1::2].sum())

    def mean(self) -> float:
        return float(np.dot(self.n, self.probabilities))


def photon_distribution(rho_A: DensityMatrix) -> PhotonDistribution:
    """``p(n) = <n|rho_A|n>``; round-off negatives down to -1e-12 are set to zero."""
    p = np.real(np.diag(rho_A.matrix)).copy()
    if p.min() < -1e-12:
        raise InvalidStateError(f"negative photon probability {p.min():.3e}")
    return PhotonDistribution(np.clip(p, 0.0, None))


def _padded(rho: np.ndarray, pad: int) -> np.ndarray:
    d = rho.shape[0]
    out = np.zeros((d + pad, d + pad), dtype=complex)
    out[:d, :d] = rho
    return out


def characteristic_function(rho_A: DensityMatrix, eta: complex, pad: int | None = None) -> complex:
    """``Tr[rho exp(eta a_dag - conj(eta) a)]``.

    ``rho_A`` is embedded in a larger Fock space (zero padding is exact) so
    the truncated displacement is accurate on the state's support. Warns with
    :class:`AccuracyWarning` when the displaced state still reaches the top
    three levels of the working space.
    """
    eta = complex(eta)
    if pad is None:
        r = abs(eta)
        pad = int(math.ceil(r * r + 10 * r + 20))
    rho = _padded(np.asarray(rho_A.matrix, dtype=complex), pad)
    a = annihilator(CavityBasis(rho.shape[0] - 1)).matrix
    D = expm(eta * a.T - np.conj(eta) * a)
    displaced = D @ rho @ D.conj().T
    leak = float(np.real(np.trace(displaced[-3:, -3:])))
    if leak > LEAKAGE_TOL:
        warnings.warn(
            f"displacement by |eta|={abs(eta):.3g} leaks {leak:.2e} into the top Fock levels",
            AccuracyWarning, stacklevel=2,
        )
    return complex(np.trace(rho @ D))


def _effective_dim(rho: np.ndarray, tol: float = 1e-15) -> int:
    """Smallest ``M`` such that ``rho[M:, M:]`` has trace below ``tol``."""
    diag = np.real(np.diag(rho))
    tail = np.cumsum(diag[::-1])[::-1]
    keep = np.nonzero(tail >= tol)[0]
    return int(keep[-1] + 1) if keep.size else 1


def _laguerre_sum(diag: np.ndarray, k: int, x: np.ndarray, logx: np.ndarray) -> np.ndarray:
    """``sum_m (-1)**m diag[m] f_m`` with ``f_m`` the normalized Laguerre functions

    ``f_m = sqrt(m! / (m+k)!) x**(k/2) exp(-x/2) L_m^k(x)``, which are bounded by
    one. Their forward recurrence in ``m`` stays stable for thousands of terms,
    unlike recurrences on the unnormalized matrix elements.
    """
    if k == 0:
        f = np.exp(-x / 2)
    else:
        f = np.where(x > 0, np.exp(0.5 * k * logx - x / 2 - 0.5 * gammaln(k + 1)), 0.0)
    f_prev = np.zeros_like(f)
    total = diag[0] * f
    for m in range(diag.size - 1):
        f_next = ((2 * m + 1 + k - x) * f - np.sqrt(m * (m + k)) * f_prev) / np.sqrt((m + 1) * (m + 1 + k))
        f_prev, f = f, f_next
        if diag[m + 1] != 0:
            total = total + (-1) ** (m + 1) * diag[m + 1] * f
    return total


def wigner(rho_A: DensityMatrix, grid: PhaseGrid | None = None) -> WignerMap:
    """Wigner function as the expectation of the displaced parity operator.

    ``W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag]``. The Fock matrix
    elements of the displaced parity are ``(-1)^m`` times normalized
    generalized Laguerre functions of ``4|alpha|^2`` and a phase
    ``exp(-i k arg(alpha))`` per off-diagonal ``k``; the sum runs over the
    diagonals of ``rho``.
    """
    grid = grid or PhaseGrid()
    rho = np.asarray(rho_A.matrix, dtype=complex)
    M = _effective_dim(rho)
    rho = rho[:M, :M]
    A = grid.alpha
    x = 4.0 * np.abs(A) ** 2
    logx = np.log(np.where(x > 0, x, 1.0))
    phase = np.exp(-1j * np.angle(A))
    W = np.zeros(A.shape)
    for k in range(M):
        diag = np.diagonal(rho, -k)  # rho[m + k, m]
        if not np.any(diag):
            continue
        term = _laguerre_sum(diag, k, x, logx)
        W += np.real(term) if k == 0 else 2.0 * np.real(term * phase**k)
    wmap = WignerMap(grid, (2.0 / np.pi) * W)
    edge = wmap.boundary_max()
    if edge > BOUNDARY_TOL:
        warnings.warn(f"Wigner function reaches {edge:.2e} on the grid boundary; enlarge the grid",
                      AccuracyWarning, stacklevel=2)
    return wmap


def characteristic_on_rays(rho_A: DensityMatrix, radii, thetas, pad: int | None = None) -> np.ndarray:
    """``chi(r e^{i theta})`` for all pairs, shape ``(len(thetas), len(radii))``.

    Uses ``D(r e^{i theta}) = R exp(r (a_dag - a)) R^dag`` with the phase
    rotation ``R = exp(i theta a_dag a)``, so one eigendecomposition of the
    generator ``a_dag - a`` serves every point.
    """
    radii = np.asarray(radii, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if pad is None:
        r = radii.max(initial=0.0)
        pad = int(math.ceil(r * r + 10 * r + 20))
    rho = _padded(np.asarray(rho_A.matrix, dtype=complex), pad)
    d = rho.shape[0]
    a = annihilator(CavityBasis(d - 1)).matrix
    lam, U = np.linalg.eigh(1j * (a.T - a))  # a_dag - a = -i U diag(lam) U^dag
    n = np.arange(d)
    out = np.empty((thetas.size, radii.size), dtype=complex)
    for k, th in enumerate(thetas):
        ph = np.exp(1j * th * n)
        rho_rot = ph.conj()[:, None] * rho * ph[None, :]
        weights = np.sum(U.conj() * (rho_rot @ U), axis=0)
        out[k] = np.exp(-1j * np.outer(radii, lam)) @ weights
    return out


def wigner_from_characteristic(rho_A: DensityMatrix, alphas, eta_max: float = 8.0,
                               n_r: int = 96, n_theta: int = 256) -> np.ndarray:
    """Wigner values by direct quadrature of the characteristic function.

    Gauss-Legendre in ``|eta|`` over the disk ``|eta| <= eta_max`` and the
    periodic trapezoid rule in the angle. An independent check of
    :func:`wigner`, not meant for production maps.
    """
    x, w = np.polynomial.legendre.leggauss(n_r)
    radii = 0.5 * eta_max * (x + 1.0)
    w_r = 0.5 * eta_max * w * radii
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    chi = characteristic_on_rays(rho_A, radii, thetas)
    ETA = np.exp(1j * thetas)[:, None] * radii[None, :]
    weights = (2 * np.pi / n_theta) * w_r[None, :]
    out = []
    for alpha in np.atleast_1d(alphas):
        kernel = np.exp(np.conj(ETA) * alpha - ETA * np.conj(alpha))
        out.append(np.real(np.sum(weights * kernel * chi)) / np.pi ** 2)
    return np.array(out)
