"""Battery, charger and interaction Hamiltonians plus the charger states."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import BasisMismatchError, InvalidParameterError, TruncationError
from .hilbert import (
    AtomBasis,
    CavityBasis,
    JointState,
    Operator,
    annihilator,
    atom_identity,
    cavity_identity,
    collective_op,
    enumerate_atom_basis,
    tensor,
)

CHARGER_KINDS = ("fock", "coherent", "squeezed")
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters; units hbar = omega_c = 1 by default.

    ``n_max=None`` selects the cutoff automatically (see :func:`auto_n_max`).
    """

    N: int = 6
    omega_c: float = 1.0
    omega1: float = 0.0
    omega2: float = 1.0
    omega3: float = 1.95
    g12: float = 1.0
    g23: float = 1.0
    n_max: Optional[int] = None
    charger_kind: str = "coherent"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameterError(f"N must be a positive integer, got {self.N!r}")
        if not self.omega1 < self.omega2 < self.omega3:
            raise InvalidParameterError("level energies must satisfy omega1 < omega2 < omega3")
        if self.omega_c <= 0:
            raise InvalidParameterError("omega_c must be positive")
        if self.g12 < 0 or self.g23 < 0:
            raise InvalidParameterError("couplings must be non-negative")
        if self.n_max is not None and (int(self.n_max) != self.n_max or self.n_max < 1):
            raise InvalidParameterError(f"n_max must be a positive integer or None, got {self.n_max!r}")
        if self.charger_kind not in CHARGER_KINDS:
            raise InvalidParameterError(f"charger_kind must be one of {CHARGER_KINDS}")

    @property
    def omegas(self) -> tuple[float, float, float]:
        return (self.omega1, self.omega2, self.omega3)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# charger photon statistics


def squeezing_parameter(N: int) -> float:
    """Real ``r`` with ``sinh(r)**2 = 2N``."""
    return float(np.arcsinh(np.sqrt(2 * N)))


def _coherent_log_prob(n: np.ndarray, mean: float) -> np.ndarray:
    return xlogy(n, mean) - mean - gammaln(n + 1)


def _squeezed_log_prob_even(m: np.ndarray, r: float) -> np.ndarray:
    """log p(2m) for the squeezed vacuum."""
    t = np.tanh(r)
    return 2 * m * np.log(t) + gammaln(2 * m + 1) - 2 * m * np.log(2) - 2 * gammaln(m + 1) - np.log(np.cosh(r))


def _support_bound(kind: str, N: int) -> int:
    mean = 2 * N
    if kind == "coherent":
        return int(mean + 40 * np.sqrt(mean) + 200)
    # squeezed: tanh(r)**2 = 2N / (2N + 1); go far enough for p ~ 1e-40
    return int(2 * 92 * (mean + 1) + 200)


def photon_probabilities(kind: str, N: int, n_stop: int) -> np.ndarray:
    """Ideal photon-number distribution of the charger for ``n = 0..n_stop``."""
    n = np.arange(n_stop + 1)
    if kind == "fock":
        return (n == 2 * N).astype(float)
    if kind == "coherent":
        return np.exp(_coherent_log_prob(n, 2.0 * N))
    if kind == "squeezed":
        p = np.zeros(n_stop + 1)
        m = np.arange(n_stop // 2 + 1)
        p[2 * m] = np.exp(_squeezed_log_prob_even(m, squeezing_parameter(N)))
        return p
    raise InvalidParameterError(f"unknown charger kind {kind!r}")


def photon_tail(kind: str, N: int, n_max: int) -> float:
    """Probability of the ideal charger state above ``n_max``."""
    if kind == "fock":
        return 0.0 if n_max >= 2 * N else 1.0
    bound = max(_support_bound(kind, N), n_max + 1)
    p = photon_probabilities(kind, N, bound)
    return float(p[n_max + 1:].sum())


def minimal_cutoff(kind: str, N: int, tail_tol: float = TAIL_TOL) -> int:
    """Smallest ``n_max >= 2N + 1`` whose tail probability is below ``tail_tol``."""
    if kind == "fock":
        return 2 * N + 1
    p = photon_probabilities(kind, N, _support_bound(kind, N))
    tail_above = np.cumsum(p[::-1])[::-1][1:]  # tail_above[n] = sum_{k > n} p[k]
    ok = np.nonzero(tail_above < tail_tol)[0]
    return max(int(ok[0]), 2 * N + 1)


def auto_n_max(params: ModelParams, tail_tol: float = TAIL_TOL) -> int:
    """Default cutoff: initial-state tail plus headroom for photon creation.

    The counter-rotating coupling creates photons in pairs with the atoms, so
    headroom grows with ``N * g**2``. The propagator re-checks the top levels
    after every run; this is only the starting guess.
    """
    g = max(params.g12, params.g23)
    dynamic = 2 * params.N + math.ceil(16 * params.N * g * g) + 10
    return max(minimal_cutoff(params.charger_kind, params.N, tail_tol) + 10, dynamic)


def charger_amplitudes(kind: str, N: int, cavity: CavityBasis, tail_tol: float = TAIL_TOL) -> np.ndarray:
    """Fock-basis amplitudes of the charger with mean photon number ``2N``.

    fock
        ``|2N>``.
    coherent
        ``|alpha>`` with ``alpha = sqrt(2N)`` real and positive.
    squeezed
        Squeezed vacuum ``exp(r (a**2 - a_dag**2) / 2)|0>`` with
        ``sinh(r)**2 = 2N``; only even photon numbers are populated.
    """
    if kind not in CHARGER_KINDS:
        raise InvalidParameterError(f"unknown charger kind {kind!r}")
    tail = photon_tail(kind, N, cavity.n_max)
    if tail > tail_tol:
        raise TruncationError(
            f"{kind} charger with N={N}: tail probability {tail:.3e} above n_max={cavity.n_max} "
            f"exceeds {tail_tol:.0e}"
        )
    n = cavity.numbers
    amps = np.zeros(cavity.dim)
    if kind == "fock":
        amps[2 * N] = 1.0
    elif kind == "coherent":
        amps = np.exp(0.5 * _coherent_log_prob(n, 2.0 * N))
    else:
        r = squeezing_parameter(N)
        m = np.arange(cavity.n_max // 2 + 1)
        sign = np.where(m % 2 == 0, 1.0, -1.0)
        amps[2 * m] = sign * np.exp(0.5 * _squeezed_log_prob_even(m, r))
    return amps / np.linalg.norm(amps)


@dataclass(frozen=True)
class ChargerState:
    kind: str
    amplitudes: np.ndarray
    cavity: CavityBasis

    @property
    def mean_photons(self) -> float:
        return float(np.sum(self.cavity.numbers * np.abs(self.amplitudes) ** 2))


def charger_state(params: ModelParams, cavity: CavityBasis, tail_tol: float = TAIL_TOL) -> ChargerState:
    amps = charger_amplitudes(params.charger_kind, params.N, cavity, tail_tol)
    return ChargerState(params.charger_kind, amps, cavity)


# --------------------------------------------------------------------------
# Hamiltonians


@dataclass(frozen=True)
class System:
    """Bases and coupling-independent operator pieces for one ``(N, n_max)``.

    The full Hamiltonian is ``H_A + H_B + g12 * X12 + g23 * X23``, so a
    coupling sweep only re-weights three cached sparse matrices.
    """

    params: ModelParams
    cavity: CavityBasis
    atoms: AtomBasis
    H_A: Operator
    H_B: Operator
    H_B_atomic: Operator
    X12: Operator
    X23: Operator

    def hamiltonian(self, g12: Optional[float] = None, g23: Optional[float] = None) -> Operator:
        g12 = self.params.g12 if g12 is None else g12
        g23 = self.params.g23 if g23 is None else g23
        M = (self.H_A.matrix + self.H_B.matrix + g12 * self.X12.matrix + g23 * self.X23.matrix).tocsr()
        return Operator(M, "joint")

    def interaction(self, g12: Optional[float] = None, g23: Optional[float] = None) -> Operator:
        g12 = self.params.g12 if g12 is None else g12
        g23 = self.params.g23 if g23 is None else g23
        return Operator((g12 * self.X12.matrix + g23 * self.X23.matrix).tocsr(), "joint")


def build_system(params: ModelParams, n_max: Optional[int] = None) -> System:
    n_max = n_max or params.n_max or auto_n_max(params)
    cavity = CavityBasis(int(n_max))
    atoms = enumerate_atom_basis(params.N)
    a = annihilator(cavity)
    x = Operator(a.matrix + a.matrix.T, "cavity", hermitian=True)
    number = Operator(a.matrix.T @ a.matrix, "cavity", hermitian=True)
    A = {(i, j): collective_op(i, j, atoms) for i in (1, 2, 3) for j in (1, 2, 3)}
    HB_atomic = Operator(np.diag(atoms.occupations @ np.array(params.omegas)), "atom", hermitian=True)
    scale = 1.0 / np.sqrt(params.N)
    X12 = tensor(x, A[1, 2] + A[2, 1]) * scale
    X23 = tensor(x, A[2, 3] + A[3, 2]) * scale
    H_A = tensor(number * params.omega_c, atom_identity(atoms))
    H_B = tensor(cavity_identity(cavity), HB_atomic)
    return System(params, cavity, atoms, H_A, H_B, HB_atomic, X12, X23)


def build_hamiltonians(params: ModelParams, cavity: CavityBasis, atoms: AtomBasis):
    """``(H_A, H_B, H_I, H)`` on the joint basis for the charging window."""
    if atoms.N != params.N:
        raise BasisMismatchError(f"atom basis has N={atoms.N}, parameters have N={params.N}")
    if params.n_max is not None and params.n_max != cavity.n_max:
        raise BasisMismatchError(f"cavity basis n_max={cavity.n_max} differs from params.n_max={params.n_max}")
    system = build_system(params, cavity.n_max)
    H_I = system.interaction()
    H = system.hamiltonian()
    return system.H_A, system.H_B, H_I, H


def initial_joint_state(params: ModelParams, cavity: Optional[CavityBasis] = None,
                        tail_tol: float = TAIL_TOL) -> JointState:
    """Charger state times all atoms in level 1."""
    cavity = cavity or CavityBasis(params.n_max or auto_n_max(params, tail_tol))
    atoms = enumerate_atom_basis(params.N)
    charger = charger_state(params, cavity, tail_tol)
    ground = np.zeros(atoms.dim)
    ground[atoms.index(params.N, 0, 0)] = 1.0
    return JointState.product(charger.amplitudes, ground, cavity, atoms)
