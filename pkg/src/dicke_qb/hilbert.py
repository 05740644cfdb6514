"""Truncated cavity space, permutation-symmetric three-level atoms and their
product.

Atoms are described by occupation triples ``(n1, n2, n3)`` of the three
levels, i.e. the three-mode bosonic encoding of the symmetric sector. Joint
vectors are stored cavity-major: the photon number is the slow index and the
atomic configuration the fast one, so ``psi.reshape(n_max + 1, d_atoms)``
yields the coefficient matrix ``Psi[n, k]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Union

import numpy as np
import scipy.sparse as sp

from .errors import (
    BasisMismatchError,
    InvalidParameterError,
    InvalidStateError,
    StaleStateError,
)

BasisTag = Literal["cavity", "atom", "joint"]
Matrix = Union[np.ndarray, sp.spmatrix]

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class CavityBasis:
    """Fock states ``|0>, ..., |n_max>`` of a single cavity mode."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InvalidParameterError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def numbers(self) -> np.ndarray:
        return np.arange(self.dim)


@dataclass(frozen=True)
class AtomConfig:
    n1: int
    n2: int
    n3: int

    @property
    def N(self) -> int:
        return self.n1 + self.n2 + self.n3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)


@dataclass(frozen=True)
class AtomBasis:
    """Symmetric N-atom sector, one state per occupation triple."""

    N: int
    configs: tuple[AtomConfig, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c.as_tuple(): k for k, c in enumerate(self.configs)})

    @property
    def dim(self) -> int:
        return len(self.configs)

    def index(self, n1: int, n2: int, n3: int) -> int:
        try:
            return self._index[(n1, n2, n3)]
        except KeyError:
            raise InvalidParameterError(f"({n1}, {n2}, {n3}) is not a configuration of N={self.N}") from None

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, 3)`` integer array of level occupations."""
        return np.array([c.as_tuple() for c in self.configs], dtype=int)


def enumerate_atom_basis(N: int) -> AtomBasis:
    """All triples with ``n1 + n2 + n3 = N``, in descending lexicographic order.

    The first state is ``(N, 0, 0)`` (every atom in the lowest level), which is
    the atomic part of the initial state.
    """
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    configs = tuple(
        AtomConfig(n1, n2, N - n1 - n2)
        for n1 in range(N, -1, -1)
        for n2 in range(N - n1, -1, -1)
    )
    return AtomBasis(N, configs)


@dataclass(frozen=True)
class Operator:
    """Square matrix tagged with the space it acts on.

    ``matrix`` may be a dense array or any scipy sparse matrix; joint-space
    operators are kept sparse (CSR) because the joint dimension reaches tens of
    thousands for squeezed chargers.
    """

    matrix: Matrix
    basis: BasisTag
    hermitian: bool = False

    def __post_init__(self):
        shape = self.matrix.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise BasisMismatchError(f"operator matrix must be square, got shape {shape}")
        if self.basis not in ("cavity", "atom", "joint"):
            raise BasisMismatchError(f"unknown basis tag {self.basis!r}")
        if self.hermitian and not is_hermitian(self.matrix):
            raise InvalidStateError("operator declared Hermitian is not")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.matrix)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.basis, self.hermitian)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same(self, other)
        return Operator(self.matrix + other.matrix, self.basis, self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same(self, other)
        return Operator(self.matrix - other.matrix, self.basis, self.hermitian and other.hermitian)

    def __mul__(self, scalar) -> "Operator":
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.matrix * scalar, self.basis, self.hermitian and np.isreal(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _check_same(self, other)
            return Operator(self.matrix @ other.matrix, self.basis)
        return self.matrix @ other


def _check_same(a: Operator, b: Operator) -> None:
    if a.basis != b.basis or a.dim != b.dim:
        raise BasisMismatchError(f"cannot combine {a.basis}[{a.dim}] with {b.basis}[{b.dim}]")


def is_hermitian(matrix: Matrix, tol: float = HERMITIAN_TOL) -> bool:
    diff = matrix - matrix.conj().T
    if sp.issparse(diff):
        return diff.nnz == 0 or np.max(np.abs(diff.data)) <= tol
    return bool(np.max(np.abs(diff), initial=0.0) <= tol)


def annihilator(basis: CavityBasis) -> Operator:
    """Photon annihilation operator, ``a|n> = sqrt(n)|n-1>``."""
    off = np.sqrt(np.arange(1, basis.dim, dtype=float))
    return Operator(np.diag(off, k=1), "cavity")


def cavity_identity(basis: CavityBasis) -> Operator:
    return Operator(np.eye(basis.dim), "cavity", hermitian=True)


def atom_identity(basis: AtomBasis) -> Operator:
    return Operator(np.eye(basis.dim), "atom", hermitian=True)


def collective_op(i: int, j: int, basis: AtomBasis) -> Operator:
    """Collective transition operator ``A_ij = sum_k |i_k><j_k|`` for levels 1..3.

    In the occupation basis this is ``b_i^dag b_j``: one atom moves from level
    ``j`` to level ``i``.
    """
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise InvalidParameterError(f"level indices must be in {{1, 2, 3}}, got ({i}, {j})")
    d = basis.dim
    M = np.zeros((d, d))
    occ = basis.occupations
    if i == j:
        np.fill_diagonal(M, occ[:, i - 1])
        return Operator(M, "atom", hermitian=True)
    for col, cfg in enumerate(occ):
        nj = cfg[j - 1]
        if nj == 0:
            continue
        target = cfg.copy()
        target[j - 1] -= 1
        target[i - 1] += 1
        M[basis.index(*target), col] = np.sqrt(nj * target[i - 1])
    return Operator(M, "atom")


def tensor(cavity_op: Operator, atom_op: Operator) -> Operator:
    """``cavity_op (x) atom_op`` on the cavity-major joint basis (sparse CSR)."""
    if cavity_op.basis != "cavity" or atom_op.basis != "atom":
        raise BasisMismatchError(
            f"tensor expects (cavity, atom) operands, got ({cavity_op.basis}, {atom_op.basis})"
        )
    M = sp.kron(sp.csr_matrix(cavity_op.matrix), sp.csr_matrix(atom_op.matrix), format="csr")
    M.eliminate_zeros()
    return Operator(M, "joint", cavity_op.hermitian and atom_op.hermitian)


@dataclass(frozen=True)
class JointState:
    """Normalized vector on ``cavity (x) atoms``."""

    amplitudes: np.ndarray
    cavity: CavityBasis
    atoms: AtomBasis

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.cavity.dim * self.atoms.dim,):
            raise BasisMismatchError(
                f"amplitude vector of length {amps.shape} does not match "
                f"{self.cavity.dim} x {self.atoms.dim}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def coefficients(self) -> np.ndarray:
        """Coefficient matrix ``Psi[n, k]`` (photon number, atom configuration)."""
        return self.amplitudes.reshape(self.cavity.dim, self.atoms.dim)

    @classmethod
    def product(cls, cavity_amps, atom_amps, cavity: CavityBasis, atoms: AtomBasis) -> "JointState":
        return cls(np.kron(cavity_amps, atom_amps), cavity, atoms)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    basis: BasisTag

    def validate(self, trace_tol: float = 1e-10, eig_tol: float = 1e-10) -> "DensityMatrix":
        M = self.matrix
        if not is_hermitian(M):
            raise InvalidStateError("density matrix is not Hermitian")
        tr = np.trace(M).real
        if abs(tr - 1.0) > trace_tol:
            raise InvalidStateError(f"density matrix trace {tr!r} differs from 1")
        lo = np.linalg.eigvalsh(M)[0]
        if lo < -eig_tol:
            raise InvalidStateError(f"density matrix has negative eigenvalue {lo:.3e}")
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return np.linalg.eigvalsh(self.matrix)


STALE_NORM_TOL = 1e-6


def partial_trace(state: JointState, keep: Literal["atoms", "cavity"]) -> DensityMatrix:
    """Reduced state of the atoms (battery) or of the cavity (charger)."""
    if abs(state.norm - 1.0) > STALE_NORM_TOL:
        raise StaleStateError(f"state norm {state.norm:.12f} deviates from 1")
    psi = state.coefficients()
    if keep == "atoms":
        rho = psi.T @ psi.conj()
        basis = "atom"
    elif keep == "cavity":
        rho = psi @ psi.conj().T
        basis = "cavity"
    else:
        raise InvalidParameterError(f"keep must be 'atoms' or 'cavity', got {keep!r}")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, basis)


def parity_labels(cavity: CavityBasis, atoms: AtomBasis) -> np.ndarray:
    """``(-1)**(n + n2)`` for every joint basis state, cavity-major."""
    n = cavity.numbers[:, None]
    n2 = atoms.occupations[None, :, 1]
    return np.where((n + n2) % 2 == 0, 1, -1).ravel()
