"""Property-based checks of algebraic and thermodynamic invariants."""
import numpy as np
from hypothesis import given, settings, strategies as st

from dicke_qb.hilbert import (
    CavityBasis, DensityMatrix, JointState, Operator, collective_op, enumerate_atom_basis, parity_labels,
    partial_trace,
)
from dicke_qb.model import ModelParams, build_system
from dicke_qb.observables import ObservableRecord, entropy, ergotropy, stored_energy, summarize
from dicke_qb.phasespace import characteristic_function
from dicke_qb.runner.io import read_columns, write_csv

levels = st.sampled_from([1, 2, 3])
SETTINGS = settings(max_examples=40, deadline=None)


@SETTINGS
@given(N=st.integers(1, 4), i=levels, j=levels, k=levels, l=levels)
def test_collective_commutators(N, i, j, k, l):
    b = enumerate_atom_basis(N)
    A = lambda p, q: collective_op(p, q, b).dense()
    lhs = A(i, j) @ A(k, l) - A(k, l) @ A(i, j)
    rhs = (j == k) * A(i, l) - (l == i) * A(k, j)
    assert np.abs(lhs - rhs).max() < 1e-12
    assert np.abs(A(i, j).T - A(j, i)).max() < 1e-15


@SETTINGS
@given(N=st.integers(1, 3), i=levels, j=levels)
def test_collective_matches_tensor_product(N, i, j):
    import oracles

    b = enumerate_atom_basis(N)
    ref = oracles.projected_collective(N, i, j, [c.as_tuple() for c in b.configs])
    assert np.abs(collective_op(i, j, b).dense() - ref).max() < 1e-12


def _random_density(seed, dim, rank):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 4), rank=st.integers(1, 6))
def test_ergotropy_identities(seed, N, rank):
    b = enumerate_atom_basis(N)
    HB = Operator(np.diag(b.occupations @ np.array([0.0, 1.0, 1.95])), "atom", hermitian=True)
    rho = DensityMatrix(_random_density(seed, b.dim, rank), "atom")
    E = stored_energy(rho, HB)
    W, L = ergotropy(rho, HB)
    assert abs(E - W - L) < 1e-9
    assert 0 <= W <= E + 1e-12
    assert L >= -1e-12


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1), n_max=st.integers(1, 8), N=st.integers(1, 4))
def test_entropy_of_both_halves_agree(seed, n_max, N):
    rng = np.random.default_rng(seed)
    c, b = CavityBasis(n_max), enumerate_atom_basis(N)
    v = rng.normal(size=c.dim * b.dim) + 1j * rng.normal(size=c.dim * b.dim)
    state = JointState(v / np.linalg.norm(v), c, b)
    assert abs(entropy(partial_trace(state, "atoms")) - entropy(partial_trace(state, "cavity"))) < 1e-9


@SETTINGS
@given(N=st.integers(1, 4), n_max=st.integers(1, 10), g12=st.floats(0, 2), g23=st.floats(0, 2))
def test_hamiltonian_hermitian_and_parity_conserving(N, n_max, g12, g23):
    sysm = build_system(ModelParams(N=N, n_max=n_max, g12=g12, g23=g23))
    H = sysm.hamiltonian().dense()
    assert np.abs(H - H.conj().T).max() < 1e-12
    Pi = np.diag(parity_labels(sysm.cavity, sysm.atoms).astype(float))
    assert np.abs(H @ Pi - Pi @ H).max() < 1e-12


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1), x=st.floats(-2, 2), y=st.floats(-2, 2))
def test_characteristic_symmetries(seed, x, y):
    rho = DensityMatrix(_random_density(seed, 6, 3), "cavity")
    eta = complex(x, y)
    chi = characteristic_function(rho, eta)
    assert abs(chi) <= 1 + 1e-10
    assert abs(characteristic_function(rho, -eta) - np.conj(chi)) < 1e-10


@SETTINGS
@given(E=st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=30))
def test_summary_picks_a_sample_maximum(E):
    recs = [ObservableRecord(float(k), e, e, 0.0, e / max(k, 1), e / max(k, 1), 0.0, 1.0) for k, e in enumerate(E)]
    s = summarize(recs)
    assert s.E_max == max(E)
    assert E[int(s.t_E)] == s.E_max and all(e < s.E_max for e in E[: int(s.t_E)])
    assert 0 <= s.R_e <= 1


@settings(max_examples=25, deadline=None)
@given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=10))
def test_csv_round_trip(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("csv") / "x.csv"
    write_csv(path, ["v"], [[v] for v in vals])
    assert read_columns(path)["v"] == vals
