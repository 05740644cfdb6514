import numpy as np
import pytest

from dicke_qb.errors import InvalidParameterError, InvalidStateError
from dicke_qb.hilbert import CavityBasis, DensityMatrix, JointState, Operator, enumerate_atom_basis, partial_trace
from dicke_qb.model import ModelParams, build_system
from dicke_qb.observables import (
    ObservableRecord, entropy, ergotropy, record, records_to_columns, stored_energy, summarize,
)

import oracles


def _HB(N=3):
    b = enumerate_atom_basis(N)
    return b, Operator(np.diag(b.occupations @ np.array([0.0, 1.0, 1.95])), "atom", hermitian=True)


def _projector(dim, k):
    m = np.zeros((dim, dim))
    m[k, k] = 1
    return DensityMatrix(m, "atom")


def test_stored_energy_ground_and_excited():
    b, HB = _HB(6)
    assert stored_energy(_projector(b.dim, b.index(6, 0, 0)), HB) == 0.0
    assert stored_energy(_projector(b.dim, b.index(5, 0, 1)), HB) == pytest.approx(1.95)


def test_pure_state_fully_extractable():
    b, HB = _HB(3)
    rng = np.random.default_rng(5)
    v = rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim)
    v /= np.linalg.norm(v)
    rho = DensityMatrix(np.outer(v, v.conj()), "atom")
    W, locked = ergotropy(rho, HB)
    assert W == pytest.approx(stored_energy(rho, HB), abs=1e-12)
    assert locked == pytest.approx(0.0, abs=1e-12)


def test_passive_state_has_no_ergotropy():
    b, HB = _HB(2)
    eps = np.diag(HB.dense())
    pops = np.linspace(1, 0.1, b.dim)
    pops = pops[np.argsort(np.argsort(eps, kind="stable"), kind="stable")]  # large population on low energy
    rho = DensityMatrix(np.diag(pops / pops.sum()), "atom")
    assert ergotropy(rho, HB)[0] == pytest.approx(0.0, abs=1e-12)


def test_two_level_active_state():
    HB = Operator(np.diag([0.0, 1.0]), "atom", hermitian=True)
    rho = DensityMatrix(np.diag([0.3, 0.7]), "atom")
    W, locked = ergotropy(rho, HB)
    assert stored_energy(rho, HB) == pytest.approx(0.7)
    assert locked == pytest.approx(0.3)
    assert W == pytest.approx(0.4)
    assert oracles.brute_force_ergotropy(rho.matrix, np.array([0.0, 1.0])) == pytest.approx(0.4)


def test_ergotropy_against_permutation_oracle():
    rng = np.random.default_rng(9)
    energies = np.array([0.0, 1.0, 1.95, 2.0, 2.95])
    for _ in range(5):
        X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        rho = X @ X.conj().T
        rho /= np.trace(rho).real
        W, _ = ergotropy(DensityMatrix(rho, "atom"), Operator(np.diag(energies), "atom"))
        assert W == pytest.approx(oracles.brute_force_ergotropy(rho, energies), abs=1e-12)


def test_negative_eigenvalue_rejected():
    HB = Operator(np.diag([0.0, 1.0]), "atom")
    with pytest.raises(InvalidStateError):
        ergotropy(DensityMatrix(np.diag([1.1, -0.1]), "atom"), HB)


def test_entropy_values():
    assert entropy(_projector(4, 2)) == pytest.approx(0.0, abs=1e-14)
    assert entropy(DensityMatrix(np.eye(8) / 8, "atom")) == pytest.approx(3.0)
    c, b = CavityBasis(1), enumerate_atom_basis(1)
    psi = np.zeros((2, 3))
    psi[0, 0] = psi[1, 2] = 1 / np.sqrt(2)
    st = JointState(psi.ravel(), c, b)
    assert entropy(partial_trace(st, "atoms")) == pytest.approx(1.0)
    assert entropy(partial_trace(st, "cavity")) == pytest.approx(1.0)


def test_record_at_zero():
    p = ModelParams(N=2, charger_kind="coherent", n_max=30)
    from dicke_qb.model import initial_joint_state
    sysm = build_system(p)
    rec = record(0.0, initial_joint_state(p, sysm.cavity), sysm.H_B_atomic)
    assert rec.as_tuple() == (0.0,) * 8


def test_record_rejects_negative_time():
    p = ModelParams(N=1, charger_kind="fock", n_max=4)
    from dicke_qb.model import initial_joint_state
    sysm = build_system(p)
    with pytest.raises(InvalidParameterError):
        record(-1.0, initial_joint_state(p, sysm.cavity), sysm.H_B_atomic)


def _fake(E):
    return [ObservableRecord(float(k), e, e / 2, e / 2, e / max(k, 1), e / 2 / max(k, 1), 0.0, 0.5)
            for k, e in enumerate(E)]


def test_summarize_ties_and_peak():
    assert summarize(_fake([1.0, 1.0, 1.0])).t_E == 0.0
    s = summarize(_fake([0.0, 2.0, 5.0, 3.0]))
    assert (s.t_E, s.E_max, s.R_e) == (2.0, 5.0, 0.5)
    with pytest.raises(InvalidParameterError):
        summarize([])


def test_summarize_refinement_hits_parabola_vertex():
    t = np.linspace(0, 1, 11)
    y = 1 - (t - 0.43) ** 2
    recs = [ObservableRecord(float(a), float(b), 0, 0, 0, 0, 0, 0) for a, b in zip(t, y)]
    s = summarize(recs, refine=True)
    assert s.t_E == pytest.approx(0.43, abs=1e-12)
    assert s.E_max == pytest.approx(1.0, abs=1e-12)


def test_records_to_columns():
    cols = records_to_columns(_fake([0.0, 1.0]))
    assert list(cols) == ObservableRecord.columns()
    np.testing.assert_array_equal(cols["E_B"], [0.0, 1.0])


def test_coherent_short_time_nearly_fully_extractable(default_runs):
    cols = records_to_columns(default_runs["coherent"].records)
    E = cols["E_B"]
    k = next(i for i in range(1, E.size - 1) if E[i] >= E[i - 1] and E[i] > E[i + 1])
    print(f"coherent: first E_B maximum at t={cols['t'][k]:.2f}, R={cols['R'][k]:.4f}")
    assert cols["R"][k] > 0.9


def test_coherent_maximum_beats_other_chargers(default_runs):
    E = {k: r.summary.E_max for k, r in default_runs.items()}
    assert E["coherent"] > E["fock"] and E["coherent"] > E["squeezed"]
