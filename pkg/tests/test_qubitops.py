import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqse.fermion import FermionSum, jordan_wigner
from vqse.oracles import fci_spectrum
from vqse.qubitops import (
    PAULI_PAIRS,
    PauliSum,
    ProjectedHamiltonian,
    QubitCapError,
    dense_matrix,
    expectation_from_pauli_table,
    project_to_pair_subspace,
)
from vqse.simulator import prepare_ansatz

from support import projected, prepared, radii

SECTOR = [b for b in range(16) if bin(b).count("1") == 2 and bin(b & 0b0101).count("1") == 1]

labels4 = st.text(alphabet="IXYZ", min_size=4, max_size=4)
pauli_sums = st.dictionaries(
    labels4, st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False), min_size=1, max_size=5
).map(lambda d: PauliSum.from_labels(d, n_qubits=4))


def test_dense_matrix_examples():
    np.testing.assert_array_equal(dense_matrix(PauliSum.from_labels({"X": 1.0})), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(dense_matrix(PauliSum.from_labels({"ZZ": 1.0})), np.diag([1, -1, -1, 1]))
    # qubit 0 is the least significant bit: Z on qubit 0 flips the sign of odd indices
    np.testing.assert_array_equal(np.diag(dense_matrix(PauliSum.from_labels({"ZI": 1.0}))).real, [1, -1, 1, -1])


def test_dense_matrix_cap():
    with pytest.raises(QubitCapError):
        dense_matrix(PauliSum.identity(5), cap=4)


@settings(max_examples=40, deadline=None)
@given(pauli_sums, pauli_sums)
def test_product_and_linearity_match_dense(a, b):
    np.testing.assert_allclose(dense_matrix(a * b), dense_matrix(a) @ dense_matrix(b), atol=1e-12)
    np.testing.assert_allclose(dense_matrix(a + b), dense_matrix(a) + dense_matrix(b), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(pauli_sums, pauli_sums, st.floats(-2, 2))
def test_projection_linear_and_hermitian(a, b, c):
    lhs = project_to_pair_subspace(a * c + b)
    rhs = project_to_pair_subspace(a) * c + project_to_pair_subspace(b)
    assert lhs.isclose(rhs, tol=1e-12)
    h = a + a.dagger()
    assert project_to_pair_subspace(h).is_hermitian()


def test_projection_examples():
    assert project_to_pair_subspace(PauliSum.identity(4)).isclose(PauliSum.identity(2))
    n_total = sum((FermionSum.number(k) for k in range(4)), FermionSum.zero())
    assert project_to_pair_subspace(jordan_wigner(n_total, 4)).isclose(PauliSum.identity(2, 2.0))
    with pytest.raises(ValueError):
        project_to_pair_subspace(PauliSum.identity(3))


@pytest.mark.parametrize("molecule", ["h2", "li2"])
def test_five_term_structure_on_fixtures(molecule):
    for r in radii(molecule):
        h2q = projected(molecule, r)
        assert h2q.off_structure_norm() < 1e-10
        h4 = prepared(molecule, r).active_hamiltonian
        assert h2q.ground_energy() == pytest.approx(fci_spectrum(h4, 4, 2, 0, 1)[0], abs=1e-10)


def test_spectral_containment():
    h4 = prepared("h2", 1.5).active_hamiltonian
    sector_vals = np.linalg.eigvalsh(dense_matrix(jordan_wigner(h4, 4))[np.ix_(SECTOR, SECTOR)])
    proj_vals = np.linalg.eigvalsh(projected("h2", 1.5).matrix())
    np.testing.assert_allclose(proj_vals, sector_vals, atol=1e-10)


def test_expectation_from_table():
    table = dict.fromkeys(PAULI_PAIRS, 0.3)
    table["II"] = 1.0
    table["ZZ"] = -0.5
    assert expectation_from_pauli_table(PauliSum.identity(2), table) == 1.0
    assert expectation_from_pauli_table(PauliSum.from_labels({"ZZ": 1.0}), table) == -0.5
    del table["XY"]
    with pytest.raises(KeyError, match="XY"):
        expectation_from_pauli_table(PauliSum.from_labels({"XY": 1.0}), table)


def test_energy_functional_matches_statevector():
    h2q = projected("h2", 0.7)
    rng = np.random.default_rng(3)
    for theta in rng.uniform(-np.pi, np.pi, 8):
        psi = prepare_ansatz(theta)
        table = {p: np.vdot(psi, dense_matrix(PauliSum.from_labels({p: 1.0})) @ psi).real for p in PAULI_PAIRS}
        e_table = expectation_from_pauli_table(h2q.coeffs, table)
        # the five-term functional written out
        e_form = h2q.g1 + h2q.g2 * table["ZI"] + h2q.g3 * table["IZ"] + h2q.g4 * table["ZZ"] + h2q.g5 * table["YY"]
        e_state = np.vdot(psi, h2q.matrix() @ psi).real
        assert e_table == pytest.approx(e_state, abs=1e-12)
        assert e_form == pytest.approx(e_state, abs=1e-12)


def test_text_round_trip():
    op = PauliSum.from_labels({"XZIY": 0.5 - 0.25j, "IIII": 2.0})
    assert PauliSum.from_text(op.to_text()).isclose(op)
