import numpy as np
import pytest

from vqse.fermion import jordan_wigner
from vqse.integrals import MolecularIntegrals, assemble_hamiltonian, freeze_core, load_fixture, restrict
from vqse.oracles import (
    SectorTooLarge,
    cisd_spectrum,
    excitation_basis,
    fci_spectrum,
    hartree_fock_energy,
    sector_dimension,
)
from vqse.sector import SectorBasis

from support import PARTITIONS, PYSCF_REFERENCE, prepared, radii


def reduced_integrals(molecule, r):
    core, active, virtual = PARTITIONS[molecule]
    m = freeze_core(load_fixture(molecule, r), range(core))
    return restrict(m, range(active + virtual))


def closed_shell_energy(m):
    """Single-determinant energy from the integrals directly."""
    occ = np.arange(m.n_electrons // 2)
    e = m.e_const + 2 * m.h1[occ, occ].sum()
    for i in occ:
        for j in occ:
            e += 2 * m.h2[i, i, j, j] - m.h2[i, j, j, i]
    return e


def test_single_orbital_closed_shell():
    m = MolecularIntegrals(1, 0.4, np.array([[-1.1]]), np.full((1, 1, 1, 1), 0.65), 2)
    e = fci_spectrum(assemble_hamiltonian(m), 2, 2)
    assert e[0] == pytest.approx(2 * -1.1 + 0.65 + 0.4, abs=1e-14)


def test_sector_dimensions():
    assert len(SectorBasis.fixed(20, 2, 0)) == sector_dimension(20, 2, 0) == 100
    assert sector_dimension(18, 6, 0) == 84**2
    assert sector_dimension(18, 5, None) == len(SectorBasis.fixed(18, 5, None))


def test_dimension_cap_checked_before_enumeration():
    with pytest.raises(SectorTooLarge):
        fci_spectrum(prepared("h2", 0.7).hamiltonian, 40, 10)


def test_fci_matches_jordan_wigner_matrix():
    for r in radii("li2")[::5]:
        prep = prepared("li2", r)
        basis = SectorBasis.fixed(16, 2, 0)
        full = jordan_wigner(prep.hamiltonian, 16).sparse_matrix()
        idx = basis.determinants
        block = full[idx][:, idx].toarray()
        ref = np.linalg.eigvalsh(block)[:5]
        np.testing.assert_allclose(fci_spectrum(prep.hamiltonian, 16, 2, n_lowest=5), ref, atol=1e-10)


def test_two_electron_cisd_is_full_ci():
    prep = prepared("h2", 1.1)
    np.testing.assert_allclose(
        cisd_spectrum(prep.hamiltonian, 20, 2, n_lowest=5), fci_spectrum(prep.hamiltonian, 20, 2, n_lowest=5), atol=1e-12
    )
    assert len(excitation_basis(20, 2, 2)) == 100


def test_hartree_fock_energy_matches_integral_formula():
    for molecule, r in (("h2", 0.7), ("li2", 2.6), ("n2", 1.1)):
        m = reduced_integrals(molecule, r)
        assert hartree_fock_energy(assemble_hamiltonian(m), 2 * m.n_spatial, m.n_electrons) == pytest.approx(
            closed_shell_energy(m), abs=1e-10
        )


def test_variational_ordering_on_fixtures():
    for molecule in ("h2", "li2"):
        for r in radii(molecule)[::3]:
            prep = prepared(molecule, r)
            n = 2 * (prep.partition.n_spatial)
            hf = hartree_fock_energy(prep.hamiltonian, n, 2)
            assert hf >= cisd_spectrum(prep.hamiltonian, n, 2)[0] - 1e-10
            assert cisd_spectrum(prep.hamiltonian, n, 2)[0] >= fci_spectrum(prep.hamiltonian, n, 2)[0] - 1e-10


def test_n2_cisd_strictly_above_fci():
    for r in radii("n2")[::3]:
        h = prepared("n2", r).hamiltonian
        hf = hartree_fock_energy(h, 18, 6)
        cisd = cisd_spectrum(h, 18, 6)[0]
        fci = fci_spectrum(h, 18, 6)[0]
        assert hf >= cisd - 1e-10 and cisd > fci + 1e-6


def test_fci_invariant_under_virtual_permutation():
    m = reduced_integrals("li2", 3.0)
    perm = [0, 1, 5, 2, 7, 3, 4, 6]
    p = np.array(perm)
    mp = MolecularIntegrals(m.n_spatial, m.e_const, m.h1[np.ix_(p, p)], m.h2[np.ix_(p, p, p, p)], m.n_electrons)
    a = fci_spectrum(assemble_hamiltonian(m), 16, 2, n_lowest=4)
    b = fci_spectrum(assemble_hamiltonian(mp), 16, 2, n_lowest=4)
    np.testing.assert_allclose(a, b, atol=1e-10)


@pytest.mark.parametrize("key", sorted(PYSCF_REFERENCE))
def test_independent_reference_values(key):
    molecule, r = key
    prep = prepared(molecule, r)
    n = 2 * prep.partition.n_spatial
    assert fci_spectrum(prep.hamiltonian, n, prep.n_electrons)[0] == pytest.approx(PYSCF_REFERENCE[key], abs=1e-8)
