import numpy as np
import pytest

from vqse.fermion import FermionSum, hermitian_conjugate, jordan_wigner
from vqse.integrals import (
    FcidumpError,
    MolecularIntegrals,
    OrbitalPartition,
    PartitionError,
    assemble_hamiltonian,
    freeze_core,
    load_fixture,
    parse_fcidump,
    write_fcidump,
)
from vqse.oracles import fci_spectrum
from vqse.qubitops import dense_matrix
from vqse.sector import SectorBasis, operator_matrix

ONE_ORBITAL = """ &FCI NORB=1,NELEC=2,MS2=0,
  ORBSYM=1,
  ISYM=1, UHF=.FALSE.
 &END
 -1.0 1 1 0 0
 0.0 0 0 0 0
"""


def one_orbital(h00=-1.0, g0000=0.0, e=0.0):
    return MolecularIntegrals(1, e, np.array([[h00]]), np.full((1, 1, 1, 1), g0000), 2, None)


def test_parse_minimal_file():
    m = parse_fcidump(ONE_ORBITAL)
    assert m.n_spatial == 1 and m.n_electrons == 2 and m.e_const == 0.0
    h = assemble_hamiltonian(m)
    assert h == -1.0 * (FermionSum.number(0) + FermionSum.number(1))


def test_hubbard_atom_form():
    h = assemble_hamiltonian(one_orbital(-1.0, 0.5))
    expected = -1.0 * (FermionSum.number(0) + FermionSum.number(1)) + 0.5 * FermionSum.number(0) * FermionSum.number(1)
    assert h.isclose(expected)


def test_h2_fixture_has_ten_orbitals():
    m = load_fixture("h2", 0.70)
    assert m.n_spatial == 10 and m.n_electrons == 2
    assert m.geometry_label == pytest.approx(0.70)
    m.check_symmetry(1e-10)


def test_round_trip():
    m = load_fixture("li2", 2.6)
    back = parse_fcidump(write_fcidump(m))
    np.testing.assert_allclose(back.h1, m.h1, atol=1e-12)
    np.testing.assert_allclose(back.h2, m.h2, atol=1e-12)
    assert back.e_const == pytest.approx(m.e_const, abs=1e-12)


@pytest.mark.parametrize(
    "body, line",
    [
        (" 1.0 1 1 0 0\n 2.0 1 1 0 0\n", 6),
        (" 1.0 1 3 0 0\n", 5),
        (" 0.5 1 1 1 1\n 0.6 1 1 1 1\n", 6),
        (" abc 1 1 0 0\n", 5),
    ],
)
def test_parse_errors_name_line(body, line):
    header = ONE_ORBITAL.split(" -1.0")[0].replace("NORB=1", "NORB=2")
    with pytest.raises(FcidumpError) as err:
        parse_fcidump(header + body)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_missing_header_key():
    with pytest.raises(FcidumpError):
        parse_fcidump(" &FCI NELEC=2 &END\n 1.0 1 1 0 0\n")


def test_freeze_empty_core_is_identity():
    m = load_fixture("h2", 0.70)
    assert freeze_core(m, []) is m


def test_li2_frozen_core_counts():
    mf = freeze_core(load_fixture("li2", 2.6), [0, 1])
    assert mf.n_spatial == 8 and mf.n_electrons == 2


def test_freeze_core_composes():
    m = load_fixture("li2", 3.0)
    both = freeze_core(m, [0, 1])
    stepwise = freeze_core(freeze_core(m, [0]), [0])
    np.testing.assert_allclose(stepwise.h1, both.h1, atol=1e-10)
    np.testing.assert_allclose(stepwise.h2, both.h2, atol=1e-10)
    assert stepwise.e_const == pytest.approx(both.e_const, abs=1e-10)


def test_frozen_core_matches_core_occupied_sector():
    m = load_fixture("li2", 2.6)
    full = assemble_hamiltonian(m)
    sector = SectorBasis.fixed(20, 6, 0)
    core_mask = 0b1111
    pinned = SectorBasis(20, sector.determinants[(sector.determinants & core_mask) == core_mask])
    e_pinned = np.linalg.eigvalsh(operator_matrix(full, pinned).toarray())[0]
    mf = freeze_core(m, [0, 1])
    e_frozen = fci_spectrum(assemble_hamiltonian(mf), 16, 2, 0, 1)[0]
    assert e_frozen == pytest.approx(e_pinned, abs=1e-9)


def test_freeze_core_errors():
    m = load_fixture("h2", 0.70)
    with pytest.raises(PartitionError):
        freeze_core(m, [0, 1])  # needs 4 electrons
    with pytest.raises(PartitionError):
        freeze_core(m, [12])


def test_partition_validation():
    with pytest.raises(PartitionError):
        OrbitalPartition((0,), (0, 1), ())
    with pytest.raises(PartitionError):
        OrbitalPartition((), (), (1,))
    with pytest.raises(PartitionError):
        OrbitalPartition.from_counts(0, 2, 3).validate(6)
    p = OrbitalPartition.from_counts(2, 2, 6)
    p.validate(10)
    assert p.reduced() == OrbitalPartition((), (0, 1), tuple(range(2, 8)))
    assert p.reduced().active_modes == (0, 1, 2, 3)


def test_hamiltonian_hermitian_and_sz_symmetric():
    m = freeze_core(load_fixture("li2", 2.6), [0, 1])
    from vqse.integrals import restrict

    h = assemble_hamiltonian(restrict(m, range(4), 2))
    assert (h - hermitian_conjugate(h)).isclose(FermionSum.zero())
    assert h.is_particle_conserving()
    hd = dense_matrix(jordan_wigner(h, 8))
    sz = dense_matrix(jordan_wigner(sum((FermionSum.number(k) * (1 if k % 2 == 0 else -1) for k in range(8)), FermionSum.zero()), 8))
    assert np.linalg.norm(hd @ sz - sz @ hd) < 1e-10


def test_active_space_spectrum_matches_determinant_build():
    from vqse.integrals import restrict

    m = load_fixture("h2", 1.2)
    h = assemble_hamiltonian(restrict(m, [0, 1], 2))
    dense = dense_matrix(jordan_wigner(h, 4))
    sector = [b for b in range(16) if bin(b).count("1") == 2]
    jw_vals = np.linalg.eigvalsh(dense[np.ix_(sector, sector)])
    det_vals = fci_spectrum(h, 4, 2, None, 6)
    np.testing.assert_allclose(jw_vals, det_vals, atol=1e-12)
