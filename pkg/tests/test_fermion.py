import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqse.fermion import (
    FermionSum,
    LadderOp,
    contract_virtual_vacuum,
    format_fermion,
    hermitian_conjugate,
    jordan_wigner,
    multiply,
    normal_order,
    parse_fermion,
)
from vqse.qubitops import PauliSum, dense_matrix

from support import prepared, random_state


def ladder_matrix(mode: int, dagger: bool, n_modes: int) -> np.ndarray:
    """Occupation-number construction, independent of the Pauli code."""
    dim = 1 << n_modes
    m = np.zeros((dim, dim))
    for b in range(dim):
        occupied = (b >> mode) & 1
        if occupied == dagger:
            continue
        sign = (-1) ** bin(b & ((1 << mode) - 1)).count("1")
        m[b ^ (1 << mode), b] = sign
    return m


def fermion_matrix(a: FermionSum, n_modes: int) -> np.ndarray:
    dim = 1 << n_modes
    out = np.zeros((dim, dim), dtype=complex)
    for term, c in a.terms.items():
        m = np.eye(dim, dtype=complex)
        for op in term:
            m = m @ ladder_matrix(op.mode, op.dagger, n_modes)
        out += c * m
    return out


ladder = st.tuples(st.integers(0, 3), st.booleans())
monomials = st.lists(ladder, min_size=0, max_size=4)
coeffs = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)
sums = st.lists(st.tuples(monomials, coeffs), min_size=1, max_size=4).map(
    lambda items: sum((FermionSum.monomial(*m, coeff=c) for m, c in items), FermionSum.zero())
)


def test_anticommutator_and_exclusion():
    a0, c0 = FermionSum.annihilate(0), FermionSum.create(0)
    assert multiply(a0, c0) == FermionSum.identity() - FermionSum.number(0)
    assert len(multiply(c0, c0)) == 0


def test_canonical_order_of_terms():
    x = FermionSum.monomial((0, False), (2, True), (1, False), (3, True))
    (term,) = x.terms
    assert [str(op) for op in term] == ["3^", "2^", "0", "1"]
    # one swap past the other creation and two past annihilations: sign +1 overall
    assert x.terms[term] == pytest.approx(1.0)


def test_hermitian_conjugate_examples():
    x = FermionSum.monomial((1, True), (0, False))
    assert hermitian_conjugate(x) == FermionSum.monomial((0, True), (1, False))
    assert hermitian_conjugate(FermionSum.identity(2 + 3j)) == FermionSum.identity(2 - 3j)


def test_vacuum_contraction_examples():
    mu = 5
    assert len(contract_virtual_vacuum(FermionSum.number(mu), [mu])) == 0
    aa = FermionSum.monomial((mu, False), (mu, True))
    assert contract_virtual_vacuum(aa, [mu]) == FermionSum.identity()


def test_jordan_wigner_examples():
    assert jordan_wigner(FermionSum.create(0), 1).isclose(PauliSum.from_labels({"X": 0.5, "Y": -0.5j}))
    expected = PauliSum.from_labels({"ZZX": 0.5, "ZZY": -0.5j})
    assert jordan_wigner(FermionSum.create(2), 3).isclose(expected)


def test_jordan_wigner_rejects_small_register():
    with pytest.raises(ValueError):
        jordan_wigner(FermionSum.create(4), 3)


def test_text_round_trip():
    x = FermionSum.monomial((3, True), (2, True), (0, False), (1, False), coeff=1.5) + FermionSum.identity(-0.25j)
    text = format_fermion(x)
    assert "(+1.5) 3^ 2^ 0 1" in text
    assert parse_fermion(text) == x


def test_fixture_hamiltonian_jw_matches_occupation_basis():
    h = prepared("h2", 0.7).active_hamiltonian
    dense_jw = dense_matrix(jordan_wigner(h, 4))
    np.testing.assert_allclose(dense_jw, fermion_matrix(h, 4), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(sums, sums)
def test_multiply_matches_dense(a, b):
    np.testing.assert_allclose(
        fermion_matrix(multiply(a, b), 4), fermion_matrix(a, 4) @ fermion_matrix(b, 4), atol=1e-12
    )


@settings(max_examples=25, deadline=None)
@given(sums, sums, sums)
def test_multiply_associative(a, b, c):
    left = multiply(multiply(a, b), c)
    right = multiply(a, multiply(b, c))
    np.testing.assert_allclose(fermion_matrix(left, 4), fermion_matrix(right, 4), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(sums)
def test_conjugate_matches_dense(a):
    np.testing.assert_allclose(fermion_matrix(hermitian_conjugate(a), 4), fermion_matrix(a, 4).conj().T, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(sums)
def test_normal_order_is_canonical(a):
    assert normal_order(normal_order(a)) == normal_order(a)
    for term in a.terms:
        cre = [op.mode for op in term if op.dagger]
        ann = [op.mode for op in term if not op.dagger]
        assert list(term) == [LadderOp(m, True) for m in cre] + [LadderOp(m, False) for m in ann]
        assert cre == sorted(cre, reverse=True) and len(set(cre)) == len(cre)
        assert ann == sorted(ann) and len(set(ann)) == len(ann)


@settings(max_examples=40, deadline=None)
@given(sums, sums)
def test_jordan_wigner_homomorphism(a, b):
    lhs = jordan_wigner(multiply(a, b), 4)
    rhs = jordan_wigner(a, 4) * jordan_wigner(b, 4)
    assert lhs.isclose(rhs, tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(sums)
def test_jordan_wigner_matches_dense(a):
    np.testing.assert_allclose(dense_matrix(jordan_wigner(a, 4)), fermion_matrix(a, 4), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(sums, st.integers(0, 2**31 - 1))
def test_vacuum_contraction_matches_embedding(a, seed):
    # active modes 0, 1; virtual modes 2, 3 left empty
    rng = np.random.default_rng(seed)
    full = fermion_matrix(a, 4)
    reduced = fermion_matrix(contract_virtual_vacuum(a, [2, 3]), 4)[:4, :4]
    for _ in range(20):
        psi = random_state(rng, 4)
        embedded = np.zeros(16, dtype=complex)
        embedded[:4] = psi
        assert np.vdot(embedded, full @ embedded) == pytest.approx(np.vdot(psi, reduced @ psi), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(sums, sums, coeffs)
def test_vacuum_contraction_is_linear(a, b, c):
    lhs = contract_virtual_vacuum(a * c + b, [2, 3])
    rhs = contract_virtual_vacuum(a, [2, 3]) * c + contract_virtual_vacuum(b, [2, 3])
    assert lhs.isclose(rhs)


def test_sz_weights_and_particle_conservation():
    h = prepared("h2", 0.7).hamiltonian
    assert h.is_particle_conserving()
    assert h.sz_weights() == {0}
    assert FermionSum.monomial((2, True), (1, False)).sz_weights() == {2}
