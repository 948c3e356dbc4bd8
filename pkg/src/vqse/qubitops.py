"""Pauli-string algebra and the two-electron pair-subspace projection.

A Pauli string is stored as a pair of bitmasks ``(x, z)`` meaning
``P(x, z) = i^{|x & z|} X^x Z^z`` so that ``x = z = 1`` on a qubit is ``Y``.
Text labels put qubit 0 first: ``"YX"`` is ``Y`` on qubit 0 and ``X`` on qubit 1.
Basis-state integers use qubit 0 as the least-significant bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp

PRUNE_TOL = 1e-14
DENSE_QUBIT_CAP = 20

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTER.items()}

# Pair subspace: two electrons with opposite spins in two spatial orbitals.
# |0011>, |0110>, |1001>, |1100> (qubit 0 rightmost) -> |00>, |01>, |10>, |11>.
PAIR_BASIS = (0b0011, 0b0110, 0b1001, 0b1100)

PAULI_PAIRS = tuple(a + b for a in "IXYZ" for b in "IXYZ")


def _popcount(v: int) -> int:
    return bin(v).count("1")


def label_to_xz(label: str) -> tuple[int, int]:
    x = z = 0
    for q, ch in enumerate(label.upper()):
        bx, bz = _BITS[ch]
        x |= bx << q
        z |= bz << q
    return x, z


def xz_to_label(x: int, z: int, n: int) -> str:
    return "".join(_LETTER[((x >> q) & 1, (z >> q) & 1)] for q in range(n))


class QubitCapError(ValueError):
    pass


class PauliSum:
    """Linear combination of Pauli strings on ``n_qubits`` qubits."""

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n_qubits = int(n_qubits)
        mask = (1 << self.n_qubits) - 1
        out: dict[tuple[int, int], complex] = {}
        for (x, z), c in (terms or {}).items():
            if (x | z) & ~mask:
                raise ValueError("Pauli string acts outside the register")
            if abs(c) >= PRUNE_TOL:
                out[(x, z)] = complex(c)
        self.terms = out

    @classmethod
    def from_labels(cls, labels: Mapping[str, complex], n_qubits: int | None = None) -> PauliSum:
        if n_qubits is None:
            n_qubits = max((len(k) for k in labels), default=0)
        acc: dict[tuple[int, int], complex] = {}
        for lab, c in labels.items():
            if len(lab) != n_qubits:
                raise ValueError(f"label {lab!r} does not have {n_qubits} letters")
            k = label_to_xz(lab)
            acc[k] = acc.get(k, 0) + c
        return cls(n_qubits, acc)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def zero(cls, n_qubits: int) -> PauliSum:
        return cls(n_qubits)

    def to_labels(self) -> dict[str, complex]:
        return {xz_to_label(x, z, self.n_qubits): c for (x, z), c in self.terms.items()}

    def coeff(self, label: str) -> complex:
        return self.terms.get(label_to_xz(label), 0.0)

    # algebra ------------------------------------------------------------
    def _check(self, other: PauliSum):
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PauliSum.identity(self.n_qubits, other)
        self._check(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0) + c
        return PauliSum(self.n_qubits, acc)

    __radd__ = __add__

    def __neg__(self):
        return PauliSum(self.n_qubits, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PauliSum(self.n_qubits, {k: c * other for k, c in self.terms.items()})
        self._check(other)
        acc: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in self.terms.items():
            y1 = _popcount(x1 & z1)
            for (x2, z2), c2 in other.terms.items():
                x, z = x1 ^ x2, z1 ^ z2
                # P1 P2 = i^{y1+y2+2|z1&x2|-|x&z|} P(x, z)
                k = (y1 + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x & z)) % 4
                acc[(x, z)] = acc.get((x, z), 0) + c1 * c2 * (1j**k)
        return PauliSum(self.n_qubits, acc)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, {len(self.terms)} terms)"

    def dagger(self) -> PauliSum:
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self.terms.items()})

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def isclose(self, other: PauliSum, tol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def simplify(self, tol: float = PRUNE_TOL) -> PauliSum:
        return PauliSum(self.n_qubits, {k: c for k, c in self.terms.items() if abs(c) >= tol})

    def to_text(self) -> str:
        lines = []
        for lab, c in sorted(self.to_labels().items()):
            lines.append(f"{c.real:+.17g}{c.imag:+.17g}j {lab}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> PauliSum:
        labels: dict[str, complex] = {}
        for line in text.splitlines():
            if line.strip():
                coeff, lab = line.split()
                labels[lab] = labels.get(lab, 0) + complex(coeff)
        return cls.from_labels(labels, n_qubits)

    # matrices -----------------------------------------------------------
    def apply(self, state: np.ndarray) -> np.ndarray:
        """``op @ state`` without building a matrix."""
        n = self.n_qubits
        idx = np.arange(1 << n)
        out = np.zeros(1 << n, dtype=complex)
        for (x, z), c in self.terms.items():
            # P|b> = i^{|xz|} (-1)^{|z & b|} |b ^ x>
            phase = c * (1j ** _popcount(x & z))
            signs = 1 - 2 * (np.bitwise_count(idx & z).astype(np.int64) & 1)
            out[idx ^ x] += phase * signs * state
        return out

    def sparse_matrix(self, cap: int = DENSE_QUBIT_CAP) -> sp.csr_matrix:
        n = self.n_qubits
        if n > cap:
            raise QubitCapError(f"{n} qubits exceeds the cap of {cap}")
        dim = 1 << n
        idx = np.arange(dim)
        rows, cols, vals = [], [], []
        for (x, z), c in self.terms.items():
            phase = c * (1j ** _popcount(x & z))
            signs = 1 - 2 * (np.bitwise_count(idx & z).astype(np.int64) & 1)
            rows.append(idx ^ x)
            cols.append(idx)
            vals.append(phase * signs)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )


def dense_matrix(op: PauliSum, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix, qubit 0 as the least-significant bit."""
    return op.sparse_matrix(cap).toarray()


def pauli_matrix(label: str) -> np.ndarray:
    return dense_matrix(PauliSum.from_labels({label: 1.0}))


# ----------------------------------------------------------------------------
# Pair-subspace projection


def pair_subspace_matrix(op4: PauliSum) -> np.ndarray:
    """4x4 matrix ``<b_k| op4 |b_l>`` over :data:`PAIR_BASIS`."""
    if op4.n_qubits != 4:
        raise ValueError(f"expected a 4-qubit operator, got {op4.n_qubits} qubits")
    pos = {b: i for i, b in enumerate(PAIR_BASIS)}
    m = np.zeros((4, 4), dtype=complex)
    for (x, z), c in op4.terms.items():
        phase = c * (1j ** _popcount(x & z))
        for l, b in enumerate(PAIR_BASIS):
            k = pos.get(b ^ x)
            if k is not None:
                m[k, l] += phase * (-1) ** _popcount(z & b)
    return m


_PAIR_PAULIS = np.array([pauli_matrix(lab) for lab in PAULI_PAIRS])


def matrix_to_pauli2(m: np.ndarray, tol: float = PRUNE_TOL) -> PauliSum:
    """Expand a 4x4 matrix in two-qubit Pauli strings, ``c_P = tr(P M) / 4``."""
    coeffs = np.einsum("pij,ji->p", _PAIR_PAULIS, m) / 4.0
    return PauliSum.from_labels(
        {lab: c for lab, c in zip(PAULI_PAIRS, coeffs) if abs(c) >= tol}, n_qubits=2
    )


def pauli2_coefficients(m: np.ndarray) -> np.ndarray:
    """Vectorized :func:`matrix_to_pauli2`: ``(..., 4, 4) -> (..., 16)`` in :data:`PAULI_PAIRS` order."""
    return np.einsum("pij,...ji->...p", _PAIR_PAULIS, m) / 4.0


def project_to_pair_subspace(op4: PauliSum) -> PauliSum:
    """Restrict a 4-qubit operator to the two-electron, Sz = 0 subspace on 2 qubits."""
    return matrix_to_pauli2(pair_subspace_matrix(op4))


def embed_pair_state(psi2: np.ndarray) -> np.ndarray:
    """Map a 2-qubit state to the corresponding 4-qubit state in :data:`PAIR_BASIS`."""
    out = np.zeros(16, dtype=complex)
    out[list(PAIR_BASIS)] = psi2
    return out


@dataclass(frozen=True)
class ProjectedHamiltonian:
    """Two-qubit Hamiltonian ``g1 I + g2 Z1 + g3 Z2 + g4 Z1Z2 + g5 Y1Y2``.

    Qubit "1" is qubit 0 of the register and qubit "2" is qubit 1.
    """

    coeffs: PauliSum

    def _g(self, label: str) -> float:
        return self.coeffs.coeff(label).real

    @property
    def g1(self) -> float:
        return self._g("II")

    @property
    def g2(self) -> float:
        return self._g("ZI")

    @property
    def g3(self) -> float:
        return self._g("IZ")

    @property
    def g4(self) -> float:
        return self._g("ZZ")

    @property
    def g5(self) -> float:
        return self._g("YY")

    def off_structure_norm(self) -> float:
        """Largest coefficient outside the five-term form."""
        allowed = {label_to_xz(k) for k in ("II", "ZI", "IZ", "ZZ", "YY")}
        return max((abs(c) for k, c in self.coeffs.terms.items() if k not in allowed), default=0.0)

    def matrix(self) -> np.ndarray:
        return dense_matrix(self.coeffs)

    def ground_energy(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix())[0])


def expectation_from_pauli_table(op2: PauliSum, table: Mapping[str, float]) -> float:
    """``sum_P coeff(P) <P>`` for a 2-qubit operator from a measured Pauli table."""
    if op2.n_qubits != 2:
        raise ValueError("expected a 2-qubit operator")
    total = 0j
    for lab, c in op2.to_labels().items():
        if lab not in table:
            raise KeyError(f"Pauli table has no entry for {lab}")
        total += c * table[lab]
    return float(total.real)


def table_vector(table: Mapping[str, float]) -> np.ndarray:
    missing = [p for p in PAULI_PAIRS if p not in table]
    if missing:
        raise KeyError(f"Pauli table has no entry for {missing[0]}")
    return np.array([table[p] for p in PAULI_PAIRS], dtype=float)


def density_from_table(table: Mapping[str, float]) -> np.ndarray:
    """Two-qubit density matrix ``sum_P <P> P / 4``."""
    return np.einsum("p,pij->ij", table_vector(table), _PAIR_PAULIS) / 4.0


def all_pauli_labels(n: int) -> list[str]:
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n)]
