"""Expansion operators and the Hermitian pencil (A, B).

Matrix elements use the bra-side adjoint:
``A_ij = <Psi| O_i^dagger H O_j |Psi>`` and ``B_ij = <Psi| O_i^dagger O_j |Psi>``.

Two assembly routes are provided:

* the measured route, which reduces each product to a two-qubit operator on
  the pair subspace and contracts it with a Pauli expectation table;
* the oracle route, which applies the operators to the embedded active-space
  statevector directly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .fermion import FermionSum, contract_virtual_vacuum, jordan_wigner
from .integrals import OrbitalPartition
from .qubitops import (
    PAIR_BASIS,
    PAULI_PAIRS,
    PauliSum,
    pauli2_coefficients,
    project_to_pair_subspace,
    table_vector,
)
from .sector import SectorBasis, operator_matrix

log = logging.getLogger(__name__)

NOISELESS_CUTOFF = 1e-6
NOISY_CUTOFF = 1e-3
ASYMMETRY_WARNING = 0.1


class EmptyPencilError(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionOperator:
    op: FermionSum
    kind: str  # "identity" | "single" | "double"
    indices: tuple[int, ...]

    @property
    def label(self) -> str:
        if self.kind == "identity":
            return "1"
        if self.kind == "single":
            i, p = self.indices
            return f"{i}^ {p}"
        mu, q, nu, r = self.indices
        return f"{mu}^ {q} {nu}^ {r}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "indices": list(self.indices), "label": self.label}

    @classmethod
    def from_dict(cls, d: Mapping) -> ExpansionOperator:
        return make_operator(d["kind"], tuple(d["indices"]))


def _spin(mode: int) -> int:
    return 1 if mode % 2 == 0 else -1


def make_operator(kind: str, indices: tuple[int, ...] = ()) -> ExpansionOperator:
    if kind == "identity":
        return ExpansionOperator(FermionSum.identity(), kind, ())
    if kind == "single":
        i, p = indices
        return ExpansionOperator(FermionSum.monomial((i, True), (p, False)), kind, (i, p))
    if kind == "double":
        mu, q, nu, r = indices
        op = FermionSum.monomial((mu, True), (q, False), (nu, True), (r, False))
        return ExpansionOperator(op, kind, (mu, q, nu, r))
    raise ValueError(f"unknown operator kind {kind!r}")


@dataclass(frozen=True)
class ExpansionOptions:
    include_identity: bool = True
    include_doubles: bool = True
    drop_null: bool = True  # drop operators that annihilate every active reference state
    n_active_electrons: int = 2


def generate_expansion_ops(partition: OrbitalPartition, options: ExpansionOptions | None = None) -> list[ExpansionOperator]:
    """Identity, ``a+_i a_p`` and ``a+_mu a_q a+_nu a_r`` with Sz conserved.

    ``partition`` must already be core-free (see :meth:`OrbitalPartition.reduced`).
    Doubles are canonicalized to ``mu > nu`` and ``q < r``; ``mu == nu`` or
    ``q == r`` products vanish and are skipped. With ``drop_null`` the
    operators that annihilate every ``n_active_electrons``-electron, Sz = 0
    active-space state (virtual modes empty) are removed.
    """
    options = options or ExpansionOptions()
    if partition.core:
        raise ValueError("generate expansion operators on the core-free partition")
    act = sorted(partition.active_modes)
    virt = sorted(partition.virtual_modes)
    ops: list[ExpansionOperator] = []
    if options.include_identity:
        ops.append(make_operator("identity"))
    for i in sorted(act + virt):
        for p in act:
            if _spin(i) == _spin(p):
                ops.append(make_operator("single", (i, p)))
    if options.include_doubles:
        for mu in virt:
            for nu in virt:
                if nu >= mu:
                    continue
                for q in act:
                    for r in act:
                        if r <= q or _spin(mu) + _spin(nu) != _spin(q) + _spin(r):
                            continue
                        ops.append(make_operator("double", (mu, q, nu, r)))
    if options.drop_null:
        n_modes = 2 * (len(partition.active) + len(partition.virtual))
        ref = _active_reference_basis(partition, options.n_active_electrons)
        target = SectorBasis.fixed(n_modes, options.n_active_electrons, 0)
        ops = [o for o in ops if operator_matrix(o.op, ref, target).nnz > 0]
    return ops


def _active_reference_basis(partition: OrbitalPartition, n_electrons: int) -> SectorBasis:
    n_modes = 2 * (len(partition.active) + len(partition.virtual))
    full = SectorBasis.fixed(n_modes, n_electrons, 0)
    act_mask = sum(1 << m for m in partition.active_modes)
    dets = full.determinants[(full.determinants & ~act_mask) == 0]
    return SectorBasis(n_modes, dets)


def reduce_operator(x: FermionSum, partition: OrbitalPartition) -> PauliSum:
    """Vacuum-contract the virtual modes, encode the 4 active modes, project to 2 qubits."""
    if len(partition.active) != 2:
        raise ValueError("the pair-subspace reduction needs exactly two active orbitals")
    act = sorted(partition.active_modes)
    contracted = contract_virtual_vacuum(x, partition.virtual_modes)
    if act != [0, 1, 2, 3]:
        relabel = {m: k for k, m in enumerate(act)}
        contracted = FermionSum(
            {tuple((relabel[o.mode], o.dagger) for o in t): c for t, c in contracted.terms.items()}
        )
    return project_to_pair_subspace(jordan_wigner(contracted, 4))


# ----------------------------------------------------------------------------
# Pencil


@dataclass
class PencilProblem:
    A: np.ndarray
    B: np.ndarray
    labels: list[ExpansionOperator]
    source: str  # "measured" | "oracle"
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.labels)
        if self.A.shape != (n, n) or self.B.shape != (n, n):
            raise ValueError("pencil matrices do not match the label count")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def permuted(self, order: Sequence[int]) -> PencilProblem:
        order = np.asarray(order)
        return PencilProblem(
            self.A[np.ix_(order, order)].copy(),
            self.B[np.ix_(order, order)].copy(),
            [self.labels[i] for i in order],
            self.source,
            dict(self.diagnostics),
        )

    def to_json(self) -> str:
        cplx = np.iscomplexobj(self.A) or np.iscomplexobj(self.B)

        def enc(m):
            if cplx:
                return {"real": np.real(m).tolist(), "imag": np.imag(m).tolist()}
            return m.tolist()

        return json.dumps(
            {
                "labels": [o.to_dict() for o in self.labels],
                "A": enc(self.A),
                "B": enc(self.B),
                "source": self.source,
                "diagnostics": self.diagnostics,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> PencilProblem:
        doc = json.loads(text)

        def dec(m):
            if isinstance(m, dict):
                return np.array(m["real"]) + 1j * np.array(m["imag"])
            return np.array(m, dtype=float)

        labels = [ExpansionOperator.from_dict(d) for d in doc["labels"]]
        return cls(dec(doc["A"]), dec(doc["B"]), labels, doc["source"], doc.get("diagnostics", {}))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> PencilProblem:
        return cls.from_json(Path(path).read_text())


def _hermitize(m: np.ndarray) -> tuple[np.ndarray, float]:
    asym = float(np.linalg.norm(m - m.conj().T))
    h = (m + m.conj().T) / 2
    if np.allclose(h.imag, 0.0, atol=1e-14):
        h = h.real
    return h, asym


def _finish(A, B, ops, source, norm_cutoff, diagnostics) -> PencilProblem:
    A, asym_a = _hermitize(A)
    B, asym_b = _hermitize(B)
    keep = np.flatnonzero(np.real(np.diag(B)) >= norm_cutoff)
    if keep.size == 0:
        raise EmptyPencilError("every expansion operator fell below the norm cutoff")
    diagnostics = dict(diagnostics)
    diagnostics.update(
        asymmetry_A=asym_a,
        asymmetry_B=asym_b,
        n_candidates=len(ops),
        n_kept=int(keep.size),
        norm_cutoff=norm_cutoff,
    )
    if max(asym_a, asym_b) > ASYMMETRY_WARNING:
        diagnostics["warning"] = "pencil asymmetry above threshold"
        log.warning("pencil asymmetry %.3g exceeds %.3g", max(asym_a, asym_b), ASYMMETRY_WARNING)
    return PencilProblem(
        A[np.ix_(keep, keep)], B[np.ix_(keep, keep)], [ops[i] for i in keep], source, diagnostics
    )


class PencilTemplate:
    """State-independent reduction of every ``O_i^dagger H O_j`` and ``O_i^dagger O_j``.

    For each pair the reduced operator is stored as its 16 two-qubit Pauli
    coefficients; its 4x4 pair-subspace matrix is
    ``<b_k, 0| O_i^dagger X O_j |b_l, 0>``, obtained by applying ``O_j`` to the
    four embedded pair states in the two-electron sector. Evaluating against a
    Pauli table is then a contraction.
    """

    def __init__(self, ops: Sequence[ExpansionOperator], hamiltonian: FermionSum, partition: OrbitalPartition):
        if len(partition.active) != 2 or partition.core:
            raise ValueError("the measured route needs a core-free partition with two active orbitals")
        self.ops = list(ops)
        self.partition = partition
        n_modes = 2 * (len(partition.active) + len(partition.virtual))
        if hamiltonian.max_mode() >= n_modes:
            raise ValueError("Hamiltonian acts outside the partition's modes")
        sector = SectorBasis.fixed(n_modes, 2, 0)
        act = sorted(partition.active_modes)
        # embedded pair states |b_l> with the active modes relabeled into place
        embedded = []
        for b in PAIR_BASIS:
            embedded.append(sum(1 << act[k] for k in range(4) if (b >> k) & 1))
        pair = SectorBasis(n_modes, np.array(embedded))
        # pair.determinants is sorted; remember where each PAIR_BASIS state landed
        col_of = [pair.index[e] for e in embedded]
        # states[:, j, l] = O_j |b_l, 0>
        states = np.zeros((len(sector), len(self.ops), 4), dtype=complex)
        for j, o in enumerate(self.ops):
            m = operator_matrix(o.op, pair, sector).toarray()
            states[:, j, :] = m[:, col_of]
        h = operator_matrix(hamiltonian, sector)
        flat = states.reshape(len(sector), -1)
        n = len(self.ops)
        mat_b = (flat.conj().T @ flat).reshape(n, 4, n, 4).transpose(0, 2, 1, 3)
        mat_a = (flat.conj().T @ (h @ flat)).reshape(n, 4, n, 4).transpose(0, 2, 1, 3)
        self.coeff_a = pauli2_coefficients(mat_a)  # (n, n, 16)
        self.coeff_b = pauli2_coefficients(mat_b)

    def reduced(self, i: int, j: int, which: str = "A") -> PauliSum:
        c = (self.coeff_a if which == "A" else self.coeff_b)[i, j]
        return PauliSum.from_labels(dict(zip(PAULI_PAIRS, c)), n_qubits=2).simplify()

    def evaluate(self, expectations: Mapping[str, float] | np.ndarray, norm_cutoff: float = NOISELESS_CUTOFF, diagnostics: dict | None = None) -> PencilProblem:
        t = np.asarray(expectations, dtype=float) if isinstance(expectations, np.ndarray) else table_vector(expectations)
        A = self.coeff_a @ t
        B = self.coeff_b @ t
        return _finish(A, B, self.ops, "measured", norm_cutoff, diagnostics or {})


def build_pencil(
    ops: Sequence[ExpansionOperator],
    hamiltonian: FermionSum,
    expectations: Mapping[str, float],
    partition: OrbitalPartition,
    norm_cutoff: float = NOISELESS_CUTOFF,
) -> PencilProblem:
    """Measured-route pencil from a Pauli expectation table at theta_min."""
    return PencilTemplate(ops, hamiltonian, partition).evaluate(expectations, norm_cutoff)


def build_pencil_oracle(
    ops: Sequence[ExpansionOperator],
    hamiltonian: FermionSum,
    active_state: np.ndarray,
    partition: OrbitalPartition,
    norm_cutoff: float = NOISELESS_CUTOFF,
    max_qubits: int = 20,
) -> PencilProblem:
    """Pencil from the exact active-space statevector embedded with empty virtuals.

    ``active_state`` lives on the ``2 * n_active`` active qubits (local
    numbering). The embedded state and all ``O_j |Psi>`` are represented in
    the fixed particle-number/Sz sector of the full register, which every
    operator here preserves.
    """
    if partition.core:
        raise ValueError("build the oracle pencil on the core-free partition")
    n_act = 2 * len(partition.active)
    n_modes = n_act + 2 * len(partition.virtual)
    if n_modes > max_qubits:
        raise ValueError(f"{n_modes} qubits exceeds the cap of {max_qubits}")
    psi = np.asarray(active_state, dtype=complex)
    if psi.shape != (1 << n_act,):
        raise ValueError("active_state has the wrong dimension")
    act = sorted(partition.active_modes)
    support = np.flatnonzero(np.abs(psi) > 1e-15)
    full_masks = np.array(
        [sum(1 << act[k] for k in range(n_act) if (b >> k) & 1) for b in support], dtype=np.int64
    )
    n_el = {int(np.bitwise_count(m)) for m in full_masks}
    sz = {sum(_spin(k) for k in range(n_modes) if (m >> k) & 1) for m in full_masks}
    if len(n_el) != 1 or len(sz) != 1:
        raise ValueError("active state must have definite particle number and Sz")
    basis = SectorBasis.fixed(n_modes, n_el.pop(), sz.pop())
    vec = basis.vector(dict(zip(full_masks.tolist(), psi[support])))
    phi = np.column_stack([operator_matrix(o.op, basis) @ vec for o in ops])
    h = operator_matrix(hamiltonian, basis)
    A = phi.conj().T @ (h @ phi)
    B = phi.conj().T @ phi
    return _finish(A, B, list(ops), "oracle", norm_cutoff, {})
