"""Two-qubit circuit simulation, readout noise, unfolding and the theta sweep.

Conventions: qubit 0 is the least-significant bit of basis-state indices and
the first letter of a measurement setting / Pauli label. Bitstrings in counts
are written most-significant first, so ``"01"`` means qubit 0 read 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .qubitops import DENSE_QUBIT_CAP, PAULI_PAIRS, PauliSum, QubitCapError

SETTINGS = tuple(a + b for a in "XYZ" for b in "XYZ")
BITSTRINGS = ("00", "01", "10", "11")
DEFAULT_GRID_SIZE = 257

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_CNOT_01 = np.array(  # control qubit 0, target qubit 1, index = 2*q1 + q0
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)


class CalibrationError(ValueError):
    """Readout confusion matrix cannot be inverted."""


def rx(angle: float) -> np.ndarray:
    return math.cos(angle / 2) * _I2 - 1j * math.sin(angle / 2) * _X


def ry(angle: float) -> np.ndarray:
    return math.cos(angle / 2) * _I2 - 1j * math.sin(angle / 2) * _Y


def rz(angle: float) -> np.ndarray:
    return math.cos(angle / 2) * _I2 - 1j * math.sin(angle / 2) * _Z


def on_qubit(gate: np.ndarray, qubit: int) -> np.ndarray:
    """Lift a 1-qubit gate to the 2-qubit register."""
    return np.kron(_I2, gate) if qubit == 0 else np.kron(gate, _I2)


# Basis-change gates R_t: measuring Z needs nothing, Y needs Rx(pi/2), X needs Ry(-pi/2).
BASIS_GATES = {"Z": _I2, "Y": rx(math.pi / 2), "X": ry(-math.pi / 2)}


def zero_state(n_qubits: int = 2) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def ansatz_circuit(theta: float) -> list[np.ndarray]:
    """Gate list (2-qubit matrices, applied in order) for ``exp(-i theta Y1 X2 / 2)``.

    Rotate Y on qubit 0 and X on qubit 1 to Z, entangle the ZZ parity with
    CNOTs around an Rz(theta), then rotate back.
    """
    basis = on_qubit(BASIS_GATES["Y"], 0) @ on_qubit(BASIS_GATES["X"], 1)
    return [basis, _CNOT_01, on_qubit(rz(theta), 1), _CNOT_01, basis.conj().T]


def prepare_ansatz(theta: float, method: str = "circuit") -> np.ndarray:
    """``exp(-i theta Y1 X2 / 2)|00>``; ``method`` is ``"circuit"`` or ``"exponential"``."""
    if method == "circuit":
        return apply_circuit(ansatz_circuit(theta), zero_state(2))
    if method == "exponential":
        gen = PauliSum.from_labels({"YX": -0.5j * theta})
        return apply_exponential(gen, zero_state(2))
    raise ValueError(f"unknown ansatz method {method!r}")


# ----------------------------------------------------------------------------
# Statevector kernels


def apply_circuit(gates: Sequence[np.ndarray], state: np.ndarray) -> np.ndarray:
    out = np.asarray(state, dtype=complex)
    for g in gates:
        out = g @ out
    return out


def _as_sparse(op) -> sp.csr_matrix:
    if isinstance(op, PauliSum):
        return op.sparse_matrix()
    return sp.csr_matrix(op)


def apply_exponential(generator, state: np.ndarray) -> np.ndarray:
    """``exp(G) |state>`` for anti-Hermitian ``G`` (PauliSum, sparse or dense matrix)."""
    g = _as_sparse(generator)
    if g.shape[0] > (1 << DENSE_QUBIT_CAP):
        raise QubitCapError("statevector exceeds the qubit cap")
    herm_part = g + g.conj().T
    if herm_part.nnz and abs(herm_part).max() > 1e-10:
        raise ValueError("generator is not anti-Hermitian")
    return spla.expm_multiply(g, np.asarray(state, dtype=complex), traceA=0.0)


def statevector_apply(op, state: np.ndarray) -> np.ndarray:
    """Apply a PauliSum, a gate list, or ``("exp", generator)`` to ``state``."""
    if isinstance(op, PauliSum):
        return op.apply(np.asarray(state, dtype=complex))
    if isinstance(op, tuple) and len(op) == 2 and op[0] == "exp":
        return apply_exponential(op[1], state)
    if isinstance(op, (list, tuple)):
        return apply_circuit(op, state)
    raise TypeError(f"cannot apply {type(op).__name__}")


# ----------------------------------------------------------------------------
# Noise and measurement


@dataclass(frozen=True)
class NoiseModel:
    """Shot sampling plus readout error; ``shots = 0`` gives exact probabilities.

    ``readout[q] = (p01, p10)``: probability of reading 1 given 0 and 0 given 1.
    """

    shots: int = 8192
    readout: tuple[tuple[float, float], ...] = ((0.02, 0.02), (0.02, 0.02))
    depolarizing: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be non-negative")
        object.__setattr__(self, "readout", tuple(tuple(float(p) for p in q) for q in self.readout))
        for q in self.readout:
            if len(q) != 2 or not all(0.0 <= p <= 1.0 for p in q):
                raise ValueError("readout probabilities must lie in [0, 1]")
        if not 0.0 <= self.depolarizing <= 1.0:
            raise ValueError("depolarizing probability must lie in [0, 1]")

    @classmethod
    def noiseless(cls) -> NoiseModel:
        return cls(shots=0, readout=((0.0, 0.0), (0.0, 0.0)))

    @property
    def exact(self) -> bool:
        return self.shots == 0

    @property
    def has_readout_error(self) -> bool:
        return any(p > 0 for q in self.readout for p in q)

    def confusion_matrix(self) -> np.ndarray:
        """``C[measured, true]`` over 2-qubit outcomes (index ``2*b1 + b0``)."""
        mats = [np.array([[1 - p01, p10], [p01, 1 - p10]]) for p01, p10 in self.readout]
        return np.kron(mats[1], mats[0])


def rotate_to_setting(state: np.ndarray, setting: str) -> np.ndarray:
    gate = on_qubit(BASIS_GATES[setting[0]], 0) @ on_qubit(BASIS_GATES[setting[1]], 1)
    return gate @ state


def outcome_probabilities(state: np.ndarray, setting: str, noise: NoiseModel) -> np.ndarray:
    """Probabilities of reading each 2-bit outcome, noise channels included."""
    probs = np.abs(rotate_to_setting(state, setting)) ** 2
    probs /= probs.sum()
    if noise.depolarizing:
        probs = (1 - noise.depolarizing) * probs + noise.depolarizing / 4
    if noise.has_readout_error:
        probs = noise.confusion_matrix() @ probs
    return probs


def measure_setting(
    state: np.ndarray, setting: str, noise: NoiseModel, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Outcome counts indexed by ``2*b1 + b0``; exact probabilities when ``noise.shots == 0``."""
    probs = outcome_probabilities(state, setting, noise)
    if noise.exact:
        return probs
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    return rng.multinomial(noise.shots, probs / probs.sum()).astype(np.int64)


def unfold_readout(counts: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Invert the readout confusion channel on empirical frequencies."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("no counts to unfold")
    freqs = counts / total
    if not noise.has_readout_error:
        return freqs
    for p01, p10 in noise.readout:
        if p01 + p10 >= 1.0:
            raise CalibrationError(f"singular readout channel (p01={p01}, p10={p10})")
    probs = np.linalg.solve(noise.confusion_matrix(), freqs)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def pauli_table_from_probabilities(probs_by_setting: dict[str, np.ndarray]) -> np.ndarray:
    """16-entry table in :data:`PAULI_PAIRS` order from per-setting outcome probabilities.

    ``<P Q>`` comes from setting ``PQ``; ``<P I>`` from ``PZ`` and ``<I Q>`` from ``ZQ``.
    """
    idx = np.arange(4)
    par0 = 1 - 2 * (idx & 1)
    par1 = 1 - 2 * ((idx >> 1) & 1)
    table = np.empty(16)
    for k, pair in enumerate(PAULI_PAIRS):
        a, b = pair
        if pair == "II":
            table[k] = 1.0
        elif b == "I":
            table[k] = probs_by_setting[a + "Z"] @ par0
        elif a == "I":
            table[k] = probs_by_setting["Z" + b] @ par1
        else:
            table[k] = probs_by_setting[pair] @ (par0 * par1)
    return table


def default_grid(n: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, n)


@dataclass
class SweepRecord:
    """Counts and corrected Pauli tables over a theta grid.

    ``counts`` has shape ``(n_theta, 9, 4)`` (settings in :data:`SETTINGS` order);
    ``expectations`` has shape ``(n_theta, 16)`` in :data:`PAULI_PAIRS` order.
    """

    thetas: np.ndarray
    counts: np.ndarray
    expectations: np.ndarray
    shots: int
    settings: tuple[str, ...] = SETTINGS
    meta: dict = field(default_factory=dict)

    def table(self, i: int) -> dict[str, float]:
        return dict(zip(PAULI_PAIRS, self.expectations[i].tolist()))

    def to_json(self) -> str:
        doc = {
            "thetas": self.thetas.tolist(),
            "settings": list(self.settings),
            "shots": self.shots,
            "counts": {
                str(i): {
                    s: {bs: self.counts[i, j, int(bs, 2)].item() for bs in BITSTRINGS}
                    for j, s in enumerate(self.settings)
                }
                for i in range(len(self.thetas))
            },
            "expectations": {
                str(i): dict(zip(PAULI_PAIRS, self.expectations[i].tolist()))
                for i in range(len(self.thetas))
            },
            "meta": self.meta,
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> SweepRecord:
        doc = json.loads(text)
        settings = tuple(doc["settings"])
        n = len(doc["thetas"])
        counts = np.array(
            [[[doc["counts"][str(i)][s][bs] for bs in BITSTRINGS] for s in settings] for i in range(n)]
        )
        exps = np.array([[doc["expectations"][str(i)][p] for p in PAULI_PAIRS] for i in range(n)])
        return cls(np.array(doc["thetas"], dtype=float), counts, exps, int(doc["shots"]), settings, doc.get("meta", {}))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> SweepRecord:
        return cls.from_json(Path(path).read_text())


def _sweep_point(i: int, theta: float, noise: NoiseModel) -> tuple[np.ndarray, np.ndarray]:
    psi = prepare_ansatz(theta)
    counts = np.empty((len(SETTINGS), 4), dtype=float if noise.exact else np.int64)
    unfolded = {}
    for j, setting in enumerate(SETTINGS):
        # independent stream per (seed, theta index, setting index)
        rng = np.random.default_rng([noise.seed, i, j])
        c = measure_setting(psi, setting, noise, rng)
        counts[j] = c
        unfolded[setting] = unfold_readout(c, noise)
    return counts, pauli_table_from_probabilities(unfolded)


def run_sweep(thetas: Sequence[float] | None = None, noise: NoiseModel | None = None, jobs: int = 1) -> SweepRecord:
    """Run all nine settings at every theta and derive the corrected Pauli tables.

    The ansatz does not depend on the molecule, so one record serves every
    Hamiltonian evaluated on the same grid.
    """
    thetas = default_grid() if thetas is None else np.asarray(thetas, dtype=float)
    if thetas.size == 0:
        raise ValueError("theta grid is empty")
    noise = NoiseModel.noiseless() if noise is None else noise
    if jobs != 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=jobs)(delayed(_sweep_point)(i, t, noise) for i, t in enumerate(thetas))
    else:
        results = [_sweep_point(i, t, noise) for i, t in enumerate(thetas)]
    counts = np.stack([r[0] for r in results])
    exps = np.stack([r[1] for r in results])
    meta = {"seed": noise.seed, "readout": [list(q) for q in noise.readout], "depolarizing": noise.depolarizing}
    return SweepRecord(thetas, counts, exps, noise.shots, SETTINGS, meta)
