"""Ground-state search: sweep smoothing for the 2-qubit ansatz, and exact UCCSD."""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize

from .fermion import FermionSum, hermitian_conjugate, jordan_wigner
from .integrals import OrbitalPartition
from .qubitops import PAULI_PAIRS, PauliSum, ProjectedHamiltonian
from .sector import SectorBasis, operator_matrix
from .simulator import SweepRecord

log = logging.getLogger(__name__)

MAX_UCCSD_QUBITS = 20


class FitError(ValueError):
    pass


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SmoothedCurve:
    """Per Pauli pair, ``a + b cos(theta) + c sin(theta)``; ``coeffs`` has shape (16, 3)."""

    coeffs: np.ndarray
    residual_norm: float

    def evaluate(self, theta: float) -> np.ndarray:
        vals = self.coeffs @ np.array([1.0, math.cos(theta), math.sin(theta)])
        vals[0] = 1.0  # <II>
        return vals

    def table(self, theta: float) -> dict[str, float]:
        return dict(zip(PAULI_PAIRS, self.evaluate(theta).tolist()))


@dataclass(frozen=True)
class SweepMinimum:
    theta_min: float
    energy: float
    curve: SmoothedCurve

    @property
    def table(self) -> dict[str, float]:
        """All fitted expectations at ``theta_min``."""
        return self.curve.table(self.theta_min)


def fit_sweep(record: SweepRecord) -> SmoothedCurve:
    """Least-squares first-order Fourier fit of every Pauli expectation."""
    thetas = np.asarray(record.thetas, dtype=float)
    design = np.column_stack([np.ones_like(thetas), np.cos(thetas), np.sin(thetas)])
    if np.linalg.matrix_rank(design) < 3:
        raise FitError("theta grid needs at least three distinct angles (mod 2 pi)")
    coeffs, *_ = np.linalg.lstsq(design, record.expectations, rcond=None)
    resid = record.expectations - design @ coeffs
    return SmoothedCurve(coeffs.T.copy(), float(np.linalg.norm(resid)))


def fit_and_minimize(record: SweepRecord, h2q: ProjectedHamiltonian | PauliSum) -> SweepMinimum:
    """Smooth the sweep, compose E(theta) and minimize it in closed form.

    With ``E(theta) = A + B cos(theta) + C sin(theta)`` the minimum is
    ``A - sqrt(B^2 + C^2)`` at ``theta = atan2(-C, -B)``.
    """
    op = h2q.coeffs if isinstance(h2q, ProjectedHamiltonian) else h2q
    curve = fit_sweep(record)
    g = np.array([op.coeff(p).real for p in PAULI_PAIRS])
    fitted = curve.coeffs.copy()
    fitted[0] = (1.0, 0.0, 0.0)
    a, b, c = g @ fitted
    theta_min = math.atan2(-c, -b) if math.hypot(b, c) > 0 else 0.0
    energy = a - math.hypot(b, c)
    return SweepMinimum(theta_min, float(energy), curve)


# ----------------------------------------------------------------------------
# UCCSD


def _spin(mode: int) -> int:
    return 1 if mode % 2 == 0 else -1


@dataclass
class UccsdAnsatz:
    """Sz-conserving singles and doubles on the active spin-orbitals.

    Modes are local to the active space (``0 .. 2*n_active - 1``), interleaved
    spin, with the reference filling the lowest ``n_electrons`` modes.
    """

    n_modes: int
    n_electrons: int
    excitations: list[tuple[int, ...]]
    generators: list[FermionSum]
    parameters: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.parameters is None:
            self.parameters = np.zeros(len(self.generators))
        if len(self.parameters) != len(self.generators):
            raise ValueError("parameter count must equal generator count")

    def __len__(self):
        return len(self.generators)

    @property
    def reference(self) -> int:
        return (1 << self.n_electrons) - 1


def build_uccsd(partition: OrbitalPartition | int, n_electrons: int) -> UccsdAnsatz:
    """Enumerate singles ``(i, a)`` then doubles ``(i, j, a, b)`` in lexicographic order.

    Each generator is ``T - T^dagger`` with ``T = a+_a a_i`` or
    ``T = a+_a a+_b a_j a_i`` (``i < j`` occupied, ``a < b`` unoccupied).
    """
    n_active = len(partition.active) if isinstance(partition, OrbitalPartition) else int(partition)
    n_modes = 2 * n_active
    if n_electrons > n_modes:
        raise ValueError(f"{n_electrons} electrons do not fit in {n_modes} spin-orbitals")
    occ = list(range(n_electrons))
    vir = list(range(n_electrons, n_modes))
    excitations: list[tuple[int, ...]] = []
    generators: list[FermionSum] = []
    for i in occ:
        for a in vir:
            if _spin(i) == _spin(a):
                t = FermionSum.monomial((a, True), (i, False))
                excitations.append((i, a))
                generators.append(t - hermitian_conjugate(t))
    for i in occ:
        for j in occ:
            if j <= i:
                continue
            for a in vir:
                for b in vir:
                    if b <= a or _spin(a) + _spin(b) != _spin(i) + _spin(j):
                        continue
                    t = FermionSum.monomial((a, True), (b, True), (j, False), (i, False))
                    excitations.append((i, j, a, b))
                    generators.append(t - hermitian_conjugate(t))
    return UccsdAnsatz(n_modes, n_electrons, excitations, generators)


class UccsdEnergy:
    """Exact UCCSD energy ``<HF| e^{-G} H e^{G} |HF>`` with ``G = sum theta_k G_k``.

    Works in the particle-number/Sz sector of the reference, which every
    generator preserves, so the exponential is exact there.
    """

    def __init__(self, ansatz: UccsdAnsatz, hamiltonian: FermionSum | PauliSum):
        if ansatz.n_modes > MAX_UCCSD_QUBITS:
            raise ValueError(f"{ansatz.n_modes} qubits exceeds the cap of {MAX_UCCSD_QUBITS}")
        self.ansatz = ansatz
        sz = sum(_spin(m) for m in range(ansatz.n_electrons))
        self.basis = SectorBasis.fixed(ansatz.n_modes, ansatz.n_electrons, sz)
        if isinstance(hamiltonian, PauliSum):
            full = hamiltonian.sparse_matrix()
            d = self.basis.determinants
            self.h = full[d][:, d].tocsr()
        else:
            self.h = operator_matrix(hamiltonian, self.basis)
        self.ref = np.zeros(len(self.basis), dtype=complex)
        self.ref[self.basis.index[ansatz.reference]] = 1.0
        # shared sparsity pattern: G(theta) data = theta[owner] * value
        rows, cols, vals, owner = [], [], [], []
        for k, g in enumerate(ansatz.generators):
            m = operator_matrix(g, self.basis).tocoo()
            rows.append(m.row)
            cols.append(m.col)
            vals.append(m.data.real)
            owner.append(np.full(m.nnz, k))
        self._rows = np.concatenate(rows) if rows else np.zeros(0, int)
        self._cols = np.concatenate(cols) if cols else np.zeros(0, int)
        self._vals = np.concatenate(vals) if vals else np.zeros(0)
        self._owner = np.concatenate(owner) if owner else np.zeros(0, int)
        self.n_evals = 0

    def generator(self, theta: np.ndarray) -> sp.csr_matrix:
        n = len(self.basis)
        return sp.csr_matrix(
            (self._vals * np.asarray(theta)[self._owner], (self._rows, self._cols)), shape=(n, n)
        )

    def state(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if not np.any(theta):
            return self.ref.copy()
        return spla.expm_multiply(self.generator(theta), self.ref, traceA=0.0)

    def full_state(self, theta: np.ndarray) -> np.ndarray:
        """Statevector on the ``2^n_modes`` active register."""
        psi = np.zeros(1 << self.ansatz.n_modes, dtype=complex)
        psi[self.basis.determinants] = self.state(theta)
        return psi

    def energy_complex(self, theta: np.ndarray) -> complex:
        psi = self.state(theta)
        return complex(np.vdot(psi, self.h @ psi))

    def __call__(self, theta: np.ndarray) -> float:
        self.n_evals += 1
        return self.energy_complex(theta).real


def uccsd_energy(ansatz: UccsdAnsatz, h: FermionSum | PauliSum, theta: np.ndarray | None = None) -> float:
    theta = ansatz.parameters if theta is None else theta
    return UccsdEnergy(ansatz, h)(theta)


@dataclass(frozen=True)
class OptimizerOptions:
    max_iter: int = 2000
    grad_tol: float = 1e-6
    fd_step: float = 1e-5


@dataclass
class OptimizeOutcome:
    theta: np.ndarray
    energy: float
    converged: bool
    grad_norm: float
    n_evals: int
    trace: list[dict]

    def write_trace(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for row in self.trace:
                fh.write(json.dumps(row) + "\n")


def central_gradient(f, x: np.ndarray, step: float) -> np.ndarray:
    g = np.empty_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = step
        g[k] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def optimize_uccsd(
    ansatz: UccsdAnsatz, h: FermionSum | PauliSum | UccsdEnergy, options: OptimizerOptions | None = None
) -> OptimizeOutcome:
    """L-BFGS-B from theta = 0 with central finite-difference gradients.

    Non-convergence is reported through :class:`ConvergenceWarning` and the
    returned ``converged`` flag; the best point found is returned either way.
    """
    options = options or OptimizerOptions()
    f = h if isinstance(h, UccsdEnergy) else UccsdEnergy(ansatz, h)
    x0 = np.zeros(len(ansatz))
    trace: list[dict] = []
    best = {"x": x0.copy(), "e": f(x0)}
    if len(x0) == 0:
        ansatz.parameters = x0
        return OptimizeOutcome(x0, best["e"], True, 0.0, f.n_evals, trace)

    last: dict = {}

    def fun(x):
        e = f(x)
        if e < best["e"]:
            best["x"], best["e"] = x.copy(), e
        g = central_gradient(f, x, options.fd_step)
        last["x"], last["g"] = x.copy(), g
        return e, g

    def callback(intermediate_result):
        x = intermediate_result.x
        g = last["g"] if np.array_equal(last.get("x"), x) else central_gradient(f, x, options.fd_step)
        trace.append({"iteration": len(trace) + 1, "energy": float(intermediate_result.fun), "grad_norm": float(np.abs(g).max())})

    res = minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={"maxiter": options.max_iter, "gtol": options.grad_tol, "ftol": 1e-15, "maxcor": 30},
    )
    x = best["x"]
    grad = central_gradient(f, x, options.fd_step)
    gnorm = float(np.abs(grad).max())
    converged = gnorm < options.grad_tol
    if not converged:
        warnings.warn(
            f"UCCSD optimization stopped with gradient norm {gnorm:.2e} ({res.message})",
            ConvergenceWarning,
            stacklevel=2,
        )
    ansatz.parameters = x.copy()
    return OptimizeOutcome(x.copy(), float(best["e"]), converged, gnorm, f.n_evals, trace)
