"""Virtual quantum subspace expansion (VQSE) on a simulated two-qubit device.

Typical flow: read FCIDUMP integrals, freeze the core, project the active
Hamiltonian onto two qubits, sweep the one-parameter ansatz, then expand the
optimized state with operators reaching into virtual orbitals and solve the
regularized generalized eigenproblem.
"""

from .fermion import FermionSum, jordan_wigner, normal_order
from .integrals import (
    MolecularIntegrals,
    OrbitalPartition,
    assemble_hamiltonian,
    freeze_core,
    load_fixture,
    parse_fcidump,
    read_fcidump,
)
from .oracles import cisd_spectrum, fci_spectrum, hartree_fock_energy
from .pipeline import ScanConfig, ScanResult, emit_outputs, run_scan
from .qubitops import PauliSum, ProjectedHamiltonian
from .sector import SectorBasis
from .simulator import NoiseModel, SweepRecord, run_sweep
from .spectra import JumpOptions, SpectrumResult, max_clean_rank, select_rank_ground, solve_fixed_rank, solve_projected
from .subspace import PencilProblem, PencilTemplate, build_pencil, build_pencil_oracle, generate_expansion_ops
from .vqe import build_uccsd, fit_and_minimize, optimize_uccsd

__all__ = [
    "FermionSum", "jordan_wigner", "normal_order",
    "MolecularIntegrals", "OrbitalPartition", "assemble_hamiltonian", "freeze_core",
    "load_fixture", "parse_fcidump", "read_fcidump",
    "cisd_spectrum", "fci_spectrum", "hartree_fock_energy",
    "ScanConfig", "ScanResult", "emit_outputs", "run_scan",
    "PauliSum", "ProjectedHamiltonian", "SectorBasis",
    "NoiseModel", "SweepRecord", "run_sweep",
    "JumpOptions", "SpectrumResult", "max_clean_rank", "select_rank_ground", "solve_fixed_rank", "solve_projected",
    "PencilProblem", "PencilTemplate", "build_pencil", "build_pencil_oracle", "generate_expansion_ops",
    "build_uccsd", "fit_and_minimize", "optimize_uccsd",
]
