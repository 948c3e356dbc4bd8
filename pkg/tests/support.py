"""Shared helpers for the test suite (not a test module)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from vqse.fermion import jordan_wigner
from vqse.integrals import fixture_paths, geometry_from_name
from vqse.pipeline import ScanConfig, prepare_geometry
from vqse.qubitops import ProjectedHamiltonian, project_to_pair_subspace
from vqse.simulator import NoiseModel, run_sweep

PARTITIONS = {"h2": (0, 2, 8), "li2": (2, 2, 6), "n2": (4, 6, 3)}

# Independent reference values computed with PySCF (RHF + FCI / CASCI on the
# same cc-pVDZ orbitals and truncation as the shipped fixtures).
PYSCF_REFERENCE = {
    ("h2", 0.70): -1.160904682478467,
    ("li2", 2.60): -14.879189763361568,
    ("n2", 1.10): -109.03644436983713,
}


def radii(molecule: str) -> list[float]:
    return [geometry_from_name(p.name) for p in fixture_paths(molecule)]


def config(molecule: str, **kw) -> ScanConfig:
    core, active, virtual = PARTITIONS[molecule]
    base = dict(molecule=molecule, core=core, active=active, virtual=virtual, noiseless=True)
    base.update(kw)
    return ScanConfig(**base)


@lru_cache(maxsize=None)
def prepared(molecule: str, r: float):
    return prepare_geometry(config(molecule), r)


@lru_cache(maxsize=None)
def projected(molecule: str, r: float) -> ProjectedHamiltonian:
    prep = prepared(molecule, r)
    return ProjectedHamiltonian(project_to_pair_subspace(jordan_wigner(prep.active_hamiltonian, 4)))


@lru_cache(maxsize=None)
def noiseless_sweep():
    return run_sweep(noise=NoiseModel.noiseless())


@lru_cache(maxsize=None)
def noisy_sweep(seed: int):
    return run_sweep(noise=NoiseModel(seed=seed))


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@lru_cache(maxsize=None)
def pair_minimum(molecule: str, r: float, seed: int | None = None):
    from vqse.vqe import fit_and_minimize

    sweep = noiseless_sweep() if seed is None else noisy_sweep(seed)
    return fit_and_minimize(sweep, projected(molecule, r))


@lru_cache(maxsize=None)
def measured_pencil(molecule: str, r: float, seed: int | None = None, active_only: bool = False):
    """VQSE (or QSE when ``active_only``) pencil at the fitted ansatz minimum."""
    from vqse.integrals import OrbitalPartition
    from vqse.subspace import NOISELESS_CUTOFF, NOISY_CUTOFF, build_pencil, generate_expansion_ops

    core, active, virtual = PARTITIONS[molecule]
    prep = prepared(molecule, r)
    if active_only:
        part, ham = OrbitalPartition((), tuple(range(active)), ()), prep.active_hamiltonian
    else:
        part, ham = OrbitalPartition.from_counts(0, active, virtual), prep.hamiltonian
    cutoff = NOISELESS_CUTOFF if seed is None else NOISY_CUTOFF
    return build_pencil(generate_expansion_ops(part), ham, pair_minimum(molecule, r, seed).table, part, cutoff)
