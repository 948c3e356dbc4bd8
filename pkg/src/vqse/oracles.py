"""Exact determinant-basis references: FCI and CISD in fixed N / Sz sectors."""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.sparse.linalg as spla

from .fermion import FermionSum
from .sector import SectorBasis, hartree_fock_mask, operator_matrix

MAX_SECTOR_DIM = 100_000
DENSE_LIMIT = 4000


class SectorTooLarge(ValueError):
    pass


def _lowest(h, n_lowest: int) -> np.ndarray:
    dim = h.shape[0]
    n_lowest = min(n_lowest, dim)
    if dim <= DENSE_LIMIT:
        return np.linalg.eigvalsh(h.toarray())[:n_lowest]
    vals = spla.eigsh(h, k=n_lowest, which="SA", tol=1e-12, ncv=max(2 * n_lowest + 1, 30))[0]
    return np.sort(vals.real)


def _hermitian_real(h):
    if h.nnz == 0 or abs(h.imag).max() < 1e-14:
        return h.real
    return h


def sector_dimension(n_modes: int, n_electrons: int, sz: int | None = 0) -> int:
    """Number of determinants in the sector, without enumerating them."""
    if sz is None:
        return math.comb(n_modes, n_electrons)
    if (n_electrons + sz) % 2:
        return 0
    n_up = (n_electrons + sz) // 2
    return math.comb((n_modes + 1) // 2, n_up) * math.comb(n_modes // 2, n_electrons - n_up)


def fci_spectrum(h: FermionSum, n_modes: int, n_electrons: int, sz: int | None = 0, n_lowest: int = 1) -> np.ndarray:
    """Lowest eigenvalues of ``h`` among determinants with the given N and twice-Sz."""
    dim = sector_dimension(n_modes, n_electrons, sz)
    if dim > MAX_SECTOR_DIM:
        raise SectorTooLarge(f"sector dimension {dim} exceeds {MAX_SECTOR_DIM}")
    basis = SectorBasis.fixed(n_modes, n_electrons, sz)
    return _lowest(_hermitian_real(operator_matrix(h, basis)), n_lowest)


def excitation_basis(n_modes: int, n_electrons: int, max_rank: int, sz: int | None = 0) -> SectorBasis:
    """Reference determinant plus all excitations up to ``max_rank`` (spin-conserving when ``sz`` set)."""
    ref = hartree_fock_mask(n_electrons)
    occ = [i for i in range(n_modes) if (ref >> i) & 1]
    vir = [i for i in range(n_modes) if not (ref >> i) & 1]
    ref_sz = sum(1 if i % 2 == 0 else -1 for i in occ)
    dets = set()
    for rank in range(0, max_rank + 1):
        for holes in itertools.combinations(occ, rank):
            for parts in itertools.combinations(vir, rank):
                d = ref
                for i in holes:
                    d ^= 1 << i
                for a in parts:
                    d |= 1 << a
                if sz is not None:
                    dsz = sum(1 if i % 2 == 0 else -1 for i in range(n_modes) if (d >> i) & 1)
                    if dsz != sz:
                        continue
                dets.add(d)
    if sz is not None and ref_sz != sz:
        raise ValueError("reference determinant has a different Sz")
    return SectorBasis(n_modes, np.array(sorted(dets), dtype=np.int64))


def cisd_spectrum(h: FermionSum, n_modes: int, n_electrons: int, sz: int | None = 0, n_lowest: int = 1, max_rank: int = 2) -> np.ndarray:
    """Like :func:`fci_spectrum` but within the reference plus its singles and doubles."""
    basis = excitation_basis(n_modes, n_electrons, max_rank, sz)
    if len(basis) > MAX_SECTOR_DIM:
        raise SectorTooLarge(f"CI space dimension {len(basis)} exceeds {MAX_SECTOR_DIM}")
    return _lowest(_hermitian_real(operator_matrix(h, basis)), n_lowest)


def hartree_fock_energy(h: FermionSum, n_modes: int, n_electrons: int) -> float:
    return float(cisd_spectrum(h, n_modes, n_electrons, sz=None, max_rank=0)[0])
