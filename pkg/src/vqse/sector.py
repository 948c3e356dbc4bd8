"""Occupation-number sectors and vectorized fermion-operator action on them.

Determinants are integer bitmasks with spin-orbital j at bit j, the same
bit convention as the qubit register. The phase convention matches the
Jordan-Wigner encoding: ``a_j`` picks up ``(-1)`` per occupied mode below ``j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fermion import FermionSum

_CHUNK = 1 << 22  # (terms x determinants) elements processed per batch


@dataclass(frozen=True)
class SectorBasis:
    """Sorted determinant bitmasks with lookup."""

    n_modes: int
    determinants: np.ndarray
    index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        dets = np.asarray(self.determinants, dtype=np.int64)
        if len(np.unique(dets)) != len(dets):
            raise ValueError("duplicate determinants")
        order = np.argsort(dets)
        object.__setattr__(self, "determinants", dets[order])
        object.__setattr__(self, "index", {int(d): i for i, d in enumerate(dets[order])})

    @classmethod
    def fixed(cls, n_modes: int, n_electrons: int, sz: int | None = 0) -> SectorBasis:
        """All determinants with ``n_electrons`` and twice-Sz equal to ``sz`` (``None``: any Sz)."""
        if n_electrons > n_modes or n_electrons < 0:
            raise ValueError("electron count does not fit in the modes")
        up = list(range(0, n_modes, 2))
        dn = list(range(1, n_modes, 2))
        dets = []
        if sz is None:
            for occ in itertools.combinations(range(n_modes), n_electrons):
                dets.append(sum(1 << i for i in occ))
        else:
            if (n_electrons + sz) % 2:
                raise ValueError("Sz incompatible with electron count")
            n_up = (n_electrons + sz) // 2
            n_dn = n_electrons - n_up
            if n_up < 0 or n_dn < 0 or n_up > len(up) or n_dn > len(dn):
                raise ValueError("Sz sector is empty")
            for ou in itertools.combinations(up, n_up):
                mu = sum(1 << i for i in ou)
                for od in itertools.combinations(dn, n_dn):
                    dets.append(mu | sum(1 << i for i in od))
        return cls(n_modes, np.array(dets, dtype=np.int64))

    def __len__(self):
        return len(self.determinants)

    def lookup(self, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Positions of ``masks`` in the basis and a boolean 'found' array."""
        dets = self.determinants
        pos = np.searchsorted(dets, masks)
        pos = np.clip(pos, 0, len(dets) - 1)
        return pos, dets[pos] == masks

    def vector(self, amplitudes: dict[int, complex]) -> np.ndarray:
        v = np.zeros(len(self), dtype=complex)
        for mask, a in amplitudes.items():
            v[self.index[int(mask)]] = a
        return v


def _act(ops, dets: np.ndarray):
    """Apply a batch of equal-length ladder strings to determinants.

    ``ops`` has shape (T, L, 2) holding (mode, dagger); ``dets`` shape (D,).
    Returns (masks, signs, valid) of shape (T, D).
    """
    T, L = ops.shape[0], ops.shape[1]
    masks = np.broadcast_to(dets, (T, len(dets))).copy()
    sign = np.ones_like(masks)
    valid = np.ones(masks.shape, dtype=bool)
    for pos in range(L - 1, -1, -1):
        mode = ops[:, pos, 0][:, None]
        dag = ops[:, pos, 1][:, None].astype(bool)
        bit = np.left_shift(np.int64(1), mode)
        occ = (masks & bit) != 0
        valid &= np.where(dag, ~occ, occ)
        parity = np.bitwise_count(masks & (bit - 1)) & 1
        sign *= 1 - 2 * parity.astype(np.int64)
        masks ^= bit
    return masks, sign, valid


def _grouped(op: FermionSum):
    groups: dict[int, tuple[list, list]] = {}
    for t, c in op.terms.items():
        g = groups.setdefault(len(t), ([], []))
        g[0].append([(o.mode, int(o.dagger)) for o in t])
        g[1].append(c)
    for length, (ops, coeffs) in groups.items():
        yield length, np.array(ops, dtype=np.int64).reshape(len(ops), length, 2), np.array(coeffs)


def operator_matrix(op: FermionSum, source: SectorBasis, target: SectorBasis | None = None) -> sp.csr_matrix:
    """Sparse matrix of ``op`` from ``source`` determinants into ``target`` ones.

    Components that leave ``target`` are dropped, so with ``target = source``
    on a subset of determinants this is the projected operator.
    """
    target = source if target is None else target
    if op.max_mode() >= max(source.n_modes, target.n_modes):
        raise ValueError("operator acts outside the sector's modes")
    dets = source.determinants
    D = len(dets)
    rows, cols, vals = [], [], []
    for length, ops, coeffs in _grouped(op):
        if length == 0:
            masks = dets[None, :]
            pos, found = target.lookup(masks)
            sel = found[0]
            rows.append(pos[0][sel])
            cols.append(np.arange(D)[sel])
            vals.append(np.full(sel.sum(), coeffs[0]))
            continue
        step = max(1, _CHUNK // max(D, 1))
        for s in range(0, len(ops), step):
            masks, sign, valid = _act(ops[s : s + step], dets)
            pos, found = target.lookup(masks)
            valid &= found
            ti, di = np.nonzero(valid)
            rows.append(pos[ti, di])
            cols.append(di)
            vals.append(coeffs[s : s + step][ti] * sign[ti, di])
    if not rows:
        return sp.csr_matrix((len(target), D), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals).astype(complex), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(target), D),
    )


def apply_to_states(op: FermionSum, states: np.ndarray, source: SectorBasis, target: SectorBasis | None = None) -> np.ndarray:
    """``op`` applied to column vectors ``states`` (shape ``(len(source), k)``)."""
    return operator_matrix(op, source, target) @ states


def hartree_fock_mask(n_electrons: int) -> int:
    """Lowest ``n_electrons`` spin-orbitals occupied (both spins of the lowest orbitals)."""
    return (1 << n_electrons) - 1


def statevector_to_sector(psi: np.ndarray, basis: SectorBasis, tol: float = 0.0) -> np.ndarray:
    """Restrict a full-register statevector to ``basis``; raises if weight would be lost."""
    lost = np.linalg.norm(psi) ** 2 - np.linalg.norm(psi[basis.determinants]) ** 2
    if lost > max(tol, 1e-12):
        raise ValueError(f"state has weight {lost:.3e} outside the sector")
    return np.asarray(psi[basis.determinants], dtype=complex)
