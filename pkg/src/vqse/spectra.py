"""Regularized solution of the generalized eigenproblem ``A c = e B c``.

``B`` is eigendecomposed once; keeping its ``k`` largest eigenpairs gives the
reduced Hermitian problem ``L^{-1/2} V_k^dagger A V_k L^{-1/2}``. The lowest
eigenvalue as a function of ``k`` is variational (non-increasing) while the
kept directions are positive; a sudden drop marks a spurious solution.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .subspace import EmptyPencilError, PencilProblem

HERMITIAN_TOL = 1e-8


class RankError(ValueError):
    pass


@dataclass(frozen=True)
class JumpOptions:
    """A drop ``E0(k) - E0(k-1) < -tau`` is a jump, with
    ``tau = max(rel_factor * median(|dE0| before k), abs_floor)``.

    Only drops caused by a weak direction count: the B eigenvalue added at
    rank ``k`` must be below ``weak_ratio`` times the largest one. Large
    genuine correlation gains through well-conditioned directions are
    therefore never flagged. Set ``weak_ratio = inf`` for the bare energy test.
    """

    rel_factor: float = 10.0
    abs_floor: float = 0.020
    null_rtol: float = 1e-10  # B eigenvalues below null_rtol * max are treated as zero
    weak_ratio: float = 0.05


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    k_retained: int
    e0_trace: np.ndarray
    spurious_k: int | None
    b_eigenvalues: np.ndarray
    n_positive: int = 0

    def to_dict(self) -> dict:
        return {
            "eigenvalues": np.asarray(self.eigenvalues).tolist(),
            "k_retained": self.k_retained,
            "e0_trace": np.asarray(self.e0_trace).tolist(),
            "spurious_k": self.spurious_k,
            "b_eigenvalues": np.asarray(self.b_eigenvalues).tolist(),
            "n_positive": self.n_positive,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> SpectrumResult:
        return cls(
            np.array(d["eigenvalues"]), d["k_retained"], np.array(d["e0_trace"]),
            d["spurious_k"], np.array(d["b_eigenvalues"]), d.get("n_positive", 0),
        )


class _Decomposed:
    """Eigendecomposition of B (descending) shared by every rank."""

    def __init__(self, p: PencilProblem, null_rtol: float):
        A, B = np.asarray(p.A), np.asarray(p.B)
        scale = max(1.0, float(np.abs(A).max(initial=0.0)))
        if np.abs(A - A.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
            raise ValueError("A is not Hermitian")
        if np.abs(B - B.conj().T).max(initial=0.0) > HERMITIAN_TOL * max(1.0, np.abs(B).max(initial=0.0)):
            raise ValueError("B is not Hermitian")
        w, v = np.linalg.eigh((B + B.conj().T) / 2)
        order = np.argsort(w)[::-1]
        self.w, self.v = w[order], v[:, order]
        top = self.w[0] if self.w.size else 0.0
        thresh = null_rtol * top if top > 0 else 0.0
        self.n_positive = int(np.sum(self.w > thresh))
        # columns of X span the kept subspace with X^dagger B X = 1
        if self.n_positive:
            x = self.v[:, : self.n_positive] / np.sqrt(self.w[: self.n_positive])
            self.a_red = x.conj().T @ ((A + A.conj().T) / 2) @ x
        else:
            self.a_red = np.zeros((0, 0))

    def eigenvalues(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.n_positive:
            raise RankError(f"rank {k} outside 1..{self.n_positive} positive B eigenvalues")
        return np.linalg.eigvalsh(self.a_red[:k, :k])

    def lowest(self, k: int) -> float:
        if k > 40:
            return float(sla.eigh(self.a_red[:k, :k], eigvals_only=True, subset_by_index=[0, 0])[0])
        return float(self.eigenvalues(k)[0])


def solve_projected(p: PencilProblem, k: int, null_rtol: float = 0.0) -> np.ndarray:
    """Ascending generalized eigenvalues after keeping the ``k`` largest B eigenvalues."""
    d = _Decomposed(p, null_rtol)
    return d.eigenvalues(k)


def _e0_trace(d: _Decomposed) -> np.ndarray:
    return np.array([d.lowest(k) for k in range(1, d.n_positive + 1)])


def find_jump(trace: np.ndarray, options: JumpOptions, b_eigenvalues: np.ndarray | None = None) -> int | None:
    """First rank ``k`` (1-based) whose drop from ``k-1`` exceeds the jump threshold.

    ``b_eigenvalues`` (descending) enables the weak-direction condition of
    :class:`JumpOptions`; without it every large drop is flagged.
    """
    diffs = np.diff(trace)
    top = float(b_eigenvalues[0]) if b_eigenvalues is not None and len(b_eigenvalues) else None
    for idx, delta in enumerate(diffs):
        prev = np.abs(diffs[:idx])
        tau = options.abs_floor
        if prev.size:
            tau = max(options.rel_factor * float(np.median(prev)), tau)
        if delta < -tau:
            if top is not None and b_eigenvalues[idx + 1] >= options.weak_ratio * top:
                continue
            return idx + 2
    return None


def select_rank_ground(p: PencilProblem, jump_options: JumpOptions | None = None) -> SpectrumResult:
    """Scan the retained rank and stop just before the first spurious drop."""
    opts = jump_options or JumpOptions()
    d = _Decomposed(p, opts.null_rtol)
    if d.n_positive == 0:
        raise EmptyPencilError("B has no positive eigenvalues")
    trace = _e0_trace(d)
    jump = find_jump(trace, opts, d.w)
    k = jump - 1 if jump is not None else d.n_positive
    return SpectrumResult(d.eigenvalues(k), k, trace, jump, d.w, d.n_positive)


def solve_fixed_rank(
    pencils: Sequence[PencilProblem], k: int, jump_options: JumpOptions | None = None, names: Sequence | None = None
) -> list[SpectrumResult]:
    """Same retained rank ``k`` for every pencil."""
    opts = jump_options or JumpOptions()
    out = []
    for n, p in enumerate(pencils):
        d = _Decomposed(p, opts.null_rtol)
        if k > d.n_positive or k < 1:
            name = names[n] if names is not None else n
            raise RankError(f"geometry {name}: rank {k} but only {d.n_positive} positive B eigenvalues")
        trace = _e0_trace(d)[:k]
        out.append(SpectrumResult(d.eigenvalues(k), k, trace, find_jump(trace, opts, d.w), d.w, d.n_positive))
    return out


def max_clean_rank(pencils: Sequence[PencilProblem], jump_options: JumpOptions | None = None) -> int:
    """Largest common rank with positive B directions and no jump at any geometry."""
    if not pencils:
        raise ValueError("no pencils")
    opts = jump_options or JumpOptions()
    best = None
    for p in pencils:
        d = _Decomposed(p, opts.null_rtol)
        trace = _e0_trace(d)
        jump = find_jump(trace, opts, d.w)
        limit = jump - 1 if jump is not None else d.n_positive
        best = limit if best is None else min(best, limit)
    return max(1, int(best))
