"""Molecular integrals: FCIDUMP I/O, frozen-core reduction, Hamiltonian assembly.

Two-electron integrals are kept in chemists' notation ``(pq|rs)`` exactly as
stored in FCIDUMP files. The conversion to physicists' ordering happens only in
:func:`assemble_hamiltonian`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .fermion import FermionSum

_SYM_TOL = 1e-10
_DUP_TOL = 1e-9


class FcidumpError(ValueError):
    """Malformed FCIDUMP content. ``line`` is 1-based, or ``None`` for the header."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class PartitionError(ValueError):
    """Inconsistent core/active/virtual orbital split."""


@dataclass(frozen=True)
class MolecularIntegrals:
    n_spatial: int
    e_const: float
    h1: np.ndarray
    h2: np.ndarray
    n_electrons: int
    geometry_label: float | None = None
    orbsym: tuple[int, ...] | None = None

    def __post_init__(self):
        n = self.n_spatial
        if n <= 0:
            raise ValueError("n_spatial must be positive")
        if self.h1.shape != (n, n) or self.h2.shape != (n, n, n, n):
            raise ValueError("integral tensor shapes do not match n_spatial")
        if self.n_electrons < 0:
            raise ValueError("n_electrons must be non-negative")

    def check_symmetry(self, tol: float = _SYM_TOL) -> None:
        """Raise ``ValueError`` if the one- or two-electron tensors break permutational symmetry."""
        h1, h2 = self.h1, self.h2
        if not np.allclose(h1, h1.T, atol=tol, rtol=0):
            raise ValueError("h1 is not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(h2, h2.transpose(perm), atol=tol, rtol=0):
                raise ValueError(f"h2 lacks permutational symmetry {perm}")


@dataclass(frozen=True)
class OrbitalPartition:
    """Spatial-orbital split into frozen core, active and virtual sets."""

    core: tuple[int, ...] = ()
    active: tuple[int, ...] = field(default_factory=tuple)
    virtual: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "core", tuple(int(i) for i in self.core))
        object.__setattr__(self, "active", tuple(int(i) for i in self.active))
        object.__setattr__(self, "virtual", tuple(int(i) for i in self.virtual))
        if not self.active:
            raise PartitionError("active space must be non-empty")
        seen = self.core + self.active + self.virtual
        if len(set(seen)) != len(seen):
            raise PartitionError("core, active and virtual orbitals overlap")

    @classmethod
    def from_counts(cls, n_core: int, n_active: int, n_virtual: int) -> OrbitalPartition:
        """Consecutive split: lowest orbitals are core, then active, then virtual."""
        c = tuple(range(n_core))
        a = tuple(range(n_core, n_core + n_active))
        v = tuple(range(n_core + n_active, n_core + n_active + n_virtual))
        return cls(c, a, v)

    @property
    def n_spatial(self) -> int:
        return len(self.core) + len(self.active) + len(self.virtual)

    def validate(self, n_spatial: int) -> None:
        if sorted(self.core + self.active + self.virtual) != list(range(n_spatial)):
            raise PartitionError(
                f"partition does not cover orbitals 0..{n_spatial - 1} exactly"
            )

    def reduced(self) -> OrbitalPartition:
        """The same split after the core is frozen away and orbitals are relabeled."""
        keep = sorted(self.active + self.virtual)
        relabel = {old: new for new, old in enumerate(keep)}
        return OrbitalPartition(
            (), tuple(relabel[i] for i in self.active), tuple(relabel[i] for i in self.virtual)
        )

    @property
    def active_modes(self) -> tuple[int, ...]:
        return tuple(2 * p + s for p in self.active for s in (0, 1))

    @property
    def virtual_modes(self) -> tuple[int, ...]:
        return tuple(2 * p + s for p in self.virtual for s in (0, 1))


# ----------------------------------------------------------------------------
# FCIDUMP

_HEADER_RE = re.compile(r"&FCI(.*?)(?:&END|/)", re.IGNORECASE | re.DOTALL)


def _parse_header(header: str) -> dict[str, list[int]]:
    keys: dict[str, list[int]] = {}
    # NAME=v1,v2,... ; values continue until the next NAME=
    tokens = re.findall(r"([A-Za-z_][A-Za-z_0-9]*)\s*=\s*([^=]*?)(?=(?:[A-Za-z_][A-Za-z_0-9]*\s*=)|$)", header, re.DOTALL)
    for name, raw in tokens:
        vals = [v for v in re.split(r"[,\s]+", raw.strip()) if v]
        try:
            keys[name.upper()] = [int(v) for v in vals]
        except ValueError:
            keys[name.upper()] = []
    return keys


def parse_fcidump(text: str, geometry_label: float | None = None) -> MolecularIntegrals:
    """Parse FCIDUMP text into a :class:`MolecularIntegrals`.

    Only the stored canonical entries need to be present; all permutationally
    equivalent entries are filled in. Conflicting duplicates raise
    :class:`FcidumpError` naming the offending line.
    """
    lines = text.splitlines()
    end_line = None
    for i, line in enumerate(lines):
        stripped = line.strip().upper()
        if stripped.startswith("&END") or stripped == "/":
            end_line = i
            break
    if end_line is None:
        raise FcidumpError("header is not terminated by &END")
    match = _HEADER_RE.search("\n".join(lines[: end_line + 1]))
    if match is None:
        raise FcidumpError("missing &FCI header")
    header = _parse_header(match.group(1))
    for key in ("NORB", "NELEC"):
        if len(header.get(key, [])) != 1:
            raise FcidumpError(f"header key {key} missing or malformed")
    norb = header["NORB"][0]
    nelec = header["NELEC"][0]
    if norb <= 0:
        raise FcidumpError("NORB must be positive")
    orbsym = tuple(header["ORBSYM"]) if len(header.get("ORBSYM", [])) == norb else None

    h1 = np.zeros((norb, norb))
    h2 = np.zeros((norb, norb, norb, norb))
    h1_set = np.zeros((norb, norb), dtype=bool)
    h2_set = np.zeros((norb,) * 4, dtype=bool)
    e_const = 0.0
    const_seen = False

    for lineno in range(end_line + 1, len(lines)):
        raw = lines[lineno].split()
        if not raw:
            continue
        if len(raw) != 5:
            raise FcidumpError("expected 'value p q r s'", lineno + 1)
        try:
            value = float(raw[0].replace("D", "E").replace("d", "e"))
            p, q, r, s = (int(x) for x in raw[1:])
        except ValueError as exc:
            raise FcidumpError(f"cannot parse entry: {exc}", lineno + 1) from None
        if any(not 0 <= idx <= norb for idx in (p, q, r, s)):
            raise FcidumpError(f"index out of range 1..{norb}", lineno + 1)
        if p == q == r == s == 0:
            if const_seen and abs(e_const - value) > _DUP_TOL:
                raise FcidumpError("conflicting constant entries", lineno + 1)
            e_const, const_seen = value, True
        elif q == r == s == 0:
            continue  # orbital energy line, carries no integral
        elif r == 0 and s == 0:
            if p == 0 or q == 0:
                raise FcidumpError("one-electron entry with zero index", lineno + 1)
            i, j = p - 1, q - 1
            if h1_set[i, j] and abs(h1[i, j] - value) > _DUP_TOL:
                raise FcidumpError("conflicting duplicate one-electron entry", lineno + 1)
            h1[i, j] = h1[j, i] = value
            h1_set[i, j] = h1_set[j, i] = True
        elif p == 0 or q == 0 or r == 0 or s == 0:
            raise FcidumpError("malformed two-electron index", lineno + 1)
        else:
            i, j, k, l = p - 1, q - 1, r - 1, s - 1
            if h2_set[i, j, k, l] and abs(h2[i, j, k, l] - value) > _DUP_TOL:
                raise FcidumpError("conflicting duplicate two-electron entry", lineno + 1)
            for a, b, c, d in (
                (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
            ):
                h2[a, b, c, d] = value
                h2_set[a, b, c, d] = True

    return MolecularIntegrals(norb, e_const, h1, h2, nelec, geometry_label, orbsym)


def write_fcidump(m: MolecularIntegrals, tol: float = 0.0) -> str:
    """Serialize to FCIDUMP text, writing one canonical entry per symmetry class."""
    n = m.n_spatial
    orbsym = m.orbsym or (1,) * n
    out = [
        f" &FCI NORB={n},NELEC={m.n_electrons},MS2=0,",
        "  ORBSYM=" + ",".join(str(s) for s in orbsym) + ",",
        "  ISYM=1,",
        " &END",
    ]
    fmt = "{: .17e} {:4d} {:4d} {:4d} {:4d}"
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    if k * (k + 1) // 2 + l > ij:
                        continue
                    v = m.h2[i, j, k, l]
                    if abs(v) > tol:
                        out.append(fmt.format(v, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            v = m.h1[i, j]
            if abs(v) > tol:
                out.append(fmt.format(v, i + 1, j + 1, 0, 0))
    out.append(fmt.format(m.e_const, 0, 0, 0, 0))
    return "\n".join(out) + "\n"


def read_fcidump(path: str | Path) -> MolecularIntegrals:
    path = Path(path)
    return parse_fcidump(path.read_text(), geometry_label=geometry_from_name(path.name))


def geometry_from_name(name: str) -> float | None:
    m = re.search(r"_R([0-9]+(?:\.[0-9]+)?)\.fcidump$", name)
    return float(m.group(1)) if m else None


def fixture_dir() -> Path:
    return Path(str(resources.files("vqse") / "data" / "fixtures"))


def fixture_paths(molecule: str) -> list[Path]:
    """Shipped fixtures for ``molecule`` (``h2``, ``li2``, ``n2``), sorted by R."""
    paths = list(fixture_dir().glob(f"{molecule.lower()}_R*.fcidump"))
    return sorted(paths, key=lambda p: geometry_from_name(p.name) or 0.0)


def load_fixture(molecule: str, r: float) -> MolecularIntegrals:
    return read_fcidump(fixture_dir() / f"{molecule.lower()}_R{r:.2f}.fcidump")


# ----------------------------------------------------------------------------
# Frozen core and Hamiltonian assembly


def freeze_core(m: MolecularIntegrals, core) -> MolecularIntegrals:
    """Fold doubly occupied ``core`` orbitals into the constant and one-body terms.

    The remaining orbitals keep their relative order and are relabeled from 0.
    """
    core = sorted(int(c) for c in core)
    if not core:
        return m
    n = m.n_spatial
    if len(set(core)) != len(core) or any(not 0 <= c < n for c in core):
        raise PartitionError(f"invalid core orbitals {core}")
    if m.n_electrons < 2 * len(core):
        raise PartitionError("not enough electrons to fill the frozen core")
    keep = [p for p in range(n) if p not in core]
    if not keep:
        raise PartitionError("freezing every orbital leaves nothing to correlate")
    h1, h2 = m.h1, m.h2
    c = np.array(core)
    e_core = 2.0 * np.trace(h1[np.ix_(c, c)])
    e_core += 2.0 * np.einsum("iijj->", h2[np.ix_(c, c, c, c)])
    e_core -= np.einsum("ijji->", h2[np.ix_(c, c, c, c)])
    k = np.array(keep)
    coulomb = np.einsum("pqcc->pq", h2[np.ix_(k, k, c, c)])
    exchange = np.einsum("pccq->pq", h2[np.ix_(k, c, c, k)])
    h1_eff = h1[np.ix_(k, k)] + 2.0 * coulomb - exchange
    orbsym = tuple(m.orbsym[i] for i in keep) if m.orbsym else None
    return replace(
        m,
        n_spatial=len(keep),
        e_const=m.e_const + float(e_core),
        h1=h1_eff,
        h2=np.ascontiguousarray(h2[np.ix_(k, k, k, k)]),
        n_electrons=m.n_electrons - 2 * len(core),
        orbsym=orbsym,
    )


def restrict(m: MolecularIntegrals, orbitals, n_electrons: int | None = None) -> MolecularIntegrals:
    """Integrals over a subset of orbitals (no core folding), relabeled from 0."""
    k = np.array(list(orbitals))
    orbsym = tuple(m.orbsym[i] for i in k) if m.orbsym else None
    return replace(
        m,
        n_spatial=len(k),
        h1=m.h1[np.ix_(k, k)],
        h2=np.ascontiguousarray(m.h2[np.ix_(k, k, k, k)]),
        n_electrons=m.n_electrons if n_electrons is None else n_electrons,
        orbsym=orbsym,
    )


def assemble_hamiltonian(m: MolecularIntegrals, tol: float = 1e-14) -> FermionSum:
    """Second-quantized Hamiltonian over interleaved spin-orbitals (2p up, 2p+1 down).

    ``H = e_const + sum h_pq a+_p a_q + 1/2 sum <pq|rs> a+_p a+_q a_s a_r`` with
    ``<pq|rs> = (pr|qs)``.
    """
    n = m.n_spatial
    terms: dict[tuple, complex] = {}
    if m.e_const != 0.0:
        terms[()] = complex(m.e_const)
    for p in range(n):
        for q in range(n):
            v = m.h1[p, q]
            if abs(v) <= tol:
                continue
            for s in (0, 1):
                key = ((2 * p + s, True), (2 * q + s, False))
                terms[key] = terms.get(key, 0) + v
    # chemists' (pr|qs) -> 1/2 a+_{p s1} a+_{q s2} a_{s s2} a_{r s1}
    nz = np.argwhere(np.abs(m.h2) > tol)
    for p, r, q, s in nz:
        v = 0.5 * m.h2[p, r, q, s]
        for s1 in (0, 1):
            for s2 in (0, 1):
                P, Q, R, S = 2 * p + s1, 2 * q + s2, 2 * r + s1, 2 * s + s2
                if P == Q or R == S:
                    continue
                sign = 1.0
                # canonical order: creations descending, annihilations ascending
                c1, c2 = (P, Q) if P > Q else (Q, P)
                if P < Q:
                    sign = -sign
                a1, a2 = (S, R) if S < R else (R, S)
                if S > R:
                    sign = -sign
                key = ((c1, True), (c2, True), (a1, False), (a2, False))
                terms[key] = terms.get(key, 0) + sign * v
    return FermionSum(terms)
