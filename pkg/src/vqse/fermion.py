"""Fermionic ladder-operator algebra and the Jordan-Wigner encoding.

Every :class:`FermionSum` is stored in normal-ordered canonical form: within a
term all creations precede annihilations, creations strictly descending by
mode and annihilations strictly ascending.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

from .qubitops import PauliSum

PRUNE_TOL = 1e-14


class LadderOp(NamedTuple):
    mode: int
    dagger: bool

    def __str__(self) -> str:
        return f"{self.mode}^" if self.dagger else f"{self.mode}"


Term = tuple  # tuple[LadderOp, ...]


def _key(op) -> tuple:
    # creations first (descending mode), then annihilations (ascending mode)
    return (0, -op[0]) if op[1] else (1, op[0])


@lru_cache(maxsize=1 << 18)
def _normal_order(ops: Term) -> tuple[tuple[Term, int], ...]:
    """Expand a product of ladder operators into canonical terms with integer weights."""
    out: dict[Term, int] = {}
    stack = [(ops, 1)]
    while stack:
        term, w = stack.pop()
        for i in range(len(term) - 1):
            a, b = term[i], term[i + 1]
            if a == b:
                break  # a_p a_p = a+_p a+_p = 0
            if _key(a) > _key(b):
                swapped = term[:i] + (b, a) + term[i + 2 :]
                stack.append((swapped, -w))
                if a[0] == b[0]:
                    # a_p a+_p = 1 - a+_p a_p
                    stack.append((term[:i] + term[i + 2 :], w))
                break
        else:
            out[term] = out.get(term, 0) + w
    return tuple((t, w) for t, w in out.items() if w != 0)


def _as_term(ops: Iterable) -> Term:
    return tuple(LadderOp(int(m), bool(d)) for m, d in ops)


class FermionSum:
    """Linear combination of ladder-operator products, kept normal ordered."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None, *, ordered: bool = False):
        acc: dict[Term, complex] = {}
        for ops, c in (terms or {}).items():
            if c == 0:
                continue
            ops = _as_term(ops)
            if ordered:
                acc[ops] = acc.get(ops, 0) + c
            else:
                for t, w in _normal_order(ops):
                    acc[t] = acc.get(t, 0) + w * c
        self.terms: dict[Term, complex] = {
            t: complex(c) for t, c in acc.items() if abs(c) >= PRUNE_TOL
        }

    # constructors -------------------------------------------------------
    @classmethod
    def identity(cls, coeff: complex = 1.0) -> FermionSum:
        return cls({(): coeff})

    @classmethod
    def zero(cls) -> FermionSum:
        return cls()

    @classmethod
    def monomial(cls, *ops, coeff: complex = 1.0) -> FermionSum:
        """``monomial((3, True), (1, False))`` is ``a+_3 a_1``."""
        return cls({tuple(ops): coeff})

    @classmethod
    def create(cls, mode: int) -> FermionSum:
        return cls.monomial((mode, True))

    @classmethod
    def annihilate(cls, mode: int) -> FermionSum:
        return cls.monomial((mode, False))

    @classmethod
    def number(cls, mode: int) -> FermionSum:
        return cls.monomial((mode, True), (mode, False))

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FermionSum.identity(other)
        acc = dict(self.terms)
        for t, c in other.terms.items():
            acc[t] = acc.get(t, 0) + c
        return FermionSum(acc, ordered=True)

    __radd__ = __add__

    def __neg__(self):
        return FermionSum({t: -c for t, c in self.terms.items()}, ordered=True)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return FermionSum({t: c * other for t, c in self.terms.items()}, ordered=True)
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, FermionSum):
            return NotImplemented
        return self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def isclose(self, other: FermionSum, tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def dagger(self) -> FermionSum:
        return hermitian_conjugate(self)

    def modes(self) -> set[int]:
        return {op.mode for t in self.terms for op in t}

    def max_mode(self) -> int:
        return max(self.modes(), default=-1)

    def constant(self) -> complex:
        return self.terms.get((), 0.0)

    def is_particle_conserving(self) -> bool:
        return all(sum(1 if op.dagger else -1 for op in t) == 0 for t in self.terms)

    def sz_weights(self) -> set[int]:
        """Twice the Sz change of each term under the interleaved spin convention."""
        out = set()
        for t in self.terms:
            w = 0
            for op in t:
                spin = 1 if op.mode % 2 == 0 else -1
                w += spin if op.dagger else -spin
            out.add(w)
        return out

    def __repr__(self):
        return f"FermionSum({len(self.terms)} terms)"

    def to_text(self) -> str:
        return format_fermion(self)


def multiply(a: FermionSum, b: FermionSum) -> FermionSum:
    """Distributive product ``a * b`` in canonical form."""
    acc: dict[Term, complex] = {}
    for ta, ca in a.terms.items():
        for tb, cb in b.terms.items():
            c = ca * cb
            for t, w in _normal_order(ta + tb):
                acc[t] = acc.get(t, 0) + w * c
    return FermionSum(acc, ordered=True)


def hermitian_conjugate(a: FermionSum) -> FermionSum:
    acc: dict[Term, complex] = {}
    for t, c in a.terms.items():
        rev = tuple(LadderOp(op.mode, not op.dagger) for op in reversed(t))
        for t2, w in _normal_order(rev):
            acc[t2] = acc.get(t2, 0) + w * c.conjugate()
    return FermionSum(acc, ordered=True)


def normal_order(a: FermionSum) -> FermionSum:
    """Re-canonicalize (already canonical sums are returned unchanged)."""
    return FermionSum(a.terms)


def contract_virtual_vacuum(a: FermionSum, virtual_modes) -> FermionSum:
    """Effective operator on the remaining modes when ``virtual_modes`` are empty.

    In normal order any virtual creation meets the vacuum bra and any virtual
    annihilation meets the vacuum ket, so such terms vanish.
    """
    virt = set(virtual_modes)
    return FermionSum(
        {t: c for t, c in a.terms.items() if not any(op.mode in virt for op in t)},
        ordered=True,
    )


# ----------------------------------------------------------------------------
# Jordan-Wigner


def _ladder_pauli(mode: int, dagger: bool) -> dict[tuple[int, int], complex]:
    # a+_j = Z_0..Z_{j-1} (X_j - iY_j)/2 ; with P(x,z) = i^{|x&z|} X^x Z^z, Y_j = P(bit, bit)
    bit = 1 << mode
    zstr = bit - 1
    sign = -1j if dagger else 1j
    return {(bit, zstr): 0.5, (bit, zstr | bit): 0.5 * sign}


def jordan_wigner(a: FermionSum, n_modes: int | None = None) -> PauliSum:
    """Encode ``a`` on qubits; qubit j is spin-orbital j."""
    if n_modes is None:
        n_modes = a.max_mode() + 1
    if a.max_mode() >= n_modes:
        raise ValueError(f"operator acts on mode {a.max_mode()} >= n_modes={n_modes}")
    cache: dict[Term, PauliSum] = {}
    acc: dict[tuple[int, int], complex] = {}
    for t, c in a.terms.items():
        prod = PauliSum.identity(n_modes)
        for i in range(len(t)):
            key = t[: i + 1]
            if key in cache:
                prod = cache[key]
                continue
            prod = prod * PauliSum(n_modes, _ladder_pauli(*t[i]))
            cache[key] = prod
        for k, v in prod.terms.items():
            acc[k] = acc.get(k, 0) + c * v
    return PauliSum(n_modes, acc)


# ----------------------------------------------------------------------------
# Debug text form:  "(+1.5) 3^ 2^ 0 1"

_LINE_RE = re.compile(r"^\s*\(([^)]*)\)\s*(.*?)\s*$")


def format_fermion(a: FermionSum) -> str:
    lines = []
    for t, c in sorted(a.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
        if c.imag == 0:
            coeff = f"{c.real:+.17g}"
        else:
            coeff = f"{c.real:+.17g}{c.imag:+.17g}j"
        ops = " ".join(str(op) for op in t)
        lines.append(f"({coeff}) {ops}".rstrip())
    return "\n".join(lines)


def parse_fermion(text: str) -> FermionSum:
    acc: dict[Term, complex] = {}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise ValueError(f"line {n}: expected '(coeff) ops...'")
        coeff = complex(m.group(1).replace(" ", ""))
        ops = []
        for tok in m.group(2).split():
            dagger = tok.endswith("^")
            ops.append((int(tok.rstrip("^")), dagger))
        for t, w in _normal_order(_as_term(ops)):
            acc[t] = acc.get(t, 0) + w * coeff
    return FermionSum(acc, ordered=True)
