"""Regenerate the FCIDUMP fixtures shipped in ``src/vqse/data/fixtures``.

Requires pyscf, which is *not* a runtime dependency of the package. Each
fixture holds canonical RHF orbitals (cc-pVDZ, D2h symmetry) sorted by orbital
energy and truncated to the lowest ``norb`` molecular orbitals.

    python scripts/make_fixtures.py [--only h2,li2,n2]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf
from pyscf.tools import fcidump

OUT = Path(__file__).resolve().parents[1] / "src" / "vqse" / "data" / "fixtures"

MOLECULES = {
    # name: (element, total electrons, kept orbitals, core count, R grid in Angstrom)
    "h2": ("H", 2, 10, 0, np.round(np.arange(0.5, 2.5001, 0.1), 2)),
    "li2": ("Li", 6, 10, 2, np.round(np.arange(2.0, 4.0001, 0.2), 2)),
    "n2": ("N", 14, 13, 4, np.round(np.arange(0.9, 1.8001, 0.1), 2)),
}

# Dooh irreps of sigma orbitals (A1g, A1u); the frozen core is always sigma-only
# so a degenerate pi pair is never split between core and active.
SIGMA_IRREPS = (0, 5)


def orbital_order(mo_energy: np.ndarray, orbsym: np.ndarray, ncore: int) -> np.ndarray:
    order = np.argsort(mo_energy, kind="stable")
    sigma = [i for i in order if orbsym[i] in SIGMA_IRREPS][:ncore]
    rest = [i for i in order if i not in sigma]
    return np.array(sigma + rest)


def fixture_name(name: str, r: float) -> str:
    return f"{name}_R{r:.2f}.fcidump"


def build(name: str, r: float) -> None:
    element, nelec, norb, ncore, _ = MOLECULES[name]
    mol = gto.M(
        atom=f"{element} 0 0 0; {element} 0 0 {r}",
        basis="cc-pvdz",
        unit="Angstrom",
        symmetry=True,
        verbose=0,
    )
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.conv_tol_grad = 1e-9
    mf.max_cycle = 200
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"RHF did not converge for {name} at R={r}")
    all_sym = np.asarray(mf.get_orbsym())
    order = orbital_order(mf.mo_energy, all_sym, ncore)
    mo = mf.mo_coeff[:, order[:norb]]
    orbsym = [int(s) for s in all_sym[order[:norb]]]
    h1 = mo.T @ mf.get_hcore() @ mo
    eri = ao2mo.restore(1, ao2mo.kernel(mol, mo), norb)
    fcidump.from_integrals(
        str(OUT / fixture_name(name, r)),
        h1,
        eri,
        norb,
        nelec,
        nuc=mol.energy_nuc(),
        ms=0,
        orbsym=[s % 10 + 1 for s in orbsym],
        tol=1e-14,
        float_format=" %.17e",
    )
    print(f"{name} R={r:.2f} E_RHF={mf.e_tot:.10f} sym={orbsym}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--only", default="h2,li2,n2")
    args = parser.parse_args()
    OUT.mkdir(parents=True, exist_ok=True)
    for name in args.only.split(","):
        for r in MOLECULES[name][4]:
            build(name, float(r))


if __name__ == "__main__":
    main()
