"""Potential-energy-curve scans: configuration, per-geometry pipeline and outputs.

A scan config is a flat ``key = value`` text file. ``#`` starts a comment.

==================  =========================================================
key                 meaning (default)
==================  =========================================================
molecule            fixture set: ``h2``, ``li2`` or ``n2`` (required)
core                number of frozen-core orbitals (0)
active              number of active orbitals (2)
virtual             number of virtual orbitals (rest of the fixture)
geometries          ``all`` or a comma list of bond lengths in Angstrom
methods             comma list from vqe, qse, vqse, fci, cisd, hf
ansatz              ``auto``, ``pair`` (2-qubit sweep) or ``uccsd`` (auto)
grid_size           theta points in the sweep (257)
shots               shots per setting and angle (8192)
readout             readout flip probability p(1|0) = p(0|1) (0.02)
readout_p01         overrides p(1|0) on both qubits
readout_p10         overrides p(0|1) on both qubits
noiseless           exact expectations, no shots or readout error (false)
oracle              statevector pencils instead of measured ones (false)
norm_cutoff         B_jj cutoff (1e-6 noiseless, 1e-3 noisy)
jump_rel_factor     relative jump threshold factor (10)
jump_abs_floor      absolute jump threshold in Hartree (0.020)
jump_weak_ratio     only B directions below this fraction of the top count (0.05)
null_rtol           relative B eigenvalue floor (1e-10)
n_states            energies reported for spectral methods (5)
fixed_rank          ``none``, ``auto`` (largest clean rank) or an integer
seed                base random seed (0)
n_seeds             independent noisy repetitions (1)
jobs                worker processes over geometries (1)
out                 output directory (``scan_out``)
==================  =========================================================
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import traceback
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import integrals
from .fermion import FermionSum, jordan_wigner
from .integrals import OrbitalPartition, assemble_hamiltonian, freeze_core, restrict
from .oracles import cisd_spectrum, fci_spectrum, hartree_fock_energy
from .qubitops import ProjectedHamiltonian, embed_pair_state, project_to_pair_subspace
from .simulator import DEFAULT_GRID_SIZE, NoiseModel, default_grid, prepare_ansatz, run_sweep
from .spectra import JumpOptions, SpectrumResult, max_clean_rank, select_rank_ground, solve_fixed_rank
from .subspace import (
    NOISELESS_CUTOFF,
    NOISY_CUTOFF,
    ExpansionOptions,
    PencilProblem,
    PencilTemplate,
    build_pencil_oracle,
    generate_expansion_ops,
)
from .vqe import ConvergenceWarning, UccsdEnergy, build_uccsd, fit_and_minimize, optimize_uccsd

log = logging.getLogger(__name__)

METHODS = ("hf", "cisd", "vqe", "qse", "vqse", "fci")
SPECTRAL = ("qse", "vqse", "fci")
CHECKSUM_FILE = "SHA256SUMS"


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ScanConfig:
    molecule: str
    core: int = 0
    active: int = 2
    virtual: int | None = None
    geometries: tuple[float, ...] | None = None
    methods: tuple[str, ...] = ("vqe", "qse", "vqse", "fci")
    ansatz: str = "auto"
    grid_size: int = DEFAULT_GRID_SIZE
    shots: int = 8192
    readout_p01: float = 0.02
    readout_p10: float = 0.02
    noiseless: bool = False
    oracle: bool = False
    norm_cutoff: float | None = None
    jump_rel_factor: float = 10.0
    jump_abs_floor: float = 0.020
    jump_weak_ratio: float = 0.05
    null_rtol: float = 1e-10
    n_states: int = 5
    fixed_rank: str = "none"
    seed: int = 0
    n_seeds: int = 1
    jobs: int = 1
    out: str = "scan_out"

    # parsing -------------------------------------------------------------
    @classmethod
    def from_text(cls, text: str) -> ScanConfig:
        raw: dict[str, str] = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key.lower()] = value
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> ScanConfig:
        raw = dict(raw)
        known = {f.name for f in fields(cls)} | {"readout"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "molecule" not in raw:
            raise ConfigError("config must set molecule")
        kw: dict = {"molecule": raw.pop("molecule").lower()}
        if "readout" in raw:
            p = float(raw.pop("readout"))
            kw["readout_p01"] = kw["readout_p10"] = p
        try:
            for key, value in raw.items():
                if key in ("core", "active", "grid_size", "shots", "n_states", "seed", "n_seeds", "jobs"):
                    kw[key] = int(value)
                elif key == "virtual":
                    kw[key] = None if value.lower() in ("", "rest", "none") else int(value)
                elif key in ("readout_p01", "readout_p10", "jump_rel_factor", "jump_abs_floor", "jump_weak_ratio", "null_rtol"):
                    kw[key] = float(value)
                elif key == "norm_cutoff":
                    kw[key] = None if value.lower() in ("", "default", "none") else float(value)
                elif key in ("noiseless", "oracle"):
                    kw[key] = _bool(value)
                elif key == "geometries":
                    kw[key] = None if value.lower() in ("", "all") else tuple(float(v) for v in value.split(","))
                elif key == "methods":
                    kw[key] = tuple(m.strip().lower() for m in value.split(",") if m.strip())
                else:
                    kw[key] = value
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
        cfg = cls(**kw)
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> ScanConfig:
        """Read a config file; a bare name such as ``h2_noiseless`` selects a packaged config."""
        path = Path(path)
        builtin = integrals.fixture_dir().parent / "configs" / f"{path.name}.cfg"
        if not path.exists() and path.suffix == "" and builtin.exists():
            path = builtin
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def to_text(self, skip: tuple[str, ...] = ()) -> str:
        """Canonical serialization (sorted keys) without the fields in ``skip``."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in skip:
                continue
            v = getattr(self, f.name)
            if v is None:
                v = "none" if f.name != "geometries" else "all"
            elif isinstance(v, tuple):
                v = ",".join(f"{x:.2f}" if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        """Digest of every field that can change a result (not ``out`` or ``jobs``)."""
        return hashlib.sha256(self.to_text(skip=("jobs", "out")).encode()).hexdigest()

    # validation ----------------------------------------------------------
    def check(self) -> None:
        if not self.methods:
            raise ConfigError("method list is empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods: {', '.join(bad)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("duplicate methods")
        if self.ansatz not in ("auto", "pair", "uccsd"):
            raise ConfigError(f"unknown ansatz {self.ansatz!r}")
        if self.core < 0 or self.active < 1 or (self.virtual is not None and self.virtual < 0):
            raise ConfigError("orbital counts must be non-negative with at least one active orbital")
        if self.grid_size < 3:
            raise ConfigError("grid_size must be at least 3")
        if self.n_states < 1 or self.n_seeds < 1 or self.jobs < 1:
            raise ConfigError("n_states, n_seeds and jobs must be positive")
        if not self.noiseless and self.shots < 1:
            raise ConfigError("noisy runs need shots >= 1")
        if self.fixed_rank not in ("none", "auto"):
            try:
                if int(self.fixed_rank) < 1:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"fixed_rank must be none, auto or a positive integer, not {self.fixed_rank!r}") from None
        if self.resolved_ansatz() == "uccsd" and not self.noiseless:
            raise ConfigError("the UCCSD ansatz runs only in noiseless mode")
        if self.oracle and not self.noiseless:
            raise ConfigError("the oracle pencil path needs noiseless mode")
        paths = fixture_files(self)
        missing = [str(p) for p in paths if not p.exists()]
        if missing:
            raise ConfigError(f"missing fixtures: {', '.join(missing)}")
        if not paths:
            raise ConfigError(f"no fixtures for molecule {self.molecule!r}")

    def resolved_ansatz(self) -> str:
        if self.ansatz != "auto":
            return self.ansatz
        return "pair" if self.active == 2 else "uccsd"

    # derived objects -------------------------------------------------------
    def noise_model(self, member: int = 0) -> NoiseModel:
        if self.noiseless:
            return NoiseModel.noiseless()
        readout = ((self.readout_p01, self.readout_p10),) * 2
        return NoiseModel(shots=self.shots, readout=readout, seed=self.seed + member)

    def jump_options(self) -> JumpOptions:
        return JumpOptions(self.jump_rel_factor, self.jump_abs_floor, self.null_rtol, self.jump_weak_ratio)

    def cutoff(self) -> float:
        if self.norm_cutoff is not None:
            return self.norm_cutoff
        return NOISELESS_CUTOFF if self.noiseless else NOISY_CUTOFF

    def with_overrides(self, **kw) -> ScanConfig:
        cfg = replace(self, **{k: v for k, v in kw.items() if v is not None})
        cfg.check()
        return cfg


def fixture_files(cfg: ScanConfig) -> list[Path]:
    if cfg.geometries is None:
        return integrals.fixture_paths(cfg.molecule)
    return [integrals.fixture_dir() / f"{cfg.molecule}_R{r:.2f}.fcidump" for r in cfg.geometries]


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def verify_fixtures(paths: list[Path]) -> dict[str, str]:
    """Checksums of ``paths``; raises :class:`ConfigError` on a manifest mismatch."""
    manifest = {}
    mpath = integrals.fixture_dir() / CHECKSUM_FILE
    if mpath.exists():
        for line in mpath.read_text().splitlines():
            if line.strip():
                digest, name = line.split()
                manifest[name] = digest
    sums = {}
    for p in paths:
        digest = sha256_file(p)
        expected = manifest.get(p.name)
        if expected is not None and expected != digest:
            raise ConfigError(f"fixture {p.name} does not match its recorded checksum")
        sums[p.name] = digest
    return sums


# ----------------------------------------------------------------------------
# Per-geometry pipeline


@dataclass
class StageError:
    stage: str
    message: str


@dataclass
class GeometryResult:
    r: float
    energies: dict[str, list[float]] = field(default_factory=dict)
    energy_std: dict[str, list[float]] = field(default_factory=dict)
    theta_min: list[float] = field(default_factory=list)
    spectra: dict[str, list[dict]] = field(default_factory=dict)  # per method, per seed
    details: dict = field(default_factory=dict)
    error: StageError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ScanResult:
    config: ScanConfig
    geometries: list[GeometryResult]
    provenance: dict
    pencils: dict = field(default_factory=dict, repr=False)  # (r, method) -> [PencilProblem per seed]

    @property
    def failed(self) -> list[GeometryResult]:
        return [g for g in self.geometries if not g.ok]


@dataclass
class PreparedGeometry:
    """Hamiltonians and the core-free partition of one geometry."""

    n_electrons: int
    partition: OrbitalPartition  # core-free
    hamiltonian: FermionSum  # active + virtual
    active_hamiltonian: FermionSum


def prepare_geometry(cfg: ScanConfig, r: float, stage: list[str] | None = None) -> PreparedGeometry:
    """Load, freeze the core and assemble the full and active-only Hamiltonians."""
    stage = stage if stage is not None else [""]
    stage[0] = "ingest"
    m = integrals.load_fixture(cfg.molecule, r)
    n_virtual = cfg.virtual if cfg.virtual is not None else m.n_spatial - cfg.core - cfg.active
    part = OrbitalPartition.from_counts(cfg.core, cfg.active, n_virtual)
    if part.n_spatial > m.n_spatial:
        raise integrals.PartitionError(f"partition needs {part.n_spatial} orbitals, fixture has {m.n_spatial}")
    stage[0] = "freeze_core"
    mf = freeze_core(m, part.core)
    red = part.reduced()
    mf = restrict(mf, range(len(red.active) + len(red.virtual)))
    if mf.n_electrons > 2 * len(red.active):
        raise integrals.PartitionError("active space cannot hold the non-core electrons")
    stage[0] = "hamiltonian"
    h = assemble_hamiltonian(mf)
    ha = assemble_hamiltonian(restrict(mf, red.active, mf.n_electrons))
    return PreparedGeometry(mf.n_electrons, red, h, ha)


def _spectral_summary(res: SpectrumResult, n_states: int) -> dict:
    d = res.to_dict()
    d["energies"] = np.asarray(res.eigenvalues)[:n_states].tolist()
    return d


def _run_geometry(cfg: ScanConfig, r: float, sweeps: list) -> tuple[GeometryResult, dict]:
    out = GeometryResult(r)
    pencils: dict[str, list[PencilProblem]] = {}
    stage = ["ingest"]
    try:
        prep = prepare_geometry(cfg, r, stage)
        n_el = prep.n_electrons
        part = prep.partition
        n_modes = 2 * (len(part.active) + len(part.virtual))
        n_act_modes = 2 * len(part.active)
        act_part = OrbitalPartition((), tuple(range(len(part.active))), ())
        jump = cfg.jump_options()
        cutoff = cfg.cutoff()
        per_seed: dict[str, list[list[float]]] = {m: [] for m in cfg.methods}

        if "hf" in cfg.methods:
            stage[0] = "hf"
            per_seed["hf"].append([hartree_fock_energy(prep.hamiltonian, n_modes, n_el)])
        if "cisd" in cfg.methods:
            stage[0] = "cisd"
            per_seed["cisd"].append(cisd_spectrum(prep.active_hamiltonian, n_act_modes, n_el, 0, 1).tolist())
        if "fci" in cfg.methods:
            stage[0] = "fci"
            per_seed["fci"].append(fci_spectrum(prep.hamiltonian, n_modes, n_el, 0, cfg.n_states).tolist())

        wants = [m for m in ("vqe", "qse", "vqse") if m in cfg.methods]
        if wants:
            stage[0] = "expansion"
            opts = ExpansionOptions(n_active_electrons=n_el)
            ops = generate_expansion_ops(part, opts) if "vqse" in wants else None
            ops_active = generate_expansion_ops(act_part, opts) if "qse" in wants else None
            ansatz = cfg.resolved_ansatz()
            if ansatz == "pair":
                if len(part.active) != 2 or n_el != 2:
                    raise ValueError("the pair ansatz needs two electrons in two active orbitals")
                stage[0] = "project"
                h2q = ProjectedHamiltonian(project_to_pair_subspace(jordan_wigner(prep.active_hamiltonian, 4)))
                out.details["projected_hamiltonian"] = {
                    "g": [h2q.g1, h2q.g2, h2q.g3, h2q.g4, h2q.g5],
                    "off_structure_norm": h2q.off_structure_norm(),
                }
                templates = {}
                if not cfg.oracle:
                    stage[0] = "pencil"
                    if ops is not None:
                        templates["vqse"] = PencilTemplate(ops, prep.hamiltonian, part)
                    if ops_active is not None:
                        templates["qse"] = PencilTemplate(ops_active, prep.active_hamiltonian, act_part)
                states = []
                for record in sweeps:
                    stage[0] = "fit"
                    mn = fit_and_minimize(record, h2q)
                    out.theta_min.append(mn.theta_min)
                    if "vqe" in cfg.methods:
                        per_seed["vqe"].append([mn.energy])
                    stage[0] = "pencil"
                    for method, o, h, pp in (
                        ("vqse", ops, prep.hamiltonian, part),
                        ("qse", ops_active, prep.active_hamiltonian, act_part),
                    ):
                        if o is None:
                            continue
                        if cfg.oracle:
                            psi = embed_pair_state(prepare_ansatz(mn.theta_min))
                            p = build_pencil_oracle(o, h, psi, pp, cutoff)
                        else:
                            p = templates[method].evaluate(mn.table, cutoff)
                        pencils.setdefault(method, []).append(p)
            else:
                if not cfg.noiseless:
                    raise ValueError("UCCSD runs only in noiseless mode")
                stage[0] = "ansatz"
                ucc = build_uccsd(part, n_el)
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", ConvergenceWarning)
                    res = optimize_uccsd(ucc, prep.active_hamiltonian)
                out.details["uccsd"] = {
                    "n_parameters": len(ucc),
                    "converged": res.converged,
                    "grad_norm": res.grad_norm,
                    "n_evals": res.n_evals,
                    "warnings": [str(w.message) for w in caught],
                }
                if "vqe" in cfg.methods:
                    per_seed["vqe"].append([res.energy])
                psi = UccsdEnergy(ucc, prep.active_hamiltonian).full_state(res.theta)
                stage[0] = "pencil"
                if ops is not None:
                    pencils["vqse"] = [build_pencil_oracle(ops, prep.hamiltonian, psi, part, cutoff)]
                if ops_active is not None:
                    pencils["qse"] = [build_pencil_oracle(ops_active, prep.active_hamiltonian, psi, act_part, cutoff)]
            stage[0] = "spectra"
            for method, plist in pencils.items():
                out.spectra[method] = []
                for p in plist:
                    sres = select_rank_ground(p, jump)
                    summary = _spectral_summary(sres, cfg.n_states)
                    summary["pencil"] = {k: v for k, v in p.diagnostics.items()}
                    out.spectra[method].append(summary)
                    per_seed[method].append(summary["energies"])
        _aggregate(out, per_seed)
    except Exception as exc:  # recorded per geometry; the scan goes on
        log.debug("geometry %s failed in %s", r, stage[0], exc_info=True)
        out.error = StageError(stage[0], f"{type(exc).__name__}: {exc}")
        out.details["traceback"] = traceback.format_exc(limit=4)
        pencils = {}
    return out, pencils


def _aggregate(out: GeometryResult, per_seed: dict[str, list[list[float]]]) -> None:
    for method, runs in per_seed.items():
        if not runs:
            continue
        n = min(len(x) for x in runs)
        arr = np.array([x[:n] for x in runs])
        out.energies[method] = arr.mean(axis=0).tolist()
        out.energy_std[method] = (arr.std(axis=0, ddof=1) if len(arr) > 1 else np.zeros(n)).tolist()


def _apply_fixed_rank(cfg: ScanConfig, result: ScanResult) -> None:
    """Excited states at one retained rank shared by every geometry (per method and seed)."""
    if cfg.fixed_rank == "none":
        return
    ok = [g for g in result.geometries if g.ok]
    jump = cfg.jump_options()
    for method in ("qse", "vqse"):
        if method not in cfg.methods or not ok:
            continue
        n_seeds = len(result.pencils.get((ok[0].r, method), []))
        ranks = []
        for s in range(n_seeds):
            plist = [result.pencils[(g.r, method)][s] for g in ok]
            k = max_clean_rank(plist, jump) if cfg.fixed_rank == "auto" else int(cfg.fixed_rank)
            ranks.append(k)
            try:
                spectra = solve_fixed_rank(plist, k, jump, names=[g.r for g in ok])
            except ValueError as exc:
                for g in ok:
                    g.error = StageError("fixed_rank", str(exc))
                return
            for g, sres in zip(ok, spectra):
                g.spectra[method][s]["fixed_rank"] = {"k": k, "energies": np.asarray(sres.eigenvalues)[: cfg.n_states].tolist()}
        for g in ok:
            runs = [g.spectra[method][s]["fixed_rank"]["energies"] for s in range(n_seeds)]
            n = min(len(x) for x in runs)
            arr = np.array([x[:n] for x in runs])
            g.energies[method] = arr.mean(axis=0).tolist()
            g.energy_std[method] = (arr.std(axis=0, ddof=1) if len(arr) > 1 else np.zeros(n)).tolist()
        result.provenance.setdefault("fixed_rank", {})[method] = ranks


def run_scan(cfg: ScanConfig) -> ScanResult:
    """Run every geometry of ``cfg``; failures are recorded per geometry with their stage."""
    paths = fixture_files(cfg)
    checksums = verify_fixtures(paths)
    radii = [integrals.geometry_from_name(p.name) for p in paths]
    sweeps = []
    if cfg.resolved_ansatz() == "pair" and any(m in cfg.methods for m in ("vqe", "qse", "vqse")):
        # one sweep per seed; the ansatz is molecule-independent so every geometry shares it
        grid = default_grid(cfg.grid_size)
        sweeps = [run_sweep(grid, cfg.noise_model(k)) for k in range(cfg.n_seeds)]
    if cfg.jobs > 1 and len(radii) > 1:
        from joblib import Parallel, delayed

        pairs = Parallel(n_jobs=cfg.jobs)(delayed(_run_geometry)(cfg, r, sweeps) for r in radii)
    else:
        pairs = [_run_geometry(cfg, r, sweeps) for r in radii]
    provenance = {
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "n_seeds": cfg.n_seeds,
        "fixtures": checksums,
    }
    result = ScanResult(cfg, [g for g, _ in pairs], provenance)
    for g, pens in pairs:
        for method, plist in pens.items():
            result.pencils[(g.r, method)] = plist
    _apply_fixed_rank(cfg, result)
    return result


# ----------------------------------------------------------------------------
# Outputs


def _states_for(method: str, cfg: ScanConfig, g: GeometryResult) -> list[float]:
    vals = g.energies.get(method, [])
    return vals[: cfg.n_states] if method in SPECTRAL else vals[:1]


def curves_csv(result: ScanResult) -> str:
    cfg = result.config
    buf = io.StringIO()
    buf.write(f"# config_hash: {result.provenance['config_hash']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["R", "method", "state_index", "energy_hartree"])
    for g in result.geometries:
        if not g.ok:
            continue
        for method in cfg.methods:
            for k, e in enumerate(_states_for(method, cfg, g)):
                w.writerow([f"{g.r:.2f}", method, k, f"{e:.12f}"])
    return buf.getvalue()


def diagnostics_doc(result: ScanResult) -> dict:
    geoms = []
    for g in result.geometries:
        entry = {
            "R": g.r,
            "status": "ok" if g.ok else "error",
            "theta_min": g.theta_min,
            "energies": g.energies,
            "energy_std": g.energy_std,
            "spectra": g.spectra,
            "details": g.details,
        }
        if g.error is not None:
            entry["error"] = asdict(g.error)
        geoms.append(entry)
    return {
        "config": result.config.to_text(),
        "provenance": result.provenance,
        "geometries": geoms,
    }


def gnuplot_blocks(result: ScanResult) -> str:
    """One data block per (method, state); blocks are separated by two blank lines."""
    cfg = result.config
    buf = io.StringIO()
    buf.write(f"# config_hash: {result.provenance['config_hash']}\n")
    for method in cfg.methods:
        n_states = max((len(_states_for(method, cfg, g)) for g in result.geometries if g.ok), default=0)
        for k in range(n_states):
            buf.write(f"# method {method} state {k}\n# R energy_hartree energy_std\n")
            for g in result.geometries:
                vals = _states_for(method, cfg, g) if g.ok else []
                if k < len(vals):
                    std = g.energy_std.get(method, [0.0] * (k + 1))[k]
                    buf.write(f"{g.r:.2f} {vals[k]:.12f} {std:.3e}\n")
            buf.write("\n\n")
    return buf.getvalue()


def trace_blocks(result: ScanResult, r: float, method: str = "vqse", seed_index: int = 0) -> str:
    """E0(k) against retained rank for one geometry, with the flagged jump marked."""
    g = next((g for g in result.geometries if math.isclose(g.r, r, abs_tol=1e-9)), None)
    if g is None or not g.ok or method not in g.spectra:
        raise KeyError(f"no {method} spectrum for R = {r}")
    s = g.spectra[method][seed_index]
    buf = io.StringIO()
    buf.write(f"# config_hash: {result.provenance['config_hash']}\n")
    buf.write(f"# R {r:.2f} method {method} k_retained {s['k_retained']} spurious_k {s['spurious_k']}\n")
    buf.write("# k E0 b_eigenvalue\n")
    for k, (e, w) in enumerate(zip(s["e0_trace"], s["b_eigenvalues"]), 1):
        buf.write(f"{k} {e:.12f} {w:.6e}\n")
    return buf.getvalue()


def emit_outputs(result: ScanResult, out_dir: str | Path | None = None, gnuplot: bool = True, pencils: bool = True) -> list[Path]:
    """Write curves.csv, diagnostics.json, optional gnuplot blocks and pencil JSON files."""
    out = Path(out_dir if out_dir is not None else result.config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []

    def put(name: str, text: str) -> None:
        p = out / name
        p.write_text(text)
        written.append(p)

    put("curves.csv", curves_csv(result))
    put("diagnostics.json", json.dumps(diagnostics_doc(result), indent=1, default=float) + "\n")
    if gnuplot:
        put("curves.dat", gnuplot_blocks(result))
        for g in result.geometries:
            if g.ok and "vqse" in g.spectra:
                put(f"trace_vqse_R{g.r:.2f}.dat", trace_blocks(result, g.r))
    if pencils:
        for (r, method), plist in sorted(result.pencils.items()):
            if plist:
                p = plist[0]
                p.diagnostics.setdefault("config_hash", result.provenance["config_hash"])
                put(f"pencil_{method}_R{r:.2f}.json", p.to_json())
    return written
