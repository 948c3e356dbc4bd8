"""Command-line entry point: ``vqse {scan,solve,validate,trace}``.

Exit codes: 0 success, 1 configuration error, 2 runtime error (details for
each failed geometry are written to diagnostics.json).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .pipeline import ConfigError, ScanConfig, emit_outputs, fixture_files, run_scan, trace_blocks, verify_fixtures
from .spectra import JumpOptions, RankError, select_rank_ground, solve_projected
from .subspace import PencilProblem

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _load_config(args) -> ScanConfig:
    cfg = ScanConfig.load(args.config)
    return cfg.with_overrides(
        seed=args.seed,
        out=args.out,
        jobs=args.jobs,
        noiseless=True if args.noiseless else None,
    )


def _cmd_scan(args) -> int:
    cfg = _load_config(args)
    result = run_scan(cfg)
    written = emit_outputs(result)
    for g in result.failed:
        print(f"R = {g.r:.2f}: failed in stage {g.error.stage}: {g.error.message}", file=sys.stderr)
    print(f"wrote {len(written)} files to {cfg.out}")
    return EXIT_RUNTIME if result.failed else EXIT_OK


def _cmd_validate(args) -> int:
    cfg = _load_config(args)
    sums = verify_fixtures(fixture_files(cfg))
    print(f"config ok ({cfg.hash()[:12]}), {len(sums)} fixtures verified")
    return EXIT_OK


def _cmd_solve(args) -> int:
    try:
        pencil = PencilProblem.load(args.pencil)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read pencil {args.pencil}: {exc}") from exc
    opts = JumpOptions()
    if args.rank is not None:
        vals = solve_projected(pencil, args.rank, opts.null_rtol)
        doc = {"k_retained": args.rank, "eigenvalues": vals.tolist()}
    else:
        doc = select_rank_ground(pencil, opts).to_dict()
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "spectrum.json").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_trace(args) -> int:
    cfg = _load_config(args).with_overrides(geometries=(args.geometry,))
    result = run_scan(cfg)
    if result.failed:
        g = result.failed[0]
        print(f"R = {g.r:.2f}: failed in stage {g.error.stage}: {g.error.message}", file=sys.stderr)
        return EXIT_RUNTIME
    text = trace_blocks(result, args.geometry, args.method)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / f"trace_{args.method}_R{args.geometry:.2f}.dat").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqse", description="Subspace-expansion potential energy scans.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_config=True):
        if with_config:
            p.add_argument("--config", required=True, help="flat key = value scan config")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--jobs", type=int)
        p.add_argument("--noiseless", action="store_true")

    common(sub.add_parser("scan", help="run a scan and write curves.csv and diagnostics.json"))
    common(sub.add_parser("validate", help="check a config and the fixture checksums"))
    p = sub.add_parser("solve", help="re-run spectra from a persisted pencil JSON")
    p.add_argument("--pencil", required=True)
    p.add_argument("--rank", type=int, help="fixed retained rank (default: automatic selection)")
    common(p, with_config=False)
    p = sub.add_parser("trace", help="E0(k) data for one geometry")
    common(p)
    p.add_argument("--geometry", type=float, required=True)
    p.add_argument("--method", default="vqse", choices=("vqse", "qse"))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"scan": _cmd_scan, "validate": _cmd_validate, "solve": _cmd_solve, "trace": _cmd_trace}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RankError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
