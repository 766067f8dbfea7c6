"""Command-line interface.

Subcommands: levels, run, plan, project, cut.  Exit codes: 0 success,
2 configuration error, 3 numerical error, 4 partial failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from . import blockio
from .boundstates import level_table
from .config import load_config
from .engine import execute, plan
from .errors import (ConfigError, ConvergenceError, FragspecError,
                     NumericalBlowupError, ValidationError)
from .grids import RadialGrid
from .potentials import load_potential_table, shipped_table_path
from .spectra import cut as cut_op

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fragspec",
        description="Angularly resolved photofragment spectra for intense-laser "
                    "dissociation of a two-state diatomic ion.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--cache", type=Path, default=None)
    common.add_argument("--out", type=Path, default=None)
    common.add_argument(
        "--seedless", action="store_true",
        help="reserved: the pipeline is deterministic and uses no RNG",
    )

    sp = sub.add_parser("levels", parents=[common],
                        help="bound-state (v, N, E) table as CSV")
    sp.add_argument("--v-max", type=int, default=19)
    sp.add_argument("--n-rot-max", type=int, default=2)

    sub.add_parser("run", parents=[common], help="full pipeline")

    sp = sub.add_parser("plan", parents=[common], help="show the job lattice")
    sp.add_argument("--dry-run", action="store_true")

    sub.add_parser("project", parents=[common],
                   help="re-run the spectra stages from cached amplitudes")

    sp = sub.add_parser("cut", help="extract curves from a detector image block")
    sp.add_argument("image", type=Path)
    sp.add_argument("--axis", choices=("alpha0", "fixed_krho"), default="alpha0")
    sp.add_argument("--value", type=float, default=0.0)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--seedless", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if getattr(args, "seedless", False):
        print("error: --seedless is reserved and rejected; the pipeline is "
              "deterministic and uses no random numbers", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _dispatch(args)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, NumericalBlowupError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FragspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


def _dispatch(args) -> int:
    if args.command == "cut":
        img = blockio.read_image(args.image)
        c = cut_op(img, args.axis, args.value)
        blockio.write_cut_csv(args.out, c)
        if c.snapped is not None:
            print(f"snapped k_rho {args.value:g} -> {c.snapped:g}")
        return EXIT_OK

    cfg = load_config(args.config)

    if args.command == "levels":
        pot = load_potential_table(cfg.potential_table or shipped_table_path())
        grid = RadialGrid(n_r=cfg.n_r, r_min=cfg.r_min, r_max=cfg.r_max)
        rows = level_table(pot, args.v_max, args.n_rot_max, grid)
        out = args.out or (cfg.out_dir / "levels.csv")
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        blockio.write_levels_csv(out, rows)
        print(f"wrote {len(rows)} levels to {out}")
        return EXIT_OK

    rp = plan(cfg, cache_dir=args.cache, out_dir=args.out)
    if args.command == "plan":
        print(rp.describe())
        return EXIT_OK

    stages = "all" if args.command == "run" else "project"
    manifest = execute(rp, workers=args.workers, stages=stages)
    n_fail = len(manifest["failures"])
    if n_fail:
        print(f"{n_fail} job(s) failed; see manifest.json", file=sys.stderr)
        return EXIT_PARTIAL
    print(f"ok: {manifest['job_count']} jobs "
          f"({manifest['cache_hits']} cache hits) -> {rp.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
