"""Command-line entry point: ``dicke-qb <mode> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from ..errors import DickeQBError
from .config import METHODS, MODES, load_config
from .experiments import MODE_RUNNERS


def _nmax(value: str):
    if value == "auto":
        return "auto"
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("--nmax takes a non-negative integer or 'auto'")
    if n < 0:
        raise argparse.ArgumentTypeError("--nmax must be non-negative")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dicke-qb",
        description="Three-level Dicke quantum battery: trajectories, sweeps, ground states and phase-space maps.",
    )
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", help="JSON configuration file; flags override its values")
    p.add_argument("--N", type=int, help="number of atoms")
    p.add_argument("--g12", type=float)
    p.add_argument("--g23", type=float)
    p.add_argument("--charger", help="fock, coherent, squeezed or all")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--nmax", dest="n_max", type=_nmax, help="photon cutoff or 'auto'")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    try:
        config = load_config(args.config, **overrides)
        MODE_RUNNERS[config.mode](config)
    except (DickeQBError, OSError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"dicke-qb: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
