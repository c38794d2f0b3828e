"""``simulate`` command-line entry point."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import MODES, parse_config
from .errors import ConfigError, SimulationError
from .experiment import run_experiment

EXIT_CODES = {
    "config": 2,
    "input": 2,
    "domain": 3,
    "existence": 4,
    "cap-overflow": 5,
    "io": 6,
    "logic": 7,
    "simulation": 1,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Two-site condensate with balanced gain and loss: quantum jumps, "
                    "exact master equation, and mean-field dynamics.",
    )
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--gamma", type=float, help="loss rate gamma_loss")
    p.add_argument("--g", type=float, help="macroscopic interaction strength")
    p.add_argument("--n0", type=int, help="initial particle number")
    p.add_argument("--trajectories", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--out", type=str)
    p.add_argument("--plot", action="store_true",
                   help="also render a PNG next to the CSV output")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = ""
        if args.config is not None:
            try:
                text = args.config.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
        overrides = {
            "mode": args.mode, "gamma_loss": args.gamma, "g": args.g, "N0": args.n0,
            "n_trajectories": args.trajectories, "master_seed": args.seed,
            "t_final": args.t_final, "output_path": args.out,
        }
        config = parse_config(text, overrides)
        for path in run_experiment(config, plot=args.plot):
            print(path)
    except SimulationError as exc:
        message = " ".join(str(exc).split())
        print(f"error[{exc.category}]: {message}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
