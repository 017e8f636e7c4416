"""Command-line entry point: ``zalka <experiment> [options]``.

Values come from the experiment defaults, then the ``--config`` JSON file,
then command-line flags.  Exit status: 0 on success, 2 for configuration
errors, 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, emit, run_experiment

log = logging.getLogger("zalka")

EXIT_CONFIG = 2
EXIT_IO = 3

_DEFAULTS_HELP = """\
defaults (by experiment):
  aqft_sweep        n=12, e=0.05, 1000 Haar states, k0 swept over 2..n
  trotter_compare   n=7, dt=0.1, t=1, e=0, Lie and Strang
  fidelity_vs_time  n=7, e=0.01, dt=0.05, t=1, 30 trajectories, Strang
  many_electron     e in {0.001,0.002,0.003,0.005,0.01}, N_e = 0..100 step 5,
                    3 coordinates/electron, 8 qubits/coordinate, t=1, dt=0.1
  evolve            n=9, e=0.01, dt=0.05, t=1, 30 trajectories, Strang
  all               lam=4, a=1, L=10, seed=0, depth=full, out=results, format=csv
"""


def _depth(text: str):
    return text if text == "full" else int(text)


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zalka",
        description="Noisy split-operator Schrödinger simulations on a simulated qubit register.",
        epilog=_DEFAULTS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat JSON file with ExperimentConfig fields")
    p.add_argument("--qubits", type=int, dest="n_qubits")
    p.add_argument("--registers", type=_int_list, help="comma-separated register sizes (fidelity_vs_time)")
    p.add_argument("--noise", type=float, dest="e")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--scheme", choices=("lie", "strang"))
    p.add_argument("--depth", type=_depth, help="AQFT depth k0 or 'full'")
    p.add_argument("--trajectories", type=int, dest="n_trajectories")
    p.add_argument("--states", type=int, dest="n_states")
    p.add_argument("--seed", type=int, dest="master_seed")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (results do not depend on this)")
    p.add_argument("--out", dest="output", help="output path; .csv/.json suffix is added")
    p.add_argument("--format", choices=("csv", "json", "both"))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


_OVERRIDES = ("n_qubits", "registers", "e", "dt", "t_final", "scheme", "depth",
              "n_trajectories", "n_states", "master_seed", "output", "format")


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        if data.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"{args.config} is for experiment {data['experiment']!r}")
    data["experiment"] = args.experiment
    for name in _OVERRIDES:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data).resolved()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"zalka: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"zalka: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.threads < 1:
        print("zalka: config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    log.info("running %s with %d thread(s)", cfg.experiment, args.threads)
    record = run_experiment(cfg, threads=args.threads)
    try:
        paths = emit(record, cfg.output, cfg.format)
    except OSError as exc:
        print(f"zalka: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        print(path)
    if record.summary:
        print(json.dumps(record.summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
