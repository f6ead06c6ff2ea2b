"""Command-line entry point.

    cstnsim run --config base.cfg --nodes 2
    cstnsim sweep-block-size --config base.cfg --supers 0.2 --out block_sweep.csv
    cstnsim sweep-network-size --mode terrestrial --trials 1000 --out size_sweep.csv
    cstnsim dump-topology --nodes 20 --out edges.txt
    cstnsim dump-trace --nodes 20
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .engine import run
from .experiments import (
    DEFAULT_BLOCK_SIZES,
    DEFAULT_NETWORK_SIZES,
    Mode,
    Scenario,
    SweepKind,
    apply_mode,
    format_csv,
    pick_miner,
    run_sweep,
    underpowered,
)
from .metrics import tps
from .model import (
    CONFIG_FIELDS,
    Message,
    SimConfig,
    load_config,
    parse_value,
    validate_config,
)
from .topology import build_network

ALIASES = {
    "n_nodes": ["--nodes"],
    "super_fraction": ["--supers"],
    "gateway_count": ["--gateways"],
    "list_capacity": ["--k"],
    "bandwidth_bps": ["--bandwidth"],
    "intrinsic_delay_ms": ["--intrinsic"],
    "satellite_delay_ms": ["--sat-delay"],
    "block_size_bits": ["--block-size"],
    "tx_size_bits": ["--tx-size"],
    "sync_threshold": ["--threshold"],
    "rng_seed": ["--seed"],
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file of 'key = value' lines")
    group = p.add_argument_group("config overrides")
    for name in CONFIG_FIELDS:
        flags = ["--" + name.replace("_", "-")] + ALIASES.get(name, [])
        group.add_argument(*flags, dest=name, metavar="V", default=None)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.CSTN.value)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cstnsim", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="propagate one block and print the TPS result")
    _add_config_flags(p)
    p.add_argument("--miner", type=int, help="origin node (default: random ordinary node)")

    for name, help_ in (("sweep-block-size", "TPS against block size"),
                        ("sweep-network-size", "TPS against network size")):
        p = sub.add_parser(name, help=help_)
        _add_config_flags(p)
        _add_output(p)
        p.add_argument("--values", help="comma-separated sweep values")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("dump-topology", help="write the overlay as 'src dst listkind' lines")
    _add_config_flags(p)
    _add_output(p)

    p = sub.add_parser("dump-trace", help="write 'node first_receipt_ms via' lines")
    _add_config_flags(p)
    _add_output(p)
    p.add_argument("--miner", type=int)
    return parser


def resolve_config(args) -> SimConfig:
    """Config file (or defaults) with flag overrides and the mode applied; not yet validated."""
    config = load_config(args.config) if args.config else SimConfig()
    overrides = {}
    for name in CONFIG_FIELDS:
        raw = getattr(args, name, None)
        if raw is not None:
            overrides[name] = parse_value(name, raw)
    return apply_mode(config.replace(**overrides), Mode(args.mode))


def _parse_values(raw: Optional[str], kind: SweepKind) -> List[float]:
    if raw is None:
        return list(DEFAULT_BLOCK_SIZES if kind is SweepKind.BLOCK_SIZE else DEFAULT_NETWORK_SIZES)
    try:
        values = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"bad --values: {raw!r}") from None
    if kind is SweepKind.NETWORK_SIZE:
        return [int(v) for v in values]
    return values


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror}") from None


def _single_run(args, config: SimConfig):
    network = build_network(config, config.rng_seed)
    miner = args.miner if args.miner is not None else pick_miner(network, config.rng_seed)
    if not 0 <= miner < config.n_nodes:
        raise CliError(f"miner {miner} out of range")
    trace = run(network, config, Message.block(config, miner), miner)
    return network, trace


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        base = resolve_config(args)
        config = validate_config(base)
        if args.command == "run":
            _, trace = _single_run(args, config)
            res = tps(trace, config.block_size_bits, config.tx_size_bits, config.sync_threshold)
            print(f"sync_time_ms {res.sync_time_ms if res.sync_time_ms is not None else '-'}")
            print(f"tps {res.tps if res.tps is not None else '-'}")
            print(f"reached_fraction {res.reached_fraction}")
        elif args.command in ("sweep-block-size", "sweep-network-size"):
            kind = (SweepKind.BLOCK_SIZE if args.command == "sweep-block-size"
                    else SweepKind.NETWORK_SIZE)
            try:
                scenario = Scenario(base, Mode(args.mode), kind,
                                    _parse_values(args.values, kind), args.trials)
            except ValueError as exc:
                raise CliError(str(exc)) from None
            if args.out is not None:
                _emit("", args.out)  # fail on an unwritable path before the long run
            rows = run_sweep(scenario, jobs=args.jobs)
            for value in underpowered(rows, args.trials):
                print(f"warning: sweep value {value}: over half the trials missed the "
                      f"threshold", file=sys.stderr)
            _emit(format_csv(rows), args.out)
        elif args.command == "dump-topology":
            _emit(build_network(config, config.rng_seed).edge_list(), args.out)
        elif args.command == "dump-trace":
            _, trace = _single_run(args, config)
            _emit(trace.dump(), args.out)
    except (CliError, ValueError) as exc:
        print(f"cstnsim: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
