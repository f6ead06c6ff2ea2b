"""Parameter sweeps over block size and network size, with CSV output."""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .engine import run
from .metrics import TpsResult, tps
from .model import Message, SimConfig, derive_seed, validate_config
from .topology import Network, build_network

log = logging.getLogger(__name__)

CSV_HEADER = ["sweep_value", "mean_tps", "std_tps", "mean_reached", "trials"]

DEFAULT_BLOCK_SIZES = [0.5e6, 1e6, 2e6, 4e6, 8e6, 16e6, 32e6]
DEFAULT_NETWORK_SIZES = [100, 1000, 10000]


class Mode(enum.Enum):
    TERRESTRIAL = "terrestrial"
    CSTN = "cstn"


class SweepKind(enum.Enum):
    BLOCK_SIZE = "block_size"
    NETWORK_SIZE = "network_size"


@dataclass
class Scenario:
    base: SimConfig
    mode: Mode
    sweep: SweepKind
    values: Sequence[float]
    trials: int = 100
    output: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(v <= 0 for v in self.values):
            raise ValueError("sweep values must be positive")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")

    def config_for(self, value) -> SimConfig:
        if self.sweep is SweepKind.BLOCK_SIZE:
            cfg = self.base.replace(block_size_bits=value)
        else:
            cfg = self.base.replace(n_nodes=int(value))
        return apply_mode(cfg, self.mode)


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    mean_tps: Optional[float]
    std_tps: Optional[float]
    mean_reached: float
    trials: int


def apply_mode(config: SimConfig, mode: Mode) -> SimConfig:
    if mode is Mode.TERRESTRIAL:
        return config.replace(super_fraction=0.0, gateway_count=0)
    return config


def pick_miner(network: Network, seed: int) -> int:
    ordinaries = network.ordinaries
    if not ordinaries:
        raise ValueError("network has no ordinary node to mine")
    rng = random.Random(derive_seed(seed, "miner"))
    return ordinaries[rng.randrange(len(ordinaries))]


def run_trial(config: SimConfig, seed: int) -> TpsResult:
    """Build a network from ``seed``, mine one block at a random ordinary node, measure TPS."""
    config = validate_config(config)
    network = build_network(config, seed)
    miner = pick_miner(network, seed)
    trace = run(network, config, Message.block(config, miner), miner,
                seed=derive_seed(seed, "engine"))
    return tps(trace, config.block_size_bits, config.tx_size_bits, config.sync_threshold)


def _run_trial_args(args: Tuple[SimConfig, int]) -> TpsResult:
    return run_trial(*args)


def aggregate(value, results: Sequence[TpsResult]) -> SweepRow:
    ok = [r.tps for r in results if r.tps is not None]
    mean = statistics.fmean(ok) if ok else None
    if len(ok) >= 2:
        std = statistics.stdev(ok)
    else:
        std = 0.0 if ok else None
    reached = statistics.fmean(r.reached_fraction for r in results)
    return SweepRow(value, mean, std, reached, len(ok))


def run_sweep(scenario: Scenario, jobs: int = 1) -> List[SweepRow]:
    """One row per sweep value; trial ``t`` always uses seed ``base.rng_seed + t``."""
    rows = []
    seeds = [scenario.base.rng_seed + t for t in range(scenario.trials)]
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for value in scenario.values:
            cfg = validate_config(scenario.config_for(value))
            work = [(cfg, s) for s in seeds]
            if pool is None:
                results = [_run_trial_args(w) for w in work]
            else:
                results = list(pool.map(_run_trial_args, work))
            row = aggregate(value, results)
            if row.trials * 2 < scenario.trials:
                log.warning("sweep value %s: %d of %d trials missed the sync threshold",
                            value, scenario.trials - row.trials, scenario.trials)
            rows.append(row)
    finally:
        if pool is not None:
            pool.shutdown()
    if scenario.output:
        write_csv(rows, scenario.output)
    return rows


def underpowered(rows: Iterable[SweepRow], trials: int) -> List[float]:
    """Sweep values where more than half the trials never reached the threshold."""
    return [r.sweep_value for r in rows if r.trials * 2 < trials]


# -- CSV --------------------------------------------------------------------

def _fmt(value) -> str:
    return "" if value is None else repr(value)


def _num(raw: str):
    if raw == "":
        return None
    if any(c in raw for c in ".eEn"):
        return float(raw)
    return int(raw)


def format_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([_fmt(r.sweep_value), _fmt(r.mean_tps), _fmt(r.std_tps),
                         _fmt(r.mean_reached), r.trials])
    return buf.getvalue()


def parse_csv(text: str) -> List[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {header}")
    rows = []
    for rec in reader:
        value, mean, std, reached, trials = rec
        rows.append(SweepRow(_num(value), _num(mean), _num(std), float(reached), int(trials)))
    return rows


def write_csv(rows: Iterable[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(rows))


# -- sweep presets ---------------------------------------------------------

def block_size_scenarios(base: SimConfig, block_sizes=DEFAULT_BLOCK_SIZES,
                         trials: int = 100) -> Dict[str, Scenario]:
    """TPS vs block size: CSTN with 20% supers against terrestrial, local and global delays."""
    out = {}
    for label, intrinsic in (("local", 20.0), ("global", 200.0)):
        cfg = base.replace(intrinsic_delay_ms=intrinsic)
        out[f"terrestrial_{label}"] = Scenario(cfg, Mode.TERRESTRIAL, SweepKind.BLOCK_SIZE,
                                               block_sizes, trials)
        out[f"cstn20_{label}"] = Scenario(cfg.replace(super_fraction=0.2), Mode.CSTN,
                                          SweepKind.BLOCK_SIZE, block_sizes, trials)
    return out


def network_size_scenarios(base: SimConfig, sizes=DEFAULT_NETWORK_SIZES,
                           trials: int = 100) -> Dict[str, Scenario]:
    """TPS vs network size at 8 Mbit blocks: terrestrial, CSTN 10% and 20% supers."""
    cfg = base.replace(block_size_bits=8e6, gateway_count=None)
    return {
        "terrestrial": Scenario(cfg, Mode.TERRESTRIAL, SweepKind.NETWORK_SIZE, sizes, trials),
        "cstn10": Scenario(cfg.replace(super_fraction=0.1), Mode.CSTN,
                           SweepKind.NETWORK_SIZE, sizes, trials),
        "cstn20": Scenario(cfg.replace(super_fraction=0.2), Mode.CSTN,
                           SweepKind.NETWORK_SIZE, sizes, trials),
    }


def pooled_standard_error(a: SweepRow, b: SweepRow) -> float:
    return math.sqrt((a.std_tps or 0.0) ** 2 / a.trials + (b.std_tps or 0.0) ** 2 / b.trials)
