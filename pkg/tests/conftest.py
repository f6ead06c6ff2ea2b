import string

import pytest

from cstnsim.model import NodeRole, SimConfig
from cstnsim.topology import Network

O, S, G = NodeRole.ORDINARY, NodeRole.SUPER, NodeRole.GATEWAY

# Ten named nodes A..J plus one gateway (index 10) kept out of the named counts.
NAMES = string.ascii_uppercase[:10]
IDX = {name: i for i, name in enumerate(NAMES)}
GATEWAY = 10


def _ids(names):
    return [IDX[c] for c in names]


def sample_mainland():
    """Miner A on the mainland; supers E and H; J has no in-edges."""
    roles = [O] * 10 + [G]
    roles[IDX["E"]] = roles[IDX["H"]] = S
    net = Network.from_lists(
        roles, capacity=4,
        ordinary={IDX["A"]: _ids("BC"), IDX["B"]: _ids("C"), IDX["C"]: _ids("B"),
                  IDX["F"]: _ids("D"), IDX["J"]: _ids("A")},
        gateways={IDX["A"]: [GATEWAY]},
        members={IDX["E"]: _ids("FG"), IDX["H"]: _ids("I")},
    )
    return net, IDX["A"]


def sample_island():
    """Miner I on the island; supers B and E."""
    roles = [O] * 10 + [G]
    roles[IDX["B"]] = roles[IDX["E"]] = S
    net = Network.from_lists(
        roles, capacity=4,
        ordinary={IDX["I"]: _ids("H"), IDX["H"]: _ids("G"), IDX["F"]: _ids("D"),
                  IDX["J"]: _ids("I")},
        gateways={IDX["I"]: [GATEWAY]},
        members={IDX["B"]: _ids("AC"), IDX["E"]: _ids("F")},
    )
    return net, IDX["I"]


def sample_config():
    return SimConfig(n_nodes=11, super_fraction=0.0, gateway_count=1,
                     intrinsic_delay_ms=200.0, block_size_bits=8e6)


def line_network(n):
    """Terrestrial chain 0 -> 1 -> ... -> n-1."""
    return Network.from_lists([O] * n, capacity=4,
                              ordinary={i: [i + 1] for i in range(n - 1)})


@pytest.fixture
def baseline_config():
    return SimConfig()


# -- acceptance report -----------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
