import math

import numpy as np
import pytest
from hypothesis import strategies as st

from wqed.model import AtomSpec, CouplingPoint, PhaseMode, SystemSpec


@st.composite
def random_systems(draw, max_atoms=3, max_points=3, phase_modes=(PhaseMode.MARKOV, PhaseMode.EXACT)):
    """Random small/giant arrays with distinct positions and positive strengths."""
    k0 = 100.0
    lam = 2 * math.pi / k0
    n_atoms = draw(st.integers(1, max_atoms))
    counts = [draw(st.integers(1, max_points)) for _ in range(n_atoms)]
    total = sum(counts)
    slots = draw(st.lists(st.integers(0, 400), min_size=total, max_size=total, unique=True))
    xs = [s * lam / 40 for s in slots]
    atoms, pos = [], 0
    for n, c in enumerate(counts):
        mine = sorted(xs[pos:pos + c])
        pos += c
        pts = tuple(CouplingPoint(x, draw(st.floats(0.05, 2.0))) for x in mine)
        atoms.append(AtomSpec(pts, draw(st.floats(-2.0, 2.0)), f"a{n}"))
    mode = draw(st.sampled_from(phase_modes))
    return SystemSpec(atoms, (), k0, mode)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call":
                lines += [l for l in rep.capstdout.splitlines() if l.startswith("CRITERION")]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
