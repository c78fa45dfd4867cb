import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wqed import setups
from wqed.model import (
    AtomSpec,
    InvalidSpecError,
    PhaseMode,
    SystemSpec,
    giant_atom,
    order_points,
    phase_between,
    require_valid,
    small_atom,
    total_phase,
    validate,
)
from wqed.setups import SetupKind

from conftest import random_systems


def test_minimal_system_is_valid():
    assert validate(SystemSpec([small_atom(0.0, 1.0)])) == []


def test_duplicate_position_reported_once():
    spec = SystemSpec([small_atom(0.0, 1.0), small_atom(0.0, 1.0)])
    problems = validate(spec)
    assert len(problems) == 1
    assert "duplicate coupling position" in problems[0]


def test_atom_without_points():
    spec = SystemSpec([AtomSpec(())])
    assert any("atom without coupling points" in p for p in validate(spec))
    with pytest.raises(InvalidSpecError) as info:
        require_valid(spec)
    assert info.value.violations


@pytest.mark.parametrize("spec, fragment", [
    (SystemSpec([]), "no atoms"),
    (SystemSpec([small_atom(0.0, -1.0)]), "negative strength"),
    (SystemSpec([small_atom(float("nan"), 1.0)]), "non-finite position"),
    (SystemSpec([small_atom(0.0, 1.0)], k0=0.0), "carrier wavenumber"),
    (SystemSpec([giant_atom([1.0, 0.5], 1.0)]), "strictly increasing"),
])
def test_validation_messages(spec, fragment):
    assert any(fragment in p for p in validate(spec))


def _owners(kind):
    spec = setups.make_spec(kind, setups.default_params(kind))
    return [spec.atoms[p.atom].label for p in order_points(spec)]


def test_braided_ordering():
    assert _owners(SetupKind.GG) == ["giant1", "giant2", "giant1", "giant2"]


def test_giant_small_ordering():
    assert _owners(SetupKind.GS) == ["giant", "small", "giant"]


def test_single_atom_ordering():
    pts = order_points(SystemSpec([small_atom(0.3, 1.0)]))
    assert len(pts) == 1 and pts[0].index == 0


def test_preset_phases():
    smsm = setups.make_spec(SetupKind.SMSM, setups.SmSmParams())
    assert total_phase(smsm) == pytest.approx(2 * math.pi, abs=1e-12)
    gs = setups.make_spec(SetupKind.GS, setups.GsParams())
    arm = [p for p in order_points(gs) if p.atom == 0]
    assert phase_between(gs, arm[0], arm[1]) == pytest.approx(math.pi, abs=1e-12)
    assert phase_between(gs, arm[0], arm[0]) == 0.0


@settings(max_examples=60, deadline=None)
@given(random_systems())
def test_ordering_is_idempotent_permutation(spec):
    pts = order_points(spec)
    xs = [p.position for p in pts]
    assert xs == sorted(xs)
    assert [p.index for p in pts] == list(range(spec.n_points))
    original = sorted((i, j) for i, a in enumerate(spec.atoms) for j in range(len(a.coupling_points)))
    assert sorted((p.atom, p.local) for p in pts) == original
    assert order_points(spec) == pts


@settings(max_examples=60, deadline=None)
@given(random_systems(), st.floats(50.0, 150.0))
def test_phase_symmetry_additivity_and_k_dependence(spec, k):
    pts = order_points(spec)
    a, c = pts[0], pts[-1]
    b = pts[len(pts) // 2]
    assert phase_between(spec, a, c, k) == pytest.approx(phase_between(spec, c, a, k))
    assert phase_between(spec, a, c, k) == pytest.approx(
        phase_between(spec, a, b, k) + phase_between(spec, b, c, k), rel=1e-12, abs=1e-12)
    markov = spec.with_phase_mode(PhaseMode.MARKOV)
    exact = spec.with_phase_mode(PhaseMode.EXACT)
    assert phase_between(markov, a, c, k) == phase_between(markov, a, c, 2 * k)
    assert phase_between(exact, a, c, 2 * k) == pytest.approx(2 * phase_between(exact, a, c, k))


def test_dict_round_trip():
    spec = setups.make_spec(SetupKind.SS, setups.SSParams())
    again = SystemSpec.from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict()
    assert again.dipole_couplings == spec.dipole_couplings
    for a, b in zip(order_points(again), order_points(spec)):
        assert a.position == pytest.approx(b.position, abs=1e-15)
