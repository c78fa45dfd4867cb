"""Geometry and energetics of two-level atoms on a 1D waveguide.

Units: hbar = 1 and the wave velocity is 1, so frequency, wavenumber and
inverse length coincide.  Atom frequencies are stored as a detuning from the
carrier ``k0`` (= omega_0) so that small detunings never suffer cancellation
against a large carrier.

Positions on the Python side are absolute lengths.  The dictionary/JSON form
used by the CLI expresses positions in units of the carrier wavelength
``2*pi/k0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

DEFAULT_K0 = 100.0


class PhaseMode(str, enum.Enum):
    """How propagation phases between coupling points are evaluated."""

    MARKOV = "markov"  # phases frozen at the carrier: k0 * |dx|
    EXACT = "exact"  # phases follow the photon: k * |dx|


class InvalidSpecError(ValueError):
    """Raised when an operation needs a valid :class:`SystemSpec`."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid system: " + "; ".join(self.violations))


@dataclass(frozen=True)
class CouplingPoint:
    position: float
    strength: float


@dataclass(frozen=True)
class AtomSpec:
    """A two-level emitter touching the waveguide at one or more points."""

    coupling_points: tuple[CouplingPoint, ...]
    detuning: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coupling_points", tuple(self.coupling_points))

    @property
    def is_giant(self) -> bool:
        return len(self.coupling_points) >= 2

    @property
    def is_detached(self) -> bool:
        return all(p.strength == 0 for p in self.coupling_points)

    def frequency(self, carrier: float) -> float:
        return carrier + self.detuning


@dataclass(frozen=True)
class DipoleCoupling:
    i: int
    l: int
    strength: float


@dataclass(frozen=True)
class SystemSpec:
    atoms: tuple[AtomSpec, ...]
    dipole_couplings: tuple[DipoleCoupling, ...] = ()
    k0: float = DEFAULT_K0
    phase_mode: PhaseMode = PhaseMode.MARKOV

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "dipole_couplings", tuple(self.dipole_couplings))
        object.__setattr__(self, "phase_mode", PhaseMode(self.phase_mode))

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k0

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_points(self) -> int:
        return sum(len(a.coupling_points) for a in self.atoms)

    def with_phase_mode(self, mode: PhaseMode | str) -> "SystemSpec":
        return SystemSpec(self.atoms, self.dipole_couplings, self.k0, PhaseMode(mode))

    def to_dict(self) -> dict[str, Any]:
        lam = self.wavelength
        return {
            "k0": self.k0,
            "phase_mode": self.phase_mode.value,
            "atoms": [
                {
                    "label": a.label,
                    "detuning": a.detuning,
                    "points": [
                        {"position": p.position / lam, "strength": p.strength}
                        for p in a.coupling_points
                    ],
                }
                for a in self.atoms
            ],
            "dipole_couplings": [
                {"atoms": [d.i, d.l], "g": d.strength} for d in self.dipole_couplings
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SystemSpec":
        """Build a spec from its JSON form (positions in carrier wavelengths)."""
        k0 = float(data.get("k0", DEFAULT_K0))
        lam = 2 * math.pi / k0 if k0 > 0 else float("nan")
        atoms = [
            AtomSpec(
                coupling_points=[
                    CouplingPoint(float(p["position"]) * lam, float(p["strength"]))
                    for p in a.get("points", [])
                ],
                detuning=float(a.get("detuning", 0.0)),
                label=str(a.get("label", f"atom{n + 1}")),
            )
            for n, a in enumerate(data.get("atoms", []))
        ]
        dipoles = [
            DipoleCoupling(int(d["atoms"][0]), int(d["atoms"][1]), float(d["g"]))
            for d in data.get("dipole_couplings", [])
        ]
        return cls(atoms, dipoles, k0, PhaseMode(data.get("phase_mode", "markov")))


@dataclass(frozen=True)
class OrderedPoint:
    """A coupling point in global left-to-right order.

    ``index`` is the 0-based global position in the ordering, ``atom`` and
    ``local`` identify the owner and the point's slot within that atom.
    """

    index: int
    atom: int
    local: int
    position: float
    strength: float


OrderedPoints = tuple[OrderedPoint, ...]


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate(spec: SystemSpec) -> list[str]:
    """Return a description of every violated invariant; empty if valid."""
    problems: list[str] = []
    if not _finite(spec.k0) or spec.k0 <= 0:
        problems.append(f"carrier wavenumber must be positive and finite (k0={spec.k0})")
    if not spec.atoms:
        problems.append("system has no atoms")
    positions: list[float] = []
    for n, atom in enumerate(spec.atoms):
        name = atom.label or f"atom {n}"
        if not _finite(atom.detuning):
            problems.append(f"{name}: non-finite detuning")
        if not atom.coupling_points:
            problems.append(f"{name}: atom without coupling points")
            continue
        for j, p in enumerate(atom.coupling_points):
            if not _finite(p.position):
                problems.append(f"{name}: point {j} has non-finite position")
            if not _finite(p.strength):
                problems.append(f"{name}: point {j} has non-finite strength")
            elif p.strength < 0:
                problems.append(f"{name}: point {j} has negative strength {p.strength}")
        xs = [p.position for p in atom.coupling_points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            problems.append(f"{name}: coupling positions not strictly increasing")
        positions.extend(xs)
    finite_positions = sorted(x for x in positions if _finite(x))
    for a, b in zip(finite_positions, finite_positions[1:]):
        if a == b:
            problems.append(f"duplicate coupling position {a}")
    for d in spec.dipole_couplings:
        if d.i == d.l:
            problems.append(f"dipole coupling of atom {d.i} with itself")
        if not (0 <= d.i < spec.n_atoms and 0 <= d.l < spec.n_atoms):
            problems.append(f"dipole coupling ({d.i}, {d.l}) references a missing atom")
        if not _finite(d.strength):
            problems.append(f"dipole coupling ({d.i}, {d.l}) has non-finite strength")
    return problems


def require_valid(spec: SystemSpec) -> None:
    problems = validate(spec)
    if problems:
        raise InvalidSpecError(problems)


def order_points(spec: SystemSpec) -> OrderedPoints:
    """All coupling points sorted by position, with global indices."""
    require_valid(spec)
    raw = [
        (p.position, i, j, p.strength)
        for i, atom in enumerate(spec.atoms)
        for j, p in enumerate(atom.coupling_points)
    ]
    raw.sort()
    return tuple(
        OrderedPoint(index=n, atom=i, local=j, position=x, strength=s)
        for n, (x, i, j, s) in enumerate(raw)
    )


def phase_between(spec: SystemSpec, a, b, k: float | None = None) -> float:
    """Propagation phase between two coupling points.

    ``a`` and ``b`` are anything with a ``position`` attribute.  In Markov
    mode the phase is ``k0 * |dx|`` regardless of ``k``; in Exact mode it is
    ``k * |dx|`` (``k`` defaults to the carrier).
    """
    dx = abs(b.position - a.position)
    if spec.phase_mode is PhaseMode.MARKOV or k is None:
        return spec.k0 * dx
    return k * dx


def total_phase(spec: SystemSpec, k: float | None = None) -> float:
    """Phase accumulated from the first to the last coupling point."""
    pts = order_points(spec)
    return phase_between(spec, pts[0], pts[-1], k)


def small_atom(position: float, strength: float, detuning: float = 0.0,
               label: str = "") -> AtomSpec:
    return AtomSpec((CouplingPoint(position, strength),), detuning, label)


def giant_atom(positions: Iterable[float], strengths: Iterable[float] | float,
               detuning: float = 0.0, label: str = "") -> AtomSpec:
    positions = list(positions)
    if isinstance(strengths, (int, float)):
        strengths = [float(strengths)] * len(positions)
    points = [CouplingPoint(x, s) for x, s in zip(positions, strengths, strict=True)]
    return AtomSpec(tuple(points), detuning, label)
