"""The five named configurations: presets, closed-form transmission, poles.

Detuning convention: ``delta_p`` is always photon frequency minus reference
atom frequency (``k - omega_0`` on the waveguide, ``omega_p - omega_2`` for the
Lambda atom).  With this sign every transmission pole lies in the lower half
plane.

Each ``t = 1 - numerator / denominator`` below is a ratio of polynomials in
``delta_p``; ``poles`` returns the two roots of the denominator together with
the EIT/ATS regime read off from the sign of the discriminant.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, fields

import numpy as np

from .model import (
    DEFAULT_K0,
    AtomSpec,
    CouplingPoint,
    DipoleCoupling,
    SystemSpec,
    giant_atom,
    small_atom,
)

BOUNDARY_TOL = 1e-9
UNDERFLOW_TOL = 1e-30


class SetupKind(str, enum.Enum):
    LAMBDA = "lambda"
    SS = "ss"
    SMSM = "s-s"
    GS = "gs"
    GG = "gg"

    @classmethod
    def parse(cls, name: "str | SetupKind") -> "SetupKind":
        if isinstance(name, SetupKind):
            return name
        key = name.strip().lower()
        aliases = {"smsm": "s-s", "s_s": "s-s", "sm-sm": "s-s", "l": "lambda"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown setup {name!r}") from None


class Regime(str, enum.Enum):
    EIT = "EIT"
    ATS = "ATS"
    BOUNDARY = "Boundary"


class DenominatorUnderflowError(ZeroDivisionError):
    pass


class _Params:
    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite")
            if f.name in self._rates and v < 0:
                raise ValueError(f"{f.name} must be non-negative (got {v})")

    _rates: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class LambdaParams(_Params):
    gamma_20: float = 1.0
    gamma_21: float = 0.0
    omega_c: float = 0.25
    omega_p: float = 0.01
    delta_c: float = 0.0
    gamma_2phi: float = 0.0
    gamma_1phi: float = 0.0

    _rates = ("gamma_20", "gamma_21", "omega_c", "omega_p", "gamma_2phi", "gamma_1phi")

    @property
    def gamma_2(self) -> float:
        return (self.gamma_21 + self.gamma_20) / 2

    @property
    def scale(self) -> float:
        return self.gamma_20


@dataclass(frozen=True)
class SSParams(_Params):
    gamma: float = 1.0
    g: float = 0.125

    _rates = ("gamma", "g")

    @property
    def scale(self) -> float:
        return self.gamma


@dataclass(frozen=True)
class SmSmParams(_Params):
    gamma: float = 1.0
    delta: float = 0.5

    _rates = ("gamma", "delta")

    @property
    def scale(self) -> float:
        return self.gamma


@dataclass(frozen=True)
class GsParams(_Params):
    gamma_s: float = 1.0
    gamma_g: float = 1 / 64

    _rates = ("gamma_s", "gamma_g")

    @property
    def scale(self) -> float:
        return self.gamma_s


@dataclass(frozen=True)
class GGParams(_Params):
    gamma: float = 1.0
    delta: float = 2.0

    _rates = ("gamma", "delta")

    @property
    def scale(self) -> float:
        return self.gamma


PARAM_TYPES = {
    SetupKind.LAMBDA: LambdaParams,
    SetupKind.SS: SSParams,
    SetupKind.SMSM: SmSmParams,
    SetupKind.GS: GsParams,
    SetupKind.GG: GGParams,
}


def default_params(kind: SetupKind | str):
    """Reference parameters of the transmission/flux curves."""
    return PARAM_TYPES[SetupKind.parse(kind)]()


def make_params(kind: SetupKind | str, **values: float):
    kind = SetupKind.parse(kind)
    cls = PARAM_TYPES[kind]
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"parameters {sorted(unknown)} not valid for setup {kind.value!r}")
    return cls(**{k: float(v) for k, v in values.items()})


def drive_power(kind: SetupKind | str, params) -> float:
    """|alpha|^2 used for the inelastic flux of each reference curve."""
    kind = SetupKind.parse(kind)
    return {
        SetupKind.LAMBDA: lambda p: p.gamma_20 / 10,
        SetupKind.SS: lambda p: p.gamma / 10,
        SetupKind.SMSM: lambda p: p.gamma / 5,
        SetupKind.GS: lambda p: p.gamma_s / 10,
        SetupKind.GG: lambda p: 4 * p.gamma / 5,
    }[kind](params)


def make_spec(kind: SetupKind | str, params, k0: float = DEFAULT_K0) -> SystemSpec:
    """Waveguide geometry of a two-atom preset (Markov phases).

    The Lambda atom has no waveguide geometry and is rejected; see
    :func:`wqed.lindblad.build_lambda_me`.
    """
    kind = SetupKind.parse(kind)
    lam = 2 * math.pi / k0
    if kind is SetupKind.LAMBDA:
        raise ValueError("the Lambda system has no waveguide geometry")
    if kind is SetupKind.SS:
        # The detached atom keeps a formal zero-strength point to the right.
        atoms = [
            small_atom(0.0, params.gamma, label="bright"),
            AtomSpec((CouplingPoint(lam / 4, 0.0),), label="detached"),
        ]
        return SystemSpec(atoms, [DipoleCoupling(0, 1, params.g)], k0)
    if kind is SetupKind.SMSM:
        atoms = [
            small_atom(0.0, params.gamma, label="atom1"),
            small_atom(lam, params.gamma, detuning=-params.delta, label="atom2"),
        ]
        return SystemSpec(atoms, (), k0)
    if kind is SetupKind.GS:
        atoms = [
            giant_atom([0.0, lam / 2], params.gamma_g, label="giant"),
            small_atom(lam / 4, params.gamma_s, label="small"),
        ]
        return SystemSpec(atoms, (), k0)
    atoms = [
        giant_atom([0.0, lam], params.gamma, label="giant1"),
        giant_atom([lam / 2, 3 * lam / 2], params.gamma, detuning=-params.delta,
                   label="giant2"),
    ]
    return SystemSpec(atoms, (), k0)


def _num_den(kind: SetupKind, p, z):
    if kind is SetupKind.LAMBDA:
        if p.delta_c != 0 or p.gamma_1phi != 0 or p.gamma_2phi != 0:
            raise ValueError("closed-form Lambda transmission assumes delta_c = 0 "
                             "and no pure dephasing")
        return 2 * p.gamma_20 * z, 4 * (p.gamma_2 - 1j * z) * z + 1j * p.omega_c ** 2
    if kind is SetupKind.SS:
        return p.gamma * z, (p.gamma - 2j * z) * z + 2j * p.g ** 2
    if kind is SetupKind.SMSM:
        zp = z + p.delta / 2
        return 4 * p.gamma * zp, 4 * (p.gamma - 1j * zp) * zp + 1j * p.delta ** 2
    if kind is SetupKind.GS:
        return (p.gamma_s * z,
                (p.gamma_s - 2j * z) * z + 2j * p.gamma_s * p.gamma_g)
    zp = z + p.delta / 2
    return 16 * p.gamma * zp, 4 * (4 * p.gamma - 1j * zp) * zp + 1j * p.delta ** 2


def denominator(kind: SetupKind | str, params, z):
    """Denominator polynomial of the closed-form transmission at complex ``z``."""
    return _num_den(SetupKind.parse(kind), params, np.asarray(z, dtype=complex))[1]


def analytic_t(kind: SetupKind | str, params, delta_p):
    """Closed-form single-photon transmission; accepts scalars or arrays."""
    kind = SetupKind.parse(kind)
    z = np.asarray(delta_p, dtype=float)
    num, den = _num_den(kind, params, z.astype(complex))
    if np.any(np.abs(den) <= UNDERFLOW_TOL * params.scale ** 2):
        raise DenominatorUnderflowError(
            f"transmission denominator vanishes for setup {kind.value!r}")
    t = 1 - num / den
    return complex(t) if t.ndim == 0 else t


@dataclass(frozen=True)
class PoleReport:
    poles: tuple[complex, complex]
    shift: float
    regime: Regime
    threshold: str
    value: float
    critical: float

    @property
    def z_plus(self) -> complex:
        return self.poles[0]

    @property
    def z_minus(self) -> complex:
        return self.poles[1]


def _classify(disc: float, scale: float) -> Regime:
    if abs(disc) <= BOUNDARY_TOL * scale ** 2:
        return Regime.BOUNDARY
    return Regime.EIT if disc > 0 else Regime.ATS


def _sqrt(x: float) -> complex:
    # principal branch: positive imaginary part for x < 0
    return cmath.sqrt(complex(x, 0.0))


def poles(kind: SetupKind | str, params) -> PoleReport:
    """Both transmission poles and the EIT/ATS classification.

    All five cases have the shape ``Z = shift - (i/2) (a +- sqrt(disc))``;
    ``disc > 0`` gives two purely imaginary offsets (EIT), ``disc < 0`` two
    distinct real parts (ATS).  ``Z_+`` is the faster-decaying pole.
    """
    kind = SetupKind.parse(kind)
    p = params
    if kind is SetupKind.LAMBDA:
        a, disc, shift = p.gamma_2, p.gamma_2 ** 2 - p.omega_c ** 2, 0.0
        name, value, crit = "omega_c", p.omega_c, p.gamma_2
        norm = 1.0
    elif kind is SetupKind.SS:
        a, disc, shift = p.gamma, p.gamma ** 2 - 16 * p.g ** 2, 0.0
        name, value, crit = "g", p.g, p.gamma / 4
        norm = 0.5
    elif kind is SetupKind.SMSM:
        a, disc, shift = p.gamma, p.gamma ** 2 - p.delta ** 2, -p.delta / 2
        name, value, crit = "delta", p.delta, p.gamma
        norm = 1.0
    elif kind is SetupKind.GS:
        a, disc, shift = p.gamma_s, p.gamma_s ** 2 - 16 * p.gamma_g * p.gamma_s, 0.0
        name, value, crit = "gamma_g", p.gamma_g, p.gamma_s / 16
        norm = 0.5
    else:
        a, disc, shift = 4 * p.gamma, 16 * p.gamma ** 2 - p.delta ** 2, -p.delta / 2
        name, value, crit = "delta", p.delta, 4 * p.gamma
        norm = 1.0
    # norm * (i) * (...): ss/Gs carry a 1/4 prefactor, the others 1/2
    root = _sqrt(disc)
    z_plus = shift - 0.5j * norm * (a + root)
    z_minus = shift - 0.5j * norm * (a - root)
    return PoleReport(
        poles=(complex(z_plus), complex(z_minus)),
        shift=shift,
        regime=_classify(disc, a),
        threshold=name,
        value=value,
        critical=crit,
    )


def eit_frequency(kind: SetupKind | str, params) -> float:
    """Detuning of the transparency peak; only meaningful outside ATS."""
    report = poles(kind, params)
    if report.regime is Regime.ATS:
        raise ValueError(f"setup {SetupKind.parse(kind).value!r} is in the ATS regime; "
                         "no single EIT peak")
    return report.shift


def reference_rate(kind: SetupKind | str, params) -> float:
    return params.scale
