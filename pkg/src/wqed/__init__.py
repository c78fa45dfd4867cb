"""Waveguide QED with small and giant atoms: single-photon scattering,
driven master equations, inelastic spectra and EIT/ATS pole analysis."""

from .model import (
    DEFAULT_K0,
    AtomSpec,
    CouplingPoint,
    DipoleCoupling,
    InvalidSpecError,
    PhaseMode,
    SystemSpec,
    giant_atom,
    order_points,
    phase_between,
    small_atom,
    total_phase,
    validate,
)
from .scattering import ScatteringSolution, SingularSystemError, solve, sweep, transmission
from .setups import (
    Regime,
    SetupKind,
    analytic_t,
    default_params,
    denominator,
    eit_frequency,
    make_params,
    make_spec,
    poles,
)
from .lindblad import build_array_me, build_lambda_me, build_setup_me, steady_state
from .spectroscopy import spectrum

__version__ = "0.1.0"
