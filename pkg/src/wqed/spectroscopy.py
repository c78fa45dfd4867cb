"""Inelastic power spectrum and photon flux of a driven model.

The elastic (coherent) part of the output is removed by working with the
fluctuation ``db = b_out - <b_out>``.  With ``C(tau) = <db^dag(tau) db(0)>``
obtained from the quantum regression theorem, the spectrum is

    S(omega) = (1/2pi) * 2 Re int_0^inf exp(-i omega tau) C(tau) dtau
             = (1/pi) Re Tr[db^dag (i omega - L)^{-1} (db rho_ss)]

normalised so that ``int S domega = C(0) = <db^dag db>``.  Building the
two-sided spectrum from ``2 Re`` of the one-sided transform is a chosen
convention; other normalisations differ by constant factors.  ``omega`` is
measured from the drive frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import expm

from .lindblad import (
    DrivenModel,
    SteadyState,
    build_setup_me,
    expectation,
    liouvillian,
    steady_state,
)
from .parallel import parallel_map
from .setups import SetupKind

DEFAULT_POINTS = 2001
DEFAULT_REACH = 1000.0


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumResult:
    omega: np.ndarray
    s: np.ndarray
    flux: float
    moment: float

    @property
    def residual(self) -> float:
        """``|F - <db^dag db>|``; small when the grid captures the spectrum."""
        return abs(self.flux - self.moment)


def fluctuation_operator(model: DrivenModel, state: SteadyState) -> np.ndarray:
    """``b_out - <b_out>``; the c-number input drops out of the fluctuation."""
    mean = expectation(state, model.output)
    return model.output - mean * np.eye(model.dim)


def inelastic_moment(model: DrivenModel, state: SteadyState) -> float:
    db = fluctuation_operator(model, state)
    return float(np.real(np.trace(db.conj().T @ db @ state.rho)))


def correlation(model: DrivenModel, state: SteadyState, db: np.ndarray,
                taus: Sequence[float], check: bool = True) -> np.ndarray:
    """``C(tau) = Tr[db^dag exp(L tau)(db rho)]`` on a sorted grid of ``tau >= 0``.

    Raises :class:`GridError` if ``check`` and ``|C(tau_max)| > 1e-3 |C(0)|``.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.size and (taus[0] < 0 or np.any(np.diff(taus) < 0)):
        raise GridError("tau grid must be sorted and non-negative")
    lv = liouvillian(model)
    d = model.dim
    x = (db @ state.rho).reshape(-1)
    left = db.reshape(-1)  # Tr(db^dag X) == vdot(db, X)
    out = np.empty(taus.size, dtype=complex)
    prev = 0.0
    for n, tau in enumerate(taus):
        if tau > prev:
            x = expm(lv * (tau - prev)) @ x
            prev = tau
        out[n] = np.vdot(left, x)
    if check and taus.size:
        c0 = abs(np.vdot(left, (db @ state.rho).reshape(-1)))
        if c0 > 1e-300 and abs(out[-1]) > 1e-3 * c0:
            raise GridError(f"correlation has not decayed by tau={taus[-1]!r}")
    return out


def rate_scale(model: DrivenModel) -> float:
    """Largest Liouvillian eigenvalue magnitude, a natural spectral width."""
    ev = np.linalg.eigvals(liouvillian(model))
    return max(float(np.max(np.abs(ev))), model.rate_scale, 1e-12)


def default_grid(model: DrivenModel, points: int = DEFAULT_POINTS,
                 reach: float = DEFAULT_REACH) -> np.ndarray:
    """Symmetric grid, dense near the drive and reaching ``reach * width``.

    Nodes are uniform in ``theta`` with ``omega = width * tan(theta)``, which
    resolves features far narrower than ``width`` at the centre while the
    Lorentzian tails are followed out to where they carry a negligible share
    of the flux.
    """
    width = rate_scale(model)
    theta = np.linspace(-math.atan(reach), math.atan(reach), points)
    grid = width * np.tan(theta)
    if points % 2:
        grid[points // 2] = 0.0
    return grid


def resolvent_spectrum(model: DrivenModel, state: SteadyState, db: np.ndarray,
                       omega: np.ndarray) -> np.ndarray:
    d = model.dim
    lv = liouvillian(model)
    x = (db @ state.rho).reshape(-1)
    # L - |rho><1| is invertible and equals L on traceless inputs
    shifted = -lv + np.outer(state.rho.reshape(-1), np.eye(d).reshape(-1))
    eye = np.eye(d * d)
    mats = 1j * omega[:, None, None] * eye[None] + shifted[None]
    y = np.linalg.solve(mats, np.broadcast_to(x, (omega.size, d * d))[..., None])[..., 0]
    return np.real(y @ db.reshape(-1).conj()) / math.pi


def spectrum(model: DrivenModel, state: SteadyState | None = None,
             omega: Sequence[float] | None = None, check: bool = True) -> SpectrumResult:
    """Inelastic spectrum and its integral ``F`` (trapezoid over ``omega``)."""
    if state is None:
        state = steady_state(model)
    omega = default_grid(model) if omega is None else np.asarray(omega, dtype=float)
    if omega.size < 2 or np.any(np.diff(omega) <= 0):
        raise GridError("frequency grid must be strictly increasing with >= 2 points")
    db = fluctuation_operator(model, state)
    s = resolvent_spectrum(model, state, db, omega)
    moment = inelastic_moment(model, state)
    peak = float(np.max(np.abs(s)))
    if check and peak > 0 and max(abs(s[0]), abs(s[-1])) > 1e-3 * peak:
        raise GridError("frequency grid too narrow: spectrum not negligible at the edges")
    return SpectrumResult(omega, s, float(trapezoid(s, omega)), moment)


def flux_sweep(kind: SetupKind | str, params, power: float | None,
               grid: Sequence[float]) -> list[tuple[float, float]]:
    """Inelastic flux ``F`` at each drive detuning of ``grid``."""

    def one(delta_p: float) -> tuple[float, float]:
        try:
            model = build_setup_me(kind, params, delta_p, power)
            return float(delta_p), spectrum(model).flux
        except Exception as exc:
            raise RuntimeError(f"flux failed at delta_p={delta_p!r}: {exc}") from exc

    return parallel_map(one, [float(x) for x in grid])
