"""Tables behind the reference transmission/flux and |ee> population curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lindblad, scattering, setups, spectroscopy
from .parallel import parallel_map
from .setups import SetupKind

TARGETS = ("fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig3c")

FIG2_KINDS = {
    "fig2a": SetupKind.LAMBDA,
    "fig2b": SetupKind.SS,
    "fig2c": SetupKind.SMSM,
    "fig2d": SetupKind.GS,
    "fig2e": SetupKind.GG,
}

# detuning windows in units of the setup's reference rate; the EIT
# frequency of each setup falls exactly on a grid node
FIG2_WINDOWS = {
    SetupKind.LAMBDA: (-2.0, 2.0, 401),
    SetupKind.SS: (-2.0, 2.0, 401),
    SetupKind.SMSM: (-2.0, 2.0, 401),
    SetupKind.GS: (-2.0, 2.0, 401),
    SetupKind.GG: (-5.0, 3.0, 401),
}


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: list[tuple[float, ...]]

    def column(self, name: str) -> np.ndarray:
        return np.array([r[self.header.index(name)] for r in self.rows])


def detuning_grid(kind: SetupKind, params, window=None) -> np.ndarray:
    lo, hi, n = window or FIG2_WINDOWS[kind]
    return np.linspace(lo, hi, n) * params.scale


def transmission_curve(kind: SetupKind | str, params, grid) -> np.ndarray:
    """Single-photon transmission: closed form for Lambda, solver otherwise."""
    kind = SetupKind.parse(kind)
    if kind is SetupKind.LAMBDA:
        return np.asarray(setups.analytic_t(kind, params, grid))
    return scattering.transmission(setups.make_spec(kind, params), grid)


def fig2_table(kind: SetupKind | str, params=None, grid=None,
               power: float | None = None) -> Table:
    kind = SetupKind.parse(kind)
    params = params or setups.default_params(kind)
    grid = detuning_grid(kind, params) if grid is None else np.asarray(grid, dtype=float)
    t = transmission_curve(kind, params, grid)
    flux = [f for _, f in spectroscopy.flux_sweep(kind, params, power, grid)]
    rows = [
        (float(x), float(abs(tt)), float(tt.real), float(tt.imag), float(f))
        for x, tt, f in zip(grid, t, flux)
    ]
    return Table(("delta_p", "abs_t", "re_t", "im_t", "flux"), rows)


def ee_population(kind: SetupKind | str, params, grid, power: float) -> np.ndarray:
    def one(x: float) -> float:
        model = lindblad.build_setup_me(kind, params, x, power)
        return lindblad.population(lindblad.steady_state(model), "ee")

    return np.array(parallel_map(one, [float(x) for x in grid]))


def fig3c_table(grid=None) -> Table:
    grid = np.linspace(-2.0, 2.0, 401) if grid is None else np.asarray(grid, dtype=float)
    ss_sep = ee_population(SetupKind.SMSM, setups.SmSmParams(), grid, 1 / 5)
    ss_dip = ee_population(SetupKind.SS, setups.SSParams(), grid, 1 / 10)
    rows = [(float(x), float(a), float(b)) for x, a, b in zip(grid, ss_sep, ss_dip)]
    return Table(("delta_p", "p_ee_s-s", "p_ee_ss"), rows)


def reproduce(target: str) -> Table:
    if target in FIG2_KINDS:
        return fig2_table(FIG2_KINDS[target])
    if target == "fig3c":
        return fig3c_table()
    raise ValueError(f"unknown reproduce target {target!r}; choose from {TARGETS}")
