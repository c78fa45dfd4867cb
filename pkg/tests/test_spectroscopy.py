import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from wqed import setups, spectroscopy
from wqed.lindblad import build_array_me, build_setup_me, expectation, steady_state
from wqed.model import SystemSpec, small_atom
from wqed.setups import SetupKind
from wqed.spectroscopy import (
    GridError,
    correlation,
    default_grid,
    flux_sweep,
    fluctuation_operator,
    inelastic_moment,
    spectrum,
)


def two_level(power, delta=0.0, gamma=1.0):
    return build_array_me(SystemSpec([small_atom(0.0, gamma)]), delta, power=power)


def test_undriven_is_silent():
    model = two_level(0.0)
    res = spectrum(model, omega=np.linspace(-10, 10, 101))
    assert np.all(res.s == 0) or np.max(np.abs(res.s)) < 1e-15
    assert res.moment == 0 or abs(res.moment) < 1e-15
    st_ = steady_state(model)
    assert np.allclose(correlation(model, st_, fluctuation_operator(model, st_), [0, 1, 2]), 0)


def test_correlation_at_zero_is_moment():
    model = two_level(0.5, delta=0.3)
    st_ = steady_state(model)
    db = fluctuation_operator(model, st_)
    c = correlation(model, st_, db, [0.0], check=False)
    assert c[0].real == pytest.approx(inelastic_moment(model, st_), rel=1e-12)


def test_weak_drive_correlation_shape():
    # weak resonant drive: C(tau)/C(0) -> (1 + g tau/2) exp(-g tau/2)
    gamma = 1.0
    model = two_level(1e-5, gamma=gamma)
    st_ = steady_state(model)
    taus = np.linspace(0, 30, 31)
    c = correlation(model, st_, fluctuation_operator(model, st_), taus, check=False)
    expected = (1 + gamma * taus / 2) * np.exp(-gamma * taus / 2)
    assert np.max(np.abs(c / c[0] - expected)) < 1e-4


def test_resolvent_matches_time_domain_oracle():
    model = two_level(0.8, delta=0.4)
    st_ = steady_state(model)
    db = fluctuation_operator(model, st_)
    dt = 0.01
    taus = np.arange(0, 60 + dt / 2, dt)
    c = correlation(model, st_, db, taus)
    omega = np.array([-2.0, -0.7, 0.0, 0.3, 1.5])
    oracle = [trapezoid(np.exp(-1j * w * taus) * c, taus).real / math.pi for w in omega]
    res = spectrum(model, st_, omega=np.concatenate([[-1e4], omega, [1e4]]), check=False)
    assert np.allclose(res.s[1:-1], oracle, rtol=0, atol=2e-5 * max(np.abs(oracle)))


def test_correlation_grid_check():
    model = two_level(0.8)
    st_ = steady_state(model)
    with pytest.raises(GridError):
        correlation(model, st_, fluctuation_operator(model, st_), [0.0, 1.0])
    with pytest.raises(GridError):
        correlation(model, st_, fluctuation_operator(model, st_), [1.0, 0.0])


def test_mollow_triplet():
    gamma, power = 1.0, 10.0
    model = two_level(power, gamma=gamma)
    assert inelastic_moment(model, steady_state(model)) > 0
    omega = np.linspace(-15, 15, 3001)
    res = spectrum(model, omega=omega, check=False)
    peaks, _ = find_peaks(res.s)
    rabi = math.sqrt(2 * gamma * power)
    side = sorted(abs(omega[peaks]))
    assert side[0] == pytest.approx(0.0, abs=1e-9)
    assert side[-1] == pytest.approx(rabi, rel=0.03)


@pytest.mark.parametrize("kind, delta_p", [
    (SetupKind.LAMBDA, 0.3), (SetupKind.SS, 0.2), (SetupKind.SMSM, 0.4),
    (SetupKind.GS, -0.3), (SetupKind.GG, 0.5),
])
def test_flux_identity_and_positivity(kind, delta_p):
    params = setups.default_params(kind)
    res = spectrum(build_setup_me(kind, params, delta_p))
    assert res.moment > 0
    assert res.residual / res.moment < 1e-2
    assert np.min(res.s) > -1e-10 * np.max(res.s)


def test_elastic_part_excluded():
    model = two_level(0.5)
    st_ = steady_state(model)
    res = spectrum(model, st_)
    total = float(np.real(expectation(st_, model.output.conj().T @ model.output)))
    coherent = abs(expectation(st_, model.output)) ** 2
    assert res.moment == pytest.approx(total - coherent, rel=1e-10)
    assert res.flux < total


def test_narrow_grid_rejected():
    model = two_level(0.5)
    with pytest.raises(GridError):
        spectrum(model, omega=np.linspace(-0.5, 0.5, 11))
    with pytest.raises(GridError):
        spectrum(model, omega=[0.0, 0.0, 1.0])


def test_default_grid_shape():
    grid = default_grid(two_level(0.5), points=11)
    assert grid[5] == 0.0
    assert np.all(np.diff(grid) > 0)
    assert np.allclose(grid, -grid[::-1])


def _sweep(kind, n=41):
    params = setups.default_params(kind)
    from wqed.figures import detuning_grid

    lo, hi, _ = {SetupKind.GG: (-5.0, 3.0, 0)}.get(kind, (-2.0, 2.0, 0))
    grid = np.union1d(detuning_grid(kind, params, (lo, hi, n)),
                      [setups.eit_frequency(kind, params)])
    return dict(flux_sweep(kind, params, None, grid)), params


@pytest.mark.parametrize("kind, quenched", [
    (SetupKind.LAMBDA, True), (SetupKind.SMSM, True), (SetupKind.GG, True),
    (SetupKind.SS, False), (SetupKind.GS, False),
])
def test_quench_at_transparency(kind, quenched):
    flux, params = _sweep(kind)
    at = flux[setups.eit_frequency(kind, params)]
    ratio = at / max(flux.values())
    if quenched:
        assert ratio < 1e-6
    else:
        assert ratio > 0.05


def test_flux_sweep_tags_errors():
    with pytest.raises(RuntimeError, match="delta_p"):
        flux_sweep(SetupKind.SS, setups.SSParams(), -1.0, [0.0])
