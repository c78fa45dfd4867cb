"""Coherently driven master equations, steady states and transmission.

Two model families share one representation:

* arrays of small/giant two-level atoms on a waveguide, driven through the
  waveguide with a coherent state of ``|alpha|^2`` photons per unit time, in
  the frame rotating at the drive frequency and with frozen (Markov) phases;
* the three-level Lambda atom with probe and control fields.

Superoperators act on row-major vectorised density matrices, so
``vec(A @ X @ B) = kron(A, B.T) @ vec(X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import PhaseMode, SystemSpec, order_points, phase_between
from .setups import LambdaParams, SetupKind, drive_power, make_spec

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|, basis (g, e)


class DegenerateSteadyStateError(np.linalg.LinAlgError):
    def __init__(self, null_dim: int):
        self.null_dim = null_dim
        super().__init__(f"Liouvillian null space has dimension {null_dim}; "
                         "steady state is not unique")


class NonPhysicalModelError(ValueError):
    pass


@dataclass(frozen=True)
class DrivenModel:
    """Hamiltonian, jump channels and output field of a driven open system.

    ``jumps`` holds the collapse operators already scaled by the square root
    of their rates.  The output field is ``b_out = input_amplitude + output``
    where ``output`` is an operator and ``input_amplitude`` the propagated
    coherent drive.
    """

    hamiltonian: np.ndarray
    jumps: tuple[np.ndarray, ...]
    output: np.ndarray
    input_amplitude: complex
    alpha: complex
    lowering: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    rate_scale: float = 1.0
    rate_matrix: np.ndarray | None = field(default=None, compare=False)
    exchange: np.ndarray | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class SteadyState:
    rho: np.ndarray
    residual: float
    purity: float
    regularized: bool = False


def lowering_operators(n_atoms: int) -> tuple[np.ndarray, ...]:
    """sigma_i^- on the tensor product space, atom 0 most significant."""
    eye = np.eye(2, dtype=complex)
    ops = []
    for i in range(n_atoms):
        op = np.array([[1.0 + 0j]])
        for j in range(n_atoms):
            op = np.kron(op, SIGMA_MINUS if i == j else eye)
        ops.append(op)
    return tuple(ops)


def _basis_labels(n_atoms: int) -> tuple[str, ...]:
    return tuple(
        "".join("ge"[(idx >> (n_atoms - 1 - i)) & 1] for i in range(n_atoms))
        for idx in range(2 ** n_atoms)
    )


def collective_rates(spec: SystemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Collective decay and coherent exchange matrices between atoms.

    ``G[i, l] = sum_jk sqrt(g_ij g_lk) cos(phi)`` and
    ``J[i, l] = sum_jk sqrt(g_ij g_lk)/2 sin(phi)``; the diagonal of ``J`` is the
    Lamb shift of each atom from its own pairs of points.
    """
    pts = order_points(spec)
    n = spec.n_atoms
    big_g = np.zeros((n, n))
    j = np.zeros((n, n))
    for a in pts:
        for b in pts:
            w = math.sqrt(a.strength * b.strength)
            if w == 0:
                continue
            phi = phase_between(spec, a, b)
            big_g[a.atom, b.atom] += w * math.cos(phi)
            j[a.atom, b.atom] += 0.5 * w * math.sin(phi)
    return big_g, j


def _jumps_from_rates(rates: np.ndarray, lowering, scale: float):
    vals, vecs = np.linalg.eigh(rates)
    tol = 1e-12 * max(scale, float(np.max(np.abs(vals), initial=0.0)))
    if vals.size and vals.min() < -tol:
        raise NonPhysicalModelError(
            f"collective rate matrix is not positive semidefinite (min eigenvalue {vals.min():.3g})")
    jumps = []
    for lam, v in zip(vals, vecs.T):
        if lam > tol:
            jumps.append(math.sqrt(lam) * sum(c * op for c, op in zip(v, lowering)))
    return tuple(jumps)


def build_array_me(spec: SystemSpec, delta_p: float, power: float | None = None,
                   alpha: complex | None = None) -> DrivenModel:
    """Master equation for an atom array driven at ``omega_d = k0 + delta_p``.

    Give the drive either as ``power = |alpha|^2`` (real positive amplitude)
    or as a complex ``alpha``.
    """
    if spec.phase_mode is not PhaseMode.MARKOV:
        raise ValueError("the master equation requires Markov (frozen) phases")
    if alpha is None:
        if power is None or power < 0:
            raise ValueError("drive power must be given and non-negative")
        alpha = math.sqrt(power)
    alpha = complex(alpha)
    pts = order_points(spec)
    n = spec.n_atoms
    sm = lowering_operators(n)
    sp = tuple(op.conj().T for op in sm)
    rates, exch = collective_rates(spec)

    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for i, atom in enumerate(spec.atoms):
        h += (atom.detuning - delta_p) * (sp[i] @ sm[i])
    for i in range(n):
        for l in range(n):
            h += exch[i, l] * (sp[i] @ sm[l])
    for d in spec.dipole_couplings:
        h += d.strength * (sp[d.i] @ sm[d.l] + sp[d.l] @ sm[d.i])
    first, last = pts[0], pts[-1]
    output = np.zeros_like(h)
    for p in pts:
        if p.strength == 0:
            continue
        c = math.sqrt(p.strength / 2)
        drive = alpha * np.exp(1j * phase_between(spec, first, p))
        term = drive * c * sp[p.atom]
        h += -1j * (term - term.conj().T)
        output += np.exp(1j * phase_between(spec, p, last)) * c * sm[p.atom]

    scale = max(float(np.max(np.abs(rates), initial=0.0)), 1e-300)
    return DrivenModel(
        hamiltonian=h,
        jumps=_jumps_from_rates(rates, sm, scale),
        output=output,
        input_amplitude=alpha * np.exp(1j * phase_between(spec, first, last)),
        alpha=alpha,
        lowering=sm,
        labels=_basis_labels(n),
        rate_scale=max(p.strength for p in pts) if any(p.strength for p in pts) else 1.0,
        rate_matrix=rates,
        exchange=exch,
    )


def probe_rabi(power: float, gamma_20: float) -> float:
    """Probe Rabi frequency produced by ``|alpha|^2 = power`` on the 0-2 line."""
    return math.sqrt(2 * gamma_20 * power)


def build_lambda_me(params: LambdaParams, delta_p: float,
                    omega_p: float | None = None) -> DrivenModel:
    """Lambda atom with probe detuning ``delta_p = omega_p - omega_2``.

    Basis ``(|0>, |1>, |2>)``; the probe drives 0-2, the control 1-2.  The
    probe is regarded as a waveguide input ``b_in = Omega_p / sqrt(2 Gamma_20)``
    so that ``t = <b_out> / b_in`` with ``b_out = b_in + sqrt(Gamma_20/2) s_02``.
    """
    p = params
    omega_p = p.omega_p if omega_p is None else omega_p
    ket = np.eye(3, dtype=complex)
    s = lambda i, j: np.outer(ket[i], ket[j])
    h = (-delta_p * s(2, 2) + (-delta_p - p.delta_c) * s(1, 1)
         + 0.5j * omega_p * (s(0, 2) - s(2, 0))
         + 0.5j * p.omega_c * (s(1, 2) - s(2, 1)))
    jumps = []
    if p.gamma_20 > 0:
        jumps.append(math.sqrt(p.gamma_20) * s(0, 2))
    if p.gamma_21 > 0:
        jumps.append(math.sqrt(p.gamma_21) * s(1, 2))
    if p.gamma_2phi > 0:
        jumps.append(math.sqrt(2 * p.gamma_2phi) * s(2, 2))
    if p.gamma_1phi > 0:
        jumps.append(math.sqrt(2 * p.gamma_1phi) * s(1, 1))
    if p.gamma_20 <= 0:
        raise ValueError("gamma_20 must be positive to define a transmission")
    b_in = omega_p / math.sqrt(2 * p.gamma_20)
    return DrivenModel(
        hamiltonian=h,
        jumps=tuple(jumps),
        output=math.sqrt(p.gamma_20 / 2) * s(0, 2),
        input_amplitude=complex(b_in),
        alpha=complex(b_in),
        lowering=(s(0, 2), s(1, 2)),
        labels=("0", "1", "2"),
        rate_scale=p.gamma_20,
    )


def build_setup_me(kind: SetupKind | str, params, delta_p: float,
                   power: float | None = None) -> DrivenModel:
    """Driven model of a named setup; ``power`` defaults to the reference one."""
    kind = SetupKind.parse(kind)
    if power is None:
        power = drive_power(kind, params)
    if kind is SetupKind.LAMBDA:
        return build_lambda_me(params, delta_p, probe_rabi(power, params.gamma_20))
    return build_array_me(make_spec(kind, params), delta_p, power=power)


def liouvillian(model: DrivenModel) -> np.ndarray:
    h = model.hamiltonian
    eye = np.eye(model.dim)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in model.jumps:
        cdc = c.conj().T @ c
        lv += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return lv


def apply_liouvillian(model: DrivenModel, rho: np.ndarray) -> np.ndarray:
    """``L(rho)`` evaluated directly on a matrix (independent of vectorisation)."""
    h = model.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for c in model.jumps:
        cd = c.conj().T
        out += c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c)
    return out


def _regularized(model: DrivenModel, rate: float) -> DrivenModel:
    extra = tuple(math.sqrt(rate) * op for op in model.lowering)
    return DrivenModel(model.hamiltonian, model.jumps + extra, model.output,
                       model.input_amplitude, model.alpha, model.lowering,
                       model.labels, model.rate_scale, model.rate_matrix, model.exchange)


def null_space_dimension(lv: np.ndarray, rtol: float = 1e-11) -> int:
    sv = np.linalg.svd(lv, compute_uv=False)
    return int(np.sum(sv <= rtol * sv[0])) if sv[0] > 0 else lv.shape[0]


def steady_state(model: DrivenModel, regularize: bool = False) -> SteadyState:
    """Unique fixed point of the Liouvillian, normalised to unit trace.

    A degenerate null space raises :class:`DegenerateSteadyStateError` unless
    ``regularize`` is set, in which case every lowering operator gets an extra
    decay of ``1e-9 * rate_scale`` and the result is flagged.
    """
    lv = liouvillian(model)
    flagged = False
    if null_space_dimension(lv) > 1:
        if not regularize:
            raise DegenerateSteadyStateError(null_space_dimension(lv))
        model = _regularized(model, 1e-9 * model.rate_scale)
        lv = liouvillian(model)
        flagged = True
    d = model.dim
    a = lv.copy()
    a[0, :] = np.eye(d).reshape(-1)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    rho = np.linalg.solve(a, rhs).reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(apply_liouvillian(model, rho)))
    purity = float(np.real(np.trace(rho @ rho)))
    return SteadyState(rho, residual, purity, flagged)


def expectation(state: SteadyState, op: np.ndarray) -> complex:
    return complex(np.trace(op @ state.rho))


def output_amplitude(model: DrivenModel, state: SteadyState) -> complex:
    return model.input_amplitude + expectation(state, model.output)


def transmission(model: DrivenModel, state: SteadyState | None = None) -> complex:
    """Coherent transmission ``<b_out> / alpha``."""
    if model.alpha == 0:
        raise ValueError("transmission undefined without a drive (alpha = 0)")
    if state is None:
        state = steady_state(model)
    return output_amplitude(model, state) / model.alpha


def state_vector(label: str, dim: int) -> np.ndarray:
    """Basis or dressed state by label.

    Two atoms (dim 4): ``gg, eg, ge, ee`` and the dressed ``S``, ``A`` built
    from ``(sigma_1^+ +- sigma_2^+)/sqrt(2) |gg>``.  Lambda (dim 3): ``0, 1, 2``.
    """
    if dim == 3 and label in ("0", "1", "2"):
        return np.eye(3, dtype=complex)[int(label)]
    if dim == 4:
        basis = dict(zip(_basis_labels(2), np.eye(4, dtype=complex)))
        if label in basis:
            return basis[label]
        if label in ("S", "A"):
            sign = 1 if label == "S" else -1
            return (basis["eg"] + sign * basis["ge"]) / math.sqrt(2)
    raise ValueError(f"label {label!r} not defined for Hilbert dimension {dim}")


def population(state: SteadyState, label: str) -> float:
    v = state_vector(label, state.rho.shape[0])
    return float(np.real(v.conj() @ state.rho @ v))


def dark_state_defect(model: DrivenModel, state: SteadyState) -> list[float]:
    """``||c rho||`` for every jump channel; all vanish for a dark steady state."""
    return [float(np.linalg.norm(c @ state.rho)) for c in model.jumps]
