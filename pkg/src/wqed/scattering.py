"""Exact single-photon scattering off small and giant atoms.

For every coupling point n (owned by atom i) the photon amplitudes obey two
jump conditions, and every atom obeys one energy balance.  With the rescaled
atomic amplitude ``u_i = sqrt(pi) * e_i`` the rows read

    sqrt(g_n) u_i - i exp(+i th_n) (t_n - t_{n-1}) = 0
    sqrt(g_n) u_i - i exp(-i th_n) (r_n - r_{n+1}) = 0
    (k - w_i) u_i - sum_n sqrt(g_n)/4 [exp(+i th_n)(t_{n-1} + t_n)
                                      + exp(-i th_n)(r_n + r_{n+1})]
                  - sum_l g_il u_l = 0

with ``t_0 = 1`` and ``r_{N'+1} = 0`` moved to the right-hand side.  The
energy row is kept in cleared-denominator form so that ``k = w_i`` is not a
singular point.  Zero-strength points scatter nothing (``t_n = t_{n-1}``,
``r_n = r_{n+1}``) and are eliminated before assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import OrderedPoint, PhaseMode, SystemSpec, order_points
from .parallel import parallel_map


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, delta_p: float, condition: float):
        self.delta_p = delta_p
        self.condition = condition
        super().__init__(
            f"scattering system singular at delta_p={delta_p!r} "
            f"(condition estimate {condition:.3g})"
        )


class SweepError(RuntimeError):
    def __init__(self, delta_p: float, cause: Exception):
        self.delta_p = delta_p
        super().__init__(f"sweep failed at delta_p={delta_p!r}: {cause}")


@dataclass(frozen=True)
class ScatteringSystem:
    """Dense linear system ``matrix @ x = rhs``.

    Unknowns are ordered ``[t_1..t_M, r_1..r_M, u_1..u_N]`` over the ``M``
    active (non-zero strength) points listed in ``points``.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    points: tuple[OrderedPoint, ...]
    n_atoms: int

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ScatteringSolution:
    delta_p: float
    k: float
    t_n: np.ndarray
    r_n: np.ndarray
    e: np.ndarray

    @property
    def t(self) -> complex:
        return complex(self.t_n[-1])

    @property
    def r(self) -> complex:
        return complex(self.r_n[0])

    @property
    def unitarity_residual(self) -> float:
        return abs(abs(self.t) ** 2 + abs(self.r) ** 2 - 1.0)


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite input {v!r}")


def build_system(spec: SystemSpec, delta_p: float) -> ScatteringSystem:
    """Assemble the scattering equations at photon detuning ``delta_p = k - k0``."""
    _check_finite(delta_p)
    ordered = order_points(spec)
    active = tuple(p for p in ordered if p.strength > 0)
    m, n_atoms = len(active), spec.n_atoms
    dim = 2 * m + n_atoms
    k = spec.k0 + delta_p
    k_phase = k if spec.phase_mode is PhaseMode.EXACT else spec.k0

    a = np.zeros((dim, dim), dtype=complex)
    b = np.zeros(dim, dtype=complex)
    t_col = lambda n: n
    r_col = lambda n: m + n
    u_col = lambda i: 2 * m + i

    for n, p in enumerate(active):
        sg = math.sqrt(p.strength)
        fwd = np.exp(1j * k_phase * p.position)
        bwd = np.conj(fwd)
        # transmission jump
        row = n
        a[row, u_col(p.atom)] += sg
        a[row, t_col(n)] += -1j * fwd
        if n == 0:
            b[row] -= 1j * fwd
        else:
            a[row, t_col(n - 1)] += 1j * fwd
        # reflection jump
        row = m + n
        a[row, u_col(p.atom)] += sg
        a[row, r_col(n)] += -1j * bwd
        if n + 1 < m:
            a[row, r_col(n + 1)] += 1j * bwd
        # energy balance of the owner
        row = u_col(p.atom)
        c = sg / 4
        a[row, t_col(n)] -= c * fwd
        if n == 0:
            b[row] += c * fwd
        else:
            a[row, t_col(n - 1)] -= c * fwd
        a[row, r_col(n)] -= c * bwd
        if n + 1 < m:
            a[row, r_col(n + 1)] -= c * bwd

    for i, atom in enumerate(spec.atoms):
        a[u_col(i), u_col(i)] += delta_p - atom.detuning
    for d in spec.dipole_couplings:
        a[u_col(d.i), u_col(d.l)] -= d.strength
        a[u_col(d.l), u_col(d.i)] -= d.strength

    return ScatteringSystem(a, b, active, n_atoms)


def _expand(ordered: Sequence[OrderedPoint], t_act: np.ndarray, r_act: np.ndarray):
    """Fill amplitudes at zero-strength points by continuity."""
    active_rank = np.cumsum([p.strength > 0 for p in ordered])
    t_full = np.empty(len(ordered), dtype=complex)
    r_full = np.empty(len(ordered), dtype=complex)
    for idx, p in enumerate(ordered):
        left = active_rank[idx] - 1  # last active point at or left of idx
        right = left if p.strength > 0 else left + 1  # first active at or right
        t_full[idx] = t_act[left] if left >= 0 else 1.0
        r_full[idx] = r_act[right] if right < len(r_act) else 0.0
    return t_full, r_full


def solve(spec: SystemSpec, delta_p: float) -> ScatteringSolution:
    """Solve the scattering problem at photon detuning ``delta_p``."""
    system = build_system(spec, delta_p)
    m = len(system.points)
    try:
        x = np.linalg.solve(system.matrix, system.rhs)
    except np.linalg.LinAlgError:
        raise SingularSystemError(delta_p, float(np.linalg.cond(system.matrix))) from None
    cond = np.linalg.cond(system.matrix)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularSystemError(delta_p, float(cond))
    t_act, r_act, u = x[:m], x[m:2 * m], x[2 * m:]
    t_full, r_full = _expand(order_points(spec), t_act, r_act)
    return ScatteringSolution(
        delta_p=float(delta_p),
        k=spec.k0 + delta_p,
        t_n=t_full,
        r_n=r_full,
        e=u / math.sqrt(math.pi),
    )


def sweep(spec: SystemSpec, grid: Sequence[float]) -> list[ScatteringSolution]:
    grid = [float(x) for x in grid]
    if any(not math.isfinite(x) for x in grid):
        raise ValueError("detuning grid contains non-finite values")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("detuning grid must be sorted")

    def one(x: float) -> ScatteringSolution:
        try:
            return solve(spec, x)
        except Exception as exc:
            raise SweepError(x, exc) from exc

    return parallel_map(one, grid)


def transmission(spec: SystemSpec, grid: Sequence[float]) -> np.ndarray:
    """Overall transmission ``t = t_{N'}`` on a detuning grid."""
    return np.array([s.t for s in sweep(spec, grid)], dtype=complex)
