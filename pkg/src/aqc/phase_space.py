"""Wigner functions of battery states on a phase-space grid.

Axes are in oscillator units with hbar = 1: x = sqrt(2) X and p = sqrt(2) P,
so the vacuum peaks at 1/pi and the grid integrates to one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, GridTooSmall
from .oscillator import BatteryState, Coherent, FockSpace, hermite_functions, prepare_state

SUPPORT_MASS = 0.999


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """values[i, j] = W(x_axis[i], p_axis[j])."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def dx(self) -> float:
        return float(self.x_axis[1] - self.x_axis[0])

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    @property
    def X_axis(self) -> np.ndarray:
        """Positions in the dimensionless X units used for profiles and displacements."""
        return self.x_axis / np.sqrt(2.0)

    def normalization(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)

    def marginal_x(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp


def default_span(dim: int) -> float:
    return float(np.sqrt(2 * dim) + 3)


def _mass_inside(amps, L, n=2001):
    x = np.linspace(-L, L, n)
    dens = np.abs(amps @ hermite_functions(len(amps), x)) ** 2
    return float(np.sum(dens) * (x[1] - x[0]))


def wigner_of_state(space: FockSpace, state: BatteryState, n_points: int = 512,
                    span: float | None = None) -> WignerGrid:
    """W(x, p) = (1/pi) int psi*(x - y) psi(x + y) e^{-2ipy} dy on an n_points^2 grid.

    psi(x) is built from the Fock amplitudes with Hermite functions and the y
    integral uses a uniform rule on a grid fine enough that its aliasing period
    in p exceeds the full p range.
    """
    if n_points < 8:
        raise ConfigInvalid("need at least 8 grid points per axis")
    L = default_span(space.dim) if span is None else float(span)
    amps = state.amplitudes
    # momentum wavefunction: phi_n(p) picks up (-i)^n
    amps_p = amps * (-1j) ** np.arange(len(amps))
    for name, a in (("position", amps), ("momentum", amps_p)):
        if _mass_inside(a, L) < SUPPORT_MASS:
            raise GridTooSmall(f"state {name} support exceeds grid half-width {L:.3g}")
    n = n_points
    axis = np.linspace(-L, L, n)
    dx = axis[1] - axis[0]
    # copies of W repeat every pi/h in p, keep them off [-L, L]
    m = max(1, int(np.ceil(dx * 2 * L / np.pi)))
    h = dx / (2 * m)
    K = int(np.ceil(2 * L / h))
    # fine grid z_j = -L + j h for j in [-K, 2m(n-1) + K]
    j = np.arange(-K, 2 * m * (n - 1) + K + 1)
    psi = amps @ hermite_functions(len(amps), -L + j * h)
    k = np.arange(-K, K + 1)
    centre = 2 * m * np.arange(n)[:, None] + K
    A = np.conj(psi[centre - k[None, :]]) * psi[centre + k[None, :]]
    phase = np.exp(-2j * np.outer(k * h, axis))
    W = (A @ phase).real * h / np.pi
    return WignerGrid(axis, axis.copy(), W)


def negativity_volume(grid: WignerGrid) -> float:
    """int max(-W, 0) dx dp."""
    return float(np.clip(-grid.values, 0, None).sum() * grid.dx * grid.dp)


def coherent_approximation(space: FockSpace, state: BatteryState) -> BatteryState:
    """The coherent state with the same <a>, i.e. the same mean X and P."""
    alpha = state.expectation(space.operators.a)
    return prepare_state(space, Coherent(alpha))
