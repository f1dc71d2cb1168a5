"""Position-dependent level shift E(X) and the joint Hamiltonian blocks H_B +- E(X)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigInvalid, EigensolverFailure, TabulatedOutOfRange
from .oscillator import FockSpace, hermite_functions

_SQRT2 = np.sqrt(2.0)


def _check_span(x_i, x_f):
    if not x_i < x_f:
        raise ConfigInvalid(f"need x_i < x_f, got {x_i} and {x_f}")


@dataclass(frozen=True)
class FlatEnds:
    """E_i left of x_i, E_f right of x_f, linear ramp in between."""

    E_i: float
    E_f: float
    x_i: float
    x_f: float

    def __post_init__(self):
        _check_span(self.x_i, self.x_f)

    def __call__(self, x):
        return np.interp(x, [self.x_i, self.x_f], [self.E_i, self.E_f])

    @property
    def breakpoints(self):
        return (self.x_i, self.x_f)


@dataclass(frozen=True)
class Sinusoidal:
    """E_i + (E_f - E_i) sin^2(pi (x - x_i) / (2 (x_f - x_i))): trough at x_i, crest at x_f."""

    E_i: float
    E_f: float
    x_i: float
    x_f: float

    def __post_init__(self):
        _check_span(self.x_i, self.x_f)

    def __call__(self, x):
        ph = np.pi * (np.asarray(x) - self.x_i) / (2 * (self.x_f - self.x_i))
        return self.E_i + (self.E_f - self.E_i) * np.sin(ph) ** 2

    breakpoints = ()


@dataclass(frozen=True)
class Linear:
    """The ramp through (x_i, E_i) and (x_f, E_f), extended over the whole axis."""

    E_i: float
    E_f: float
    x_i: float
    x_f: float

    def __post_init__(self):
        _check_span(self.x_i, self.x_f)

    def __call__(self, x):
        return self.E_i + (self.E_f - self.E_i) * (np.asarray(x) - self.x_i) / (self.x_f - self.x_i)

    breakpoints = ()


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation of (x, E) samples. No extrapolation."""

    samples: tuple

    def __post_init__(self):
        s = tuple((float(x), float(e)) for x, e in self.samples)
        if len(s) < 2:
            raise ConfigInvalid("tabulated profile needs at least two samples")
        xs = [x for x, _ in s]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ConfigInvalid("tabulated sample positions must be strictly increasing")
        object.__setattr__(self, "samples", s)

    @property
    def xs(self):
        return np.array([x for x, _ in self.samples])

    @property
    def es(self):
        return np.array([e for _, e in self.samples])

    @property
    def E_i(self):
        return self.samples[0][1]

    @property
    def E_f(self):
        return self.samples[-1][1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.samples[0][0], self.samples[-1][0]
        if np.any(x < lo) or np.any(x > hi):
            raise TabulatedOutOfRange(f"position outside tabulated range [{lo}, {hi}]")
        return np.interp(x, self.xs, self.es)

    @property
    def breakpoints(self):
        return tuple(x for x, _ in self.samples)


Profile = FlatEnds | Sinusoidal | Linear | Tabulated

_KINDS = {"flat_ends": FlatEnds, "sinusoidal": Sinusoidal, "linear": Linear}


def zero_profile() -> Linear:
    return Linear(0.0, 0.0, -1.0, 1.0)


def profile_to_dict(profile) -> dict:
    if isinstance(profile, Tabulated):
        return {"kind": "tabulated", "samples": [list(s) for s in profile.samples]}
    for name, cls in _KINDS.items():
        if type(profile) is cls:
            return {"kind": name, "E_i": profile.E_i, "E_f": profile.E_f,
                    "x_i": profile.x_i, "x_f": profile.x_f}
    raise ConfigInvalid(f"cannot serialize profile {profile!r}")


def profile_from_dict(d: dict):
    if not isinstance(d, dict):
        raise ConfigInvalid(f"profile must be a mapping, got {d!r}")
    kind = d.get("kind")
    try:
        if kind == "tabulated":
            return Tabulated(tuple(tuple(s) for s in d["samples"]))
        if kind in _KINDS:
            return _KINDS[kind](float(d["E_i"]), float(d["E_f"]), float(d["x_i"]), float(d["x_f"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(f"bad profile {d!r}: {exc}") from exc
    raise ConfigInvalid(f"unknown profile kind {kind!r}; expected one of "
                        f"{sorted(_KINDS) + ['tabulated']}")


def end_values(profile) -> tuple[float, float]:
    """(E_i, E_f): the asymptotic half-splittings used for the thermal weights."""
    return float(profile.E_i), float(profile.E_f)


def profile_value(profile, x):
    """E at dimensionless position(s) x."""
    v = profile(x)
    return float(v) if np.ndim(v) == 0 else v


# --- E(X) as an operator -------------------------------------------------------

QUAD_ORDER = 16
QUAD_MARGIN = 8.0


def quadrature_hull(dim: int) -> float:
    """Half-width, in X units, beyond which every basis function is negligible."""
    return (np.sqrt(2 * dim + 1) + QUAD_MARGIN) / _SQRT2


def _quadrature_nodes(dim: int, kinks) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights in oscillator units, split at kinks."""
    L = _SQRT2 * quadrature_hull(dim)
    # shortest wavelength of a product phi_m phi_n is pi / sqrt(2 dim + 1)
    h = min(0.5, 2 * np.pi / np.sqrt(2 * dim + 1))
    n = int(np.ceil(2 * L / h))
    edges = np.linspace(-L, L, n + 1)
    extra = [_SQRT2 * k for k in kinks if -L < _SQRT2 * k < L]
    edges = np.unique(np.concatenate([edges, extra]))
    g, w = leggauss(QUAD_ORDER)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * (g + 1) + a).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def profile_operator(space: FockSpace, profile, method: str = "quadrature") -> np.ndarray:
    """Matrix of E(X) in the truncated Fock basis.

    ``quadrature`` (default) integrates <m|E(X)|n> = int phi_m phi_n E dx
    panel-wise, with panels broken at profile kinks. ``spectral`` applies E to
    the eigenvalues of the truncated X matrix; it is exact for polynomials but
    converges only slowly in dim for kinked profiles.
    """
    if method == "spectral":
        xi, V = np.linalg.eigh(np.asarray(space.operators.position))
        M = (V * profile(xi)) @ V.T
    elif method == "quadrature":
        if isinstance(profile, Tabulated):
            hull = quadrature_hull(space.dim)
            lo, hi = profile.samples[0][0], profile.samples[-1][0]
            if lo > -hull or hi < hull:
                raise TabulatedOutOfRange(
                    f"table [{lo}, {hi}] must cover the basis support [-{hull:.2f}, {hull:.2f}]")
        nodes, weights = _quadrature_nodes(space.dim, getattr(profile, "breakpoints", ()))
        M = np.zeros((space.dim, space.dim))
        for s in range(0, nodes.size, 4096):
            x, w = nodes[s:s + 4096], weights[s:s + 4096]
            phi = hermite_functions(space.dim, x)
            M += (phi * (w * profile(x / _SQRT2))) @ phi.T
    else:
        raise ConfigInvalid(f"unknown profile operator method {method!r}")
    return 0.5 * (M + M.T)


@dataclass(frozen=True, eq=False)
class JointHamiltonian:
    """Blocks of H_SB = |e><e| (H_B + E) + |g><g| (H_B - E)."""

    H_e: np.ndarray
    H_g: np.ndarray
    E_op: np.ndarray
    profile: object
    space: FockSpace

    @cached_property
    def eig_e(self):
        return _eigh(self.H_e)

    @cached_property
    def eig_g(self):
        return _eigh(self.H_g)

    def block(self, branch: str) -> np.ndarray:
        return self.H_e if branch == "e" else self.H_g

    def eig(self, branch: str):
        return self.eig_e if branch == "e" else self.eig_g


def _eigh(H):
    try:
        lam, Q = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigensolverFailure("non-finite eigenvalues")
    lam.setflags(write=False)
    Q.setflags(write=False)
    return lam, Q


@lru_cache(maxsize=16)
def joint_hamiltonian(space: FockSpace, profile, method: str = "quadrature") -> JointHamiltonian:
    E = profile_operator(space, profile, method)
    H_B = np.asarray(space.operators.H_B)
    parts = [H_B + E, H_B - E, E]
    for m in parts:
        m.setflags(write=False)
    return JointHamiltonian(*parts, profile=profile, space=space)
