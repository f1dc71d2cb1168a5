"""Truncated Fock-space battery: operators, states, Gibbs weighting, time reversal.

Units: hbar = 1. Energies are in the same units as ``hbar_omega`` and ``kT``.
Position is the dimensionless quadrature X = (a + a^dag)/2, so a coherent
state with real alpha sits at <X> = alpha.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigInvalid, TruncationInsufficient, UnderflowRisk

NORM_DEFICIT_TOL = 1e-8
UNDERFLOW_FLOOR = 1e-300
_LOG_FLOOR = np.log(UNDERFLOW_FLOOR)


@dataclass(frozen=True)
class FockSpace:
    """Truncated oscillator basis |0>, ..., |dim-1> with its physical constants."""

    dim: int = 256
    kT: float = 1.0
    hbar_omega: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigInvalid(f"dim must be an integer >= 2, got {self.dim!r}")
        if not (np.isfinite(self.kT) and self.kT > 0):
            raise ConfigInvalid(f"kT must be positive, got {self.kT!r}")
        if not (np.isfinite(self.hbar_omega) and self.hbar_omega > 0):
            raise ConfigInvalid(f"hbar_omega must be positive, got {self.hbar_omega!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "kT", float(self.kT))
        object.__setattr__(self, "hbar_omega", float(self.hbar_omega))

    @property
    def chi(self) -> float:
        """Ratio of vacuum to thermal energy, hbar*omega / 2kT."""
        return self.hbar_omega / (2.0 * self.kT)

    @cached_property
    def energies(self) -> np.ndarray:
        """Diagonal of H_B, hbar*omega*(n + 1/2)."""
        e = self.hbar_omega * (np.arange(self.dim) + 0.5)
        e.setflags(write=False)
        return e

    @cached_property
    def operators(self) -> "Operators":
        return build_operators(self)

    def with_dim(self, dim: int) -> "FockSpace":
        return replace(self, dim=dim)

    @classmethod
    def from_chi(cls, chi: float, dim: int = 256, hbar_omega: float = 1.0) -> "FockSpace":
        """Space with kT chosen so that hbar*omega/2kT equals ``chi``."""
        if not chi > 0:
            raise ConfigInvalid("chi must be positive")
        return cls(dim=dim, kT=hbar_omega / (2.0 * chi), hbar_omega=hbar_omega)


class Operators(NamedTuple):
    a: np.ndarray
    a_dagger: np.ndarray
    number: np.ndarray
    position: np.ndarray
    momentum: np.ndarray
    H_B: np.ndarray


def build_operators(space: FockSpace) -> Operators:
    """Ladder, number, quadrature and Hamiltonian matrices in the Fock basis.

    X = (a + a^dag)/2 and P = (a - a^dag)/(2i), so [X, P] = i/2 away from the
    truncation edge.
    """
    n = np.arange(space.dim)
    a = np.diag(np.sqrt(n[1:].astype(float)), 1)
    ad = a.T.copy()
    number = np.diag(n.astype(float))
    position = (a + ad) / 2.0
    momentum = (a - ad) / 2.0j
    H_B = np.diag(np.asarray(space.energies))
    ops = Operators(a, ad, number, position, momentum, H_B)
    for m in ops:
        m.setflags(write=False)
    return ops


def is_hermitian(op: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) < tol)


# --- state recipes ---------------------------------------------------------

def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigInvalid(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def _cjson(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


@dataclass(frozen=True)
class Coherent:
    alpha: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", _complex(self.alpha))

    def conjugate(self) -> "Coherent":
        return Coherent(self.alpha.conjugate())

    def to_dict(self) -> dict:
        return {"kind": "coherent", "alpha": _cjson(self.alpha)}


@dataclass(frozen=True)
class SqueezedDisplaced:
    """D(alpha) S(r) |0> with S(r) = exp(r/2 (a^2 - a^dag^2)); r > 0 narrows X."""

    alpha: complex
    r: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _complex(self.alpha))
        object.__setattr__(self, "r", float(self.r))
        if not np.isfinite(self.r):
            raise ConfigInvalid("squeeze parameter must be finite")

    def conjugate(self) -> "SqueezedDisplaced":
        return SqueezedDisplaced(self.alpha.conjugate(), self.r)

    def to_dict(self) -> dict:
        return {"kind": "squeezed", "alpha": _cjson(self.alpha), "r": self.r}


@dataclass(frozen=True)
class Cat:
    """Superposition sum_k w_k |alpha_k> of coherent states (normalized on preparation)."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((_complex(w), _complex(a)) for w, a in self.terms)
        if not terms:
            raise ConfigInvalid("cat state needs at least one term")
        if all(w == 0 for w, _ in terms):
            raise ConfigInvalid("cat weights are all zero")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, *alphas, weights=None) -> "Cat":
        weights = [1.0] * len(alphas) if weights is None else list(weights)
        return cls(tuple(zip(weights, alphas)))

    def conjugate(self) -> "Cat":
        return Cat(tuple((w.conjugate(), a.conjugate()) for w, a in self.terms))

    def to_dict(self) -> dict:
        return {"kind": "cat",
                "terms": [[_cjson(w), _cjson(a)] for w, a in self.terms]}


@dataclass(frozen=True)
class FockLevel:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ConfigInvalid(f"Fock level must be a non-negative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    def conjugate(self) -> "FockLevel":
        return self

    def to_dict(self) -> dict:
        return {"kind": "fock", "n": self.n}


StateSpec = Union[Coherent, SqueezedDisplaced, Cat, FockLevel]


def state_from_dict(d: dict) -> StateSpec:
    """Inverse of ``spec.to_dict()``."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigInvalid(f"state spec must be a mapping with 'kind', got {d!r}")
    kind = d["kind"]
    try:
        if kind == "coherent":
            return Coherent(d["alpha"])
        if kind == "squeezed":
            return SqueezedDisplaced(d["alpha"], d.get("r", 0.0))
        if kind == "cat":
            return Cat(tuple((w, a) for w, a in d["terms"]))
        if kind == "fock":
            return FockLevel(d["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad {kind} state spec {d!r}: {exc}") from exc
    raise ConfigInvalid(f"unknown state kind {kind!r}")


# --- battery states ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BatteryState:
    """Normalized Fock amplitudes.

    ``recipe`` is the prepared StateSpec (None for states built from raw
    amplitudes) and ``history`` lists transformations applied since then.
    """

    amplitudes: np.ndarray
    recipe: StateSpec | None = None
    norm_deficit: float = 0.0
    history: tuple = field(default=())

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.vdot(self.amplitudes, op @ self.amplitudes))

    def overlap(self, other: "BatteryState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, _amps(other)))

    def derive(self, amplitudes: np.ndarray, step: str) -> "BatteryState":
        return BatteryState(amplitudes, self.recipe, self.norm_deficit, self.history + (step,))


def _amps(state) -> np.ndarray:
    return state.amplitudes if isinstance(state, BatteryState) else np.asarray(state)


def from_amplitudes(amplitudes, recipe: StateSpec | None = None) -> BatteryState:
    """Normalize a raw amplitude vector into a BatteryState."""
    v = np.asarray(amplitudes, dtype=complex)
    nrm = np.linalg.norm(v)
    if not nrm > 0:
        raise ConfigInvalid("zero state vector")
    return BatteryState(v / nrm, recipe)


def fidelity(a, b) -> float:
    """|<a|b>|^2 for normalized states or vectors."""
    return float(abs(np.vdot(_amps(a), _amps(b))) ** 2)


def coherent_overlap(beta: complex, alpha: complex) -> complex:
    """<beta|alpha> for untruncated coherent states."""
    return np.exp(-0.5 * (abs(alpha) ** 2 + abs(beta) ** 2) + np.conj(beta) * alpha)


def coherent_amplitudes(dim: int, alpha: complex) -> np.ndarray:
    """Untruncated-normalized coherent coefficients e^{-|a|^2/2} a^n / sqrt(n!)."""
    alpha = complex(alpha)
    out = np.zeros(dim, dtype=complex)
    if alpha == 0:
        out[0] = 1.0
        return out
    n = np.arange(dim)
    logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def squeezed_amplitudes(dim: int, alpha: complex, r: float) -> np.ndarray:
    """Untruncated-normalized coefficients of D(alpha) S(r) |0>.

    The state is exp(beta a^dag - t a^dag^2 / 2)|0> times a constant, with
    t = tanh r and beta = alpha + t alpha*, which gives a three-term recurrence.
    """
    alpha = complex(alpha)
    t = np.tanh(r)
    beta = alpha + t * alpha.conjugate()
    log_c = -0.5 * abs(alpha) ** 2 - 0.5 * t * alpha.conjugate() ** 2 - 0.5 * np.log(np.cosh(r))
    d = np.zeros(dim, dtype=complex)
    d[0] = 1.0
    offset = 0.0
    for n in range(dim - 1):
        prev = d[n - 1] if n > 0 else 0.0
        d[n + 1] = (beta * d[n] - t * np.sqrt(n) * prev) / np.sqrt(n + 1)
        if abs(d[n + 1]) > 1e200:
            d[: n + 2] *= 1e-200
            offset += 200 * np.log(10.0)
    total = log_c + offset
    # the normalized peak stays O(1); only tiny tails can underflow here
    with np.errstate(under="ignore"):
        return d * np.exp(total)


def _analytic_amplitudes(dim: int, spec: StateSpec) -> tuple[np.ndarray, float]:
    """Truncated coefficients and the squared norm of the untruncated state."""
    if isinstance(spec, Coherent):
        return coherent_amplitudes(dim, spec.alpha), 1.0
    if isinstance(spec, SqueezedDisplaced):
        return squeezed_amplitudes(dim, spec.alpha, spec.r), 1.0
    if isinstance(spec, Cat):
        v = sum(w * coherent_amplitudes(dim, a) for w, a in spec.terms)
        norm2 = sum((np.conj(wj) * wk * coherent_overlap(aj, ak)).real
                    for wj, aj in spec.terms for wk, ak in spec.terms)
        if not norm2 > 1e-14:
            raise ConfigInvalid("cat superposition cancels to (nearly) zero")
        return v, float(norm2)
    if isinstance(spec, FockLevel):
        v = np.zeros(dim, dtype=complex)
        if spec.n < dim:
            v[spec.n] = 1.0
        return v, 1.0
    raise ConfigInvalid(f"not a state spec: {spec!r}")


def prepare_state(space: FockSpace, spec: StateSpec) -> BatteryState:
    """Analytic Fock coefficients of ``spec`` truncated to ``space.dim`` and normalized."""
    v, norm2 = _analytic_amplitudes(space.dim, spec)
    kept = float(np.vdot(v, v).real)
    deficit = 1.0 - kept / norm2
    if deficit >= NORM_DEFICIT_TOL:
        raise TruncationInsufficient(
            f"dim={space.dim} loses {deficit:.3e} of the norm of {spec!r}; raise --dim")
    return BatteryState(v / np.sqrt(kept), spec, max(deficit, 0.0))


# --- Gibbs map and effective potential ------------------------------------

def log_gibbs_norm(amplitudes, energies, kT: float) -> float:
    """ln <psi| e^{-H/kT} |psi> for H diagonal with the given energies."""
    p = np.abs(np.asarray(amplitudes)) ** 2
    nz = p > 0
    return float(logsumexp(np.log(p[nz]) - np.asarray(energies)[nz] / kT))


def _checked_log_z(amplitudes, energies, kT) -> float:
    log_z = log_gibbs_norm(amplitudes, energies, kT)
    if log_z < _LOG_FLOOR:
        raise UnderflowRisk(f"Gibbs norm exp({log_z:.1f}) is below {UNDERFLOW_FLOOR:g}")
    return log_z


def apply_gibbs_weight(space: FockSpace, state: BatteryState) -> tuple[BatteryState, float]:
    """Normalized e^{-H_B/2kT}|psi> and Z~ = <psi|e^{-H_B/kT}|psi>."""
    log_z = _checked_log_z(state.amplitudes, space.energies, space.kT)
    w = np.exp(-space.energies / (2 * space.kT) - 0.5 * log_z)
    out = state.derive(state.amplitudes * w, f"gibbs(kT={space.kT!r})")
    return out, float(np.exp(log_z))


def effective_energy(amplitudes, energies, kT: float) -> float:
    """-kT ln <psi|e^{-H/kT}|psi> for a diagonal Hamiltonian."""
    return -kT * _checked_log_z(amplitudes, energies, kT)


def effective_potential(space: FockSpace, state: BatteryState) -> float:
    """E~(psi) = -kT ln <psi|e^{-H_B/kT}|psi>."""
    return effective_energy(state.amplitudes, space.energies, space.kT)


def time_reverse(state: BatteryState) -> BatteryState:
    """Complex conjugation in the Fock basis."""
    return state.derive(state.amplitudes.conj(), "time_reverse")


# --- position representation -------------------------------------------------

def hermite_functions(n_max: int, x) -> np.ndarray:
    """Rows phi_0..phi_{n_max-1} of normalized Hermite functions at points x.

    x is in oscillator units (x = sqrt(2) X). The normalized three-term
    recurrence runs on rescaled values with a per-point log offset, so
    neither n! nor exp(-x^2/2) over- or underflows prematurely.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n_max, x.size))
    log_s = -0.5 * x ** 2 - 0.25 * np.log(np.pi)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    big = 1e100
    with np.errstate(under="ignore"):
        for n in range(n_max):
            out[n] = cur * np.exp(log_s)
            nxt = np.sqrt(2.0 / (n + 1)) * x * cur - np.sqrt(n / (n + 1)) * prev
            prev, cur = cur, nxt
            hot = np.abs(cur) > big
            if hot.any():
                cur[hot] /= big
                prev[hot] /= big
                log_s[hot] += np.log(big)
    return out


def position_wavefunction(state: BatteryState, x) -> np.ndarray:
    """psi(x) in oscillator units, normalized so that int |psi|^2 dx = 1."""
    return _amps(state) @ hermite_functions(state.dim, x)
