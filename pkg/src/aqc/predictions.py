"""Closed-form right-hand sides: free energies, Gibbs-mapped state parameters, q and W_q.

Energies carry the units of ``kT``/``hbar_omega``; chi = hbar_omega / 2kT.
The two-level system is H_S = E sigma_z, so its gap is 2E.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, UndefinedQ
from .oscillator import FockSpace, coherent_overlap


def _logcosh(x):
    x = np.abs(x)
    if x < 20:
        # log1p(2 sinh^2(x/2)) keeps full relative precision as x -> 0
        return np.log1p(2 * np.sinh(x / 2) ** 2)
    return x + np.log1p(np.exp(-2 * x)) - np.log(2.0)


@dataclass(frozen=True)
class TwoLevelSystem:
    E_i: float
    E_f: float
    kT: float

    def __post_init__(self):
        if not self.kT > 0:
            raise ConfigInvalid(f"kT must be positive, got {self.kT}")

    @property
    def Z_i(self) -> float:
        return partition_function(self.E_i, self.kT)

    @property
    def Z_f(self) -> float:
        return partition_function(self.E_f, self.kT)

    @property
    def delta_F(self) -> float:
        return free_energy_change(self)


def partition_function(E: float, kT: float) -> float:
    return 2.0 * np.cosh(E / kT)


def free_energy_change(sys: TwoLevelSystem) -> float:
    """Delta F = -kT ln(cosh(E_f/kT) / cosh(E_i/kT))."""
    return float(-sys.kT * (_logcosh(sys.E_f / sys.kT) - _logcosh(sys.E_i / sys.kT)))


def q_factor(chi):
    """tanh(chi)/chi, equal to 1 at chi = 0."""
    chi = np.asarray(chi, dtype=float)
    if np.any(chi < 0):
        raise ConfigInvalid("chi must be non-negative")
    small = chi < 1e-4
    safe = np.where(small, 1.0, chi)
    out = np.where(small, 1.0 - chi ** 2 / 3.0 + 2.0 * chi ** 4 / 15.0, np.tanh(safe) / safe)
    return float(out) if out.ndim == 0 else out


def thermal_frequency_split(space: FockSpace) -> tuple[float, float, float]:
    """(hbar omega_T, thermal part, vacuum part) with hbar omega_T = kT / q(chi)."""
    hw_T = space.kT / q_factor(space.chi)
    vacuum = space.hbar_omega / 2.0
    return hw_T, hw_T - vacuum, vacuum


# --- coherent states ------------------------------------------------------------

def coherent_pair_map(alpha: complex, chi: float) -> complex:
    """Displacement of the normalized Gibbs-mapped coherent state."""
    return complex(alpha) * np.exp(-chi)


@dataclass(frozen=True)
class CoherentTable:
    """Forward/reverse coherent displacements for targets alpha_i, alpha_f."""

    psi_i: complex
    phi_f: complex
    phi_i: complex
    psi_f: complex


def coherent_table(alpha_i: complex, alpha_f: complex, chi: float) -> CoherentTable:
    """psi_i = |alpha_i*>, phi_f = |alpha_f>; prepared states follow from G and T."""
    return CoherentTable(np.conj(alpha_i), complex(alpha_f),
                         coherent_pair_map(alpha_i, chi), coherent_pair_map(np.conj(alpha_f), chi))


def coherent_z_tilde(alpha: complex, chi: float) -> float:
    """<alpha| e^{-H_B/kT} |alpha> including the zero-point factor e^{-chi}."""
    return float(np.exp(-chi - abs(alpha) ** 2 * (1 - np.exp(-2 * chi))))


def coherent_delta_E(alpha_i, alpha_f, chi, kT):
    """E~(psi_i) - E~(phi_f) = kT (|a_i|^2 - |a_f|^2)(1 - e^{-2 chi})."""
    return kT * (np.abs(alpha_i) ** 2 - np.abs(alpha_f) ** 2) * (1 - np.exp(-2 * chi))


def quantum_work(alpha_i, alpha_f, chi, hbar_omega):
    """Half the difference of forward and reverse battery energy drops."""
    dE_plus = (np.exp(-2 * chi) * np.abs(alpha_i) ** 2 - np.abs(alpha_f) ** 2) * hbar_omega
    dE_minus = (np.exp(-2 * chi) * np.abs(alpha_f) ** 2 - np.abs(alpha_i) ** 2) * hbar_omega
    return (dE_plus - dE_minus) / 2.0


def work_from_energies(E_phi_i, E_phi_f, E_psi_f, E_psi_i):
    """W_q from the mean battery energies of the four states."""
    return ((E_phi_i - E_phi_f) - (E_psi_f - E_psi_i)) / 2.0


# --- squeezed states ----------------------------------------------------------

@dataclass(frozen=True)
class SqueezedMap:
    """e^{-H_B/2kT} D(alpha)S(r)|0> = sqrt(Z_tilde) D(mu)S(s)|0>, up to a phase."""

    s: float
    mu: complex
    Z_tilde: float


def squeezed_pair_map(alpha: complex, r: float, chi: float) -> SqueezedMap:
    alpha = complex(alpha)
    t = np.tanh(r)
    tp = np.exp(-2 * chi) * t
    s = float(np.arctanh(tp))
    mu = np.exp(-chi) * complex(alpha.real * (1 + t) / (1 + tp),
                                alpha.imag * (1 - t) / (1 - tp))
    log_z = (-chi + np.log(np.cosh(s) / np.cosh(r))
             - abs(alpha) ** 2 - t * (alpha ** 2).real
             + abs(mu) ** 2 + tp * (mu ** 2).real)
    return SqueezedMap(s, mu, float(np.exp(log_z)))


def squeezed_mean_energy(alpha: complex, r: float, hbar_omega: float) -> float:
    return hbar_omega * (abs(alpha) ** 2 + np.sinh(r) ** 2 + 0.5)


def squeezed_delta_E(alpha_i, r_i, alpha_f, r_f, chi, kT) -> float:
    """E~(|alpha_i*, r_i>) - E~(|alpha_f, r_f>)."""
    z_i = squeezed_pair_map(np.conj(alpha_i), r_i, chi).Z_tilde
    z_f = squeezed_pair_map(alpha_f, r_f, chi).Z_tilde
    return float(-kT * np.log(z_i) + kT * np.log(z_f))


def squeezed_quantum_work(alpha_i, r_i, alpha_f, r_f, chi, hbar_omega) -> float:
    m_i = squeezed_pair_map(np.conj(alpha_i), r_i, chi)
    m_f = squeezed_pair_map(alpha_f, r_f, chi)
    return float(work_from_energies(
        squeezed_mean_energy(m_i.mu, m_i.s, hbar_omega),
        squeezed_mean_energy(alpha_f, r_f, hbar_omega),
        squeezed_mean_energy(m_f.mu, m_f.s, hbar_omega),
        squeezed_mean_energy(alpha_i, r_i, hbar_omega)))


def squeezed_q(alpha_i, r_i, alpha_f, r_f, chi, hbar_omega=1.0) -> float:
    """Delta E~ / W_q for a squeezed pair; UndefinedQ when W_q vanishes."""
    kT = hbar_omega / (2 * chi)
    w = squeezed_quantum_work(alpha_i, r_i, alpha_f, r_f, chi, hbar_omega)
    if w == 0:
        raise UndefinedQ("W_q = 0")
    return squeezed_delta_E(alpha_i, r_i, alpha_f, r_f, chi, kT) / w


# --- cat states --------------------------------------------------------------

@dataclass(frozen=True)
class CatMap:
    eta_chi: float
    mapped_terms: tuple
    Z_tilde: float


def cat_eta(chi: float) -> float:
    return float(np.exp(-0.5 * (1 - np.exp(-2 * chi))))


def _gram(terms) -> float:
    return float(sum((np.conj(wj) * wk * coherent_overlap(aj, ak)).real
                     for wj, aj in terms for wk, ak in terms))


def cat_pair_map(terms, chi: float) -> CatMap:
    """Each |alpha> maps to eta^{|alpha|^2} |alpha e^{-chi}>; Z~ for the normalized cat."""
    terms = tuple((complex(w), complex(a)) for w, a in terms)
    if not terms:
        raise ConfigInvalid("cat state needs at least one term")
    eta = cat_eta(chi)
    mapped = tuple((w * eta ** (abs(a) ** 2), a * np.exp(-chi)) for w, a in terms)
    z = np.exp(-chi) * _gram(mapped) / _gram(terms)
    return CatMap(eta, mapped, float(z))


# --- prediction bundle -------------------------------------------------------

@dataclass(frozen=True)
class CrooksPrediction:
    delta_F: float
    delta_E_tilde: float
    predicted_ratio: float
    W_q: float | None = None
    q: float | None = None


def predicted_ratio(sys: TwoLevelSystem, delta_E_tilde: float, W_q: float | None = None,
                    hbar_omega: float | None = None) -> CrooksPrediction:
    """P_fwd/P_rev = exp(-dF/kT) exp(dE~/kT).

    With W_q and hbar_omega given, q = dE~/W_q is attached (None when W_q = 0).
    """
    dF = free_energy_change(sys)
    ratio = float(np.exp((delta_E_tilde - dF) / sys.kT))
    q = None
    if W_q is not None and W_q != 0:
        q = float(delta_E_tilde / W_q)
    return CrooksPrediction(dF, float(delta_E_tilde), ratio, W_q, q)


def coherent_prediction(sys: TwoLevelSystem, alpha_i, alpha_f, hbar_omega: float = 1.0) -> CrooksPrediction:
    chi = hbar_omega / (2 * sys.kT)
    return predicted_ratio(sys, float(coherent_delta_E(alpha_i, alpha_f, chi, sys.kT)),
                           float(quantum_work(alpha_i, alpha_f, chi, hbar_omega)), hbar_omega)


def thermal_wavelength_ratio(sys: TwoLevelSystem, alpha_i, alpha_f, hbar_omega: float = 1.0) -> float:
    """The same ratio written as exp(-dF/kT) exp(W_q / hbar omega_T)."""
    chi = hbar_omega / (2 * sys.kT)
    hw_T = sys.kT / q_factor(chi)
    w = quantum_work(alpha_i, alpha_f, chi, hbar_omega)
    return float(np.exp(-free_energy_change(sys) / sys.kT + w / hw_T))
