"""Branch-wise unitary evolution and forward/reverse transition probabilities."""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .errors import (ConfigInvalid, EigensolverFailure, LocalizationWarning,
                     TruncationInsufficient)
from .oscillator import (BatteryState, FockSpace, apply_gibbs_weight, prepare_state,
                         time_reverse)
from .splitting import JointHamiltonian, end_values, joint_hamiltonian

CONVERGENCE_RTOL = 1e-8
CONVERGENCE_ATOL = 1e-14


class Direction(str, enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


@dataclass(frozen=True, eq=False)
class Propagator:
    U_e: np.ndarray
    U_g: np.ndarray
    t: float

    def block(self, branch: str) -> np.ndarray:
        return self.U_e if branch == "e" else self.U_g


def _evolve(eig, t, vec):
    lam, Q = eig
    return Q @ (np.exp(-1j * lam * t) * (Q.conj().T @ vec))


def build_propagator(joint: JointHamiltonian, t: float) -> Propagator:
    """exp(-i H t) per block from the cached eigendecompositions (hbar = 1)."""
    if not t >= 0:
        raise ConfigInvalid(f"evolution time must be >= 0, got {t}")
    blocks = []
    for lam, Q in (joint.eig_e, joint.eig_g):
        U = (Q * np.exp(-1j * lam * t)) @ Q.conj().T
        err = np.max(np.abs(U.conj().T @ U - np.eye(len(lam))))
        if err > 1e-10:
            raise EigensolverFailure(f"propagator not unitary (err {err:.2e})")
        blocks.append(U)
    return Propagator(blocks[0], blocks[1], float(t))


def thermal_weights(E: float, kT: float) -> tuple[float, float]:
    """(p_e, p_g) for H_S = E sigma_z at temperature kT; p_e/p_g = exp(-2E/kT)."""
    return float(expit(-2.0 * E / kT)), float(expit(2.0 * E / kT))


def as_state(space: FockSpace, s) -> BatteryState:
    if isinstance(s, BatteryState):
        if s.dim != space.dim:
            raise ConfigInvalid(f"state has dim {s.dim}, space has {space.dim}")
        return s
    return prepare_state(space, s)


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    """One run: prepare the battery, couple to a thermal qubit, evolve for tau, project.

    Forward runs use thermal weights at E_i, reverse runs at E_f. ``prepared``
    and ``measured`` may be StateSpecs or already-built BatteryStates.
    """

    space: FockSpace
    profile: object
    prepared: object
    measured: object
    direction: Direction = Direction.FORWARD
    tau: float | None = None
    method: str = "quadrature"
    convergence_check: bool = False

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.tau is not None and not self.tau > 0:
            raise ConfigInvalid(f"tau must be positive, got {self.tau}")

    @property
    def time(self) -> float:
        """tau, defaulting to half an oscillator period pi/omega."""
        return np.pi / self.space.hbar_omega if self.tau is None else float(self.tau)

    @property
    def weights(self) -> tuple[float, float]:
        E_i, E_f = end_values(self.profile)
        E = E_i if self.direction is Direction.FORWARD else E_f
        return thermal_weights(E, self.space.kT)


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    probability: float
    branch_e_amp: complex
    branch_g_amp: complex
    weights: tuple
    direction: Direction
    prepared: BatteryState
    measured: BatteryState
    config: ProtocolConfig
    convergence_delta: float | None = None


def _run(config: ProtocolConfig) -> ProtocolResult:
    space = config.space
    prep = as_state(space, config.prepared)
    meas = as_state(space, config.measured)
    if config.direction is Direction.FORWARD and hasattr(config.profile, "x_i"):
        mean_x = prep.expectation(space.operators.position).real
        if mean_x >= config.profile.x_i:
            warnings.warn(f"forward prepared state has <X> = {mean_x:.3g}, not left of "
                          f"x_i = {config.profile.x_i}", LocalizationWarning, stacklevel=3)
    joint = joint_hamiltonian(space, config.profile, config.method)
    t = config.time
    amp_e = complex(np.vdot(meas.amplitudes, _evolve(joint.eig_e, t, prep.amplitudes)))
    amp_g = complex(np.vdot(meas.amplitudes, _evolve(joint.eig_g, t, prep.amplitudes)))
    p_e, p_g = config.weights
    prob = p_e * abs(amp_e) ** 2 + p_g * abs(amp_g) ** 2
    return ProtocolResult(float(prob), amp_e, amp_g, (p_e, p_g), config.direction,
                          prep, meas, config)


def _doubled(config: ProtocolConfig) -> ProtocolConfig:
    big = config.space.with_dim(2 * config.space.dim)

    def lift(s):
        if not isinstance(s, BatteryState):
            return s
        replayable = all(h == "time_reverse" or h.startswith("gibbs") for h in s.history)
        if s.recipe is None or not replayable:
            # zero-pad: exact only when the tail above dim is negligible
            return BatteryState(np.concatenate([s.amplitudes, np.zeros(s.dim, complex)]),
                                s.recipe, s.norm_deficit, s.history)
        out = prepare_state(big, s.recipe)
        for step in s.history:
            out = time_reverse(out) if step == "time_reverse" else apply_gibbs_weight(big, out)[0]
        return out

    return replace(config, space=big, prepared=lift(config.prepared),
                   measured=lift(config.measured), convergence_check=False)


def run_protocol(config: ProtocolConfig) -> ProtocolResult:
    """P = p_e |<m|U_e|p>|^2 + p_g |<m|U_g|p>|^2.

    With ``convergence_check`` the run is repeated at twice the dimension and
    TruncationInsufficient is raised if the probability moves by more than
    1e-8 relative.
    """
    res = _run(config)
    if not config.convergence_check:
        return res
    big = _run(_doubled(config))
    delta = abs(big.probability - res.probability)
    if delta > CONVERGENCE_RTOL * abs(res.probability) + CONVERGENCE_ATOL:
        raise TruncationInsufficient(
            f"probability changes by {delta:.3e} when dim doubles from {config.space.dim}")
    return replace(res, convergence_delta=delta / max(abs(res.probability), 1e-300))


def joint_final_state(config: ProtocolConfig):
    """Evolved branch states U_e|p>, U_g|p> and the thermal weights."""
    space = config.space
    prep = as_state(space, config.prepared)
    joint = joint_hamiltonian(space, config.profile, config.method)
    t = config.time
    branches = tuple(prep.derive(_evolve(eig, t, prep.amplitudes), f"evolve_{b}(t={t:.6g})")
                     for b, eig in (("e", joint.eig_e), ("g", joint.eig_g)))
    return branches[0], branches[1], config.weights


# --- forward/reverse pairing -------------------------------------------------

@dataclass(frozen=True, eq=False)
class CrooksStates:
    """The four battery states of a forward/reverse pair.

    Forward prepares phi_i = G(T psi_i) and measures phi_f; reverse prepares
    psi_f = G(T phi_f) and measures psi_i, where G is the normalized Gibbs map.
    """

    psi_i: BatteryState
    phi_f: BatteryState
    phi_i: BatteryState
    psi_f: BatteryState
    Z_psi_i: float
    Z_phi_f: float


def crooks_states(space: FockSpace, psi_i, phi_f) -> CrooksStates:
    psi_i = as_state(space, psi_i)
    phi_f = as_state(space, phi_f)
    phi_i, z_i = apply_gibbs_weight(space, time_reverse(psi_i))
    psi_f, z_f = apply_gibbs_weight(space, time_reverse(phi_f))
    return CrooksStates(psi_i, phi_f, phi_i, psi_f, z_i, z_f)


@dataclass(frozen=True, eq=False)
class CrooksPair:
    forward: ProtocolResult
    reverse: ProtocolResult
    states: CrooksStates


def run_crooks_pair(space: FockSpace, profile, psi_i, phi_f, tau: float | None = None,
                    method: str = "quadrature", convergence_check: bool = False) -> CrooksPair:
    """Forward and reverse runs for the target states psi_i and phi_f."""
    st = crooks_states(space, psi_i, phi_f)
    common = dict(space=space, profile=profile, tau=tau, method=method,
                  convergence_check=convergence_check)
    fwd = run_protocol(ProtocolConfig(prepared=st.phi_i, measured=st.phi_f,
                                      direction=Direction.FORWARD, **common))
    rev = run_protocol(ProtocolConfig(prepared=st.psi_f, measured=st.psi_i,
                                      direction=Direction.REVERSE, **common))
    return CrooksPair(fwd, rev, st)
