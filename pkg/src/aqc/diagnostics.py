"""Error measures for the autonomous Crooks equality, q inference, operator-identity oracle."""
from __future__ import annotations

import cmath
from dataclasses import asdict, dataclass
from decimal import Decimal, localcontext

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .dynamics import CrooksPair, Direction, ProtocolResult, run_crooks_pair
from .errors import ConfigInvalid, ConfigMismatch, DegenerateRatio, UndefinedQ, UnderflowRisk
from .oscillator import (FockSpace, apply_gibbs_weight, effective_energy, effective_potential,
                         fidelity, from_amplitudes, time_reverse)
from .predictions import (CrooksPrediction, TwoLevelSystem, predicted_ratio, work_from_energies)
from .splitting import JointHamiltonian, end_values, joint_hamiltonian

PAIRING_TOL = 1e-8


@dataclass(frozen=True)
class ErrorReport:
    D: float
    epsilon_i: float
    epsilon_f: float
    R: float
    one_minus_R: float

    @property
    def epsilon(self) -> float:
        return self.epsilon_i + self.epsilon_f

    def as_dict(self) -> dict:
        return {**asdict(self), "epsilon": self.epsilon}


# --- factorisation errors -----------------------------------------------------

def trace_norm(M: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def rank2_trace_norm(u: np.ndarray, v: np.ndarray) -> float:
    """|| u u^dag - v v^dag ||_1 in closed form."""
    a, b = np.vdot(u, u).real, np.vdot(v, v).real
    c = abs(np.vdot(u, v)) ** 2
    return float(np.sqrt(max((a + b) ** 2 - 4 * c, 0.0)))


def _block_vectors(space: FockSpace, joint: JointHamiltonian, psi, E: float):
    """Pairs (u, v) per block with u = e^{-H_s/2kT} psi and v = e^{-(sE + H_B)/2kT} psi.

    Both vectors are scaled by a common factor e^{shift/2kT}; the shift is returned.
    """
    kT = space.kT
    psi = psi.amplitudes
    blocks = [(1, *joint.eig_e), (-1, *joint.eig_g)]
    shift = min(min(lam[0] for _, lam, _ in blocks), space.energies[0] - abs(E))
    pairs = []
    with np.errstate(under="ignore"):
        for sign, lam, Q in blocks:
            u = Q @ (np.exp(-(lam - shift) / (2 * kT)) * (Q.conj().T @ psi))
            v = np.exp(-(sign * E + space.energies - shift) / (2 * kT)) * psi
            pairs.append((u, v))
    return pairs, shift


def _epsilon(space, joint, psi, E, method):
    pairs, shift = _block_vectors(space, joint, psi, E)
    scale_log = -shift / space.kT
    total = 0.0
    for u, v in pairs:
        if method == "svd":
            total += trace_norm(np.outer(u, u.conj()) - np.outer(v, v.conj()))
        else:
            total += rank2_trace_norm(u, v)
    if scale_log < np.log(1e-300):
        raise UnderflowRisk("Gibbs weights fall below double-precision range")
    return float(total * np.exp(scale_log))


def factorisation_errors(space: FockSpace, joint: JointHamiltonian, psi_i, phi_f,
                         sys: TwoLevelSystem, method: str = "svd") -> tuple[float, float]:
    """(eps_i, eps_f): trace-norm gap between the exact and product Gibbs weightings.

    Computed per block: e^{-H_e/2kT} vs e^{-(E + H_B)/2kT} and e^{-H_g/2kT} vs
    e^{-(-E + H_B)/2kT}, with E = E_i for psi_i and E_f for phi_f.
    ``method="rank2"`` uses the closed form for a difference of two projectors.
    """
    if method not in ("svd", "rank2"):
        raise ConfigInvalid(f"unknown trace-norm method {method!r}")
    return (_epsilon(space, joint, psi_i, sys.E_i, method),
            _epsilon(space, joint, phi_f, sys.E_f, method))


# --- D, R and q ---------------------------------------------------------------

def check_pairing(forward: ProtocolResult, reverse: ProtocolResult) -> None:
    """Forward must prepare G(T psi_i) and reverse must prepare G(T phi_f)."""
    if forward.direction is not Direction.FORWARD or reverse.direction is not Direction.REVERSE:
        raise ConfigMismatch("expected a forward and a reverse result")
    fc, rc = forward.config, reverse.config
    if fc.space != rc.space or fc.profile != rc.profile or fc.time != rc.time:
        raise ConfigMismatch("forward and reverse runs use different spaces, profiles or times")
    space = fc.space
    want_phi_i = apply_gibbs_weight(space, time_reverse(reverse.measured))[0]
    want_psi_f = apply_gibbs_weight(space, time_reverse(forward.measured))[0]
    if fidelity(want_phi_i, forward.prepared) < 1 - PAIRING_TOL:
        raise ConfigMismatch("forward prepared state is not the Gibbs image of T psi_i")
    if fidelity(want_psi_f, reverse.prepared) < 1 - PAIRING_TOL:
        raise ConfigMismatch("reverse prepared state is not the Gibbs image of T phi_f")


def discrepancy_D(forward: ProtocolResult, reverse: ProtocolResult, Z_tilde_psi_i: float,
                  Z_tilde_phi_f: float, sys: TwoLevelSystem) -> float:
    """|Z_i Z~(psi_i) P_fwd - Z_f Z~(phi_f) P_rev| with Z = 2 cosh(E/kT)."""
    check_pairing(forward, reverse)
    return float(abs(sys.Z_i * Z_tilde_psi_i * forward.probability
                     - sys.Z_f * Z_tilde_phi_f * reverse.probability))


def _log_ratio(forward, reverse) -> float:
    if not reverse.probability >= 1e-300:
        raise DegenerateRatio(f"reverse probability {reverse.probability:.3e} is unmeasurable")
    if not forward.probability > 0:
        raise DegenerateRatio("forward probability is zero")
    return float(np.log(forward.probability) - np.log(reverse.probability))


def ratio_R(forward: ProtocolResult, reverse: ProtocolResult,
            prediction: CrooksPrediction) -> tuple[float, float]:
    """R = (P_fwd/P_rev) / predicted ratio, and 1 - R."""
    R = float(np.exp(_log_ratio(forward, reverse) - np.log(prediction.predicted_ratio)))
    return R, 1.0 - R


def infer_q(forward: ProtocolResult, reverse: ProtocolResult, delta_F: float, W_q: float,
            kT: float) -> float:
    """q = (kT / W_q) ln[(P_fwd/P_rev) e^{dF/kT}]."""
    if W_q == 0:
        raise UndefinedQ("W_q = 0, q is undefined")
    return float(kT / W_q * (_log_ratio(forward, reverse) + delta_F / kT))


# --- one-stop analysis ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AQCAnalysis:
    pair: CrooksPair
    system: TwoLevelSystem
    prediction: CrooksPrediction
    errors: ErrorReport
    q_inferred: float | None

    @property
    def forward(self):
        return self.pair.forward

    @property
    def reverse(self):
        return self.pair.reverse

    def as_dict(self) -> dict:
        return {"P_forward": self.forward.probability,
                "P_reverse": self.reverse.probability,
                "delta_F": self.prediction.delta_F,
                "delta_E_tilde": self.prediction.delta_E_tilde,
                "predicted_ratio": self.prediction.predicted_ratio,
                "W_q": self.prediction.W_q,
                "q_predicted": self.prediction.q,
                "q_inferred": self.q_inferred,
                **self.errors.as_dict()}


def analyse(space: FockSpace, profile, psi_i, phi_f, tau: float | None = None,
            method: str = "quadrature", convergence_check: bool = False,
            with_epsilon: bool = True) -> AQCAnalysis:
    """Run the forward/reverse pair for targets psi_i, phi_f and evaluate every error measure."""
    pair = run_crooks_pair(space, profile, psi_i, phi_f, tau, method, convergence_check)
    st = pair.states
    E_i, E_f = end_values(profile)
    sys = TwoLevelSystem(E_i, E_f, space.kT)
    H = space.operators.H_B
    dE = effective_potential(space, st.psi_i) - effective_potential(space, st.phi_f)
    energies = [s.expectation(H).real for s in (st.phi_i, st.phi_f, st.psi_f, st.psi_i)]
    W_q = work_from_energies(*energies)
    if abs(W_q) <= 1e-13 * max(map(abs, energies)):
        W_q = 0.0  # equal-magnitude pairs: only rounding noise is left
    pred = predicted_ratio(sys, dE, W_q, space.hbar_omega)
    D = discrepancy_D(pair.forward, pair.reverse, st.Z_psi_i, st.Z_phi_f, sys)
    if with_epsilon:
        eps_i, eps_f = factorisation_errors(space, joint_hamiltonian(space, profile, method),
                                            st.psi_i, st.phi_f, sys)
    else:
        eps_i = eps_f = float("nan")
    R, omr = ratio_R(pair.forward, pair.reverse, pred)
    q = None
    if W_q != 0:
        q = infer_q(pair.forward, pair.reverse, pred.delta_F, W_q, space.kT)
    return AQCAnalysis(pair, sys, pred, ErrorReport(D, eps_i, eps_f, R, omr), q)


# --- operator-identity oracle -----------------------------------------------------

def _exp_a2(c: float, dim: int) -> np.ndarray:
    """exp(c a^2) exactly: entry (i, i+2p) = c^p sqrt((i+2p)!/i!) / p!."""
    M = np.zeros((dim, dim))
    for i in range(dim):
        p = np.arange((dim - 1 - i) // 2 + 1)
        k = i + 2 * p
        mag = np.exp(0.5 * (gammaln(k + 1) - gammaln(i + 1)) - gammaln(p + 1))
        M[i, k] = mag * np.power(float(c), p)
    return M


def _identity6_lhs(m: float, n: float, size: int, prec: int = 60) -> np.ndarray:
    """Lower block of exp(m a^2) exp(n a^dag^2), summed exactly in extended precision.

    Entry (i, j) is sum_k m^p n^q k! / (p! q! sqrt(i! j!)) with k = i + 2p = j + 2q.
    The terms are large and alternate for mn < 0, so double precision cancels badly.
    """
    out = np.zeros((size, size))
    with localcontext() as ctx:
        ctx.prec = prec
        dm, dn = Decimal(m), Decimal(n)
        tiny = Decimal(10) ** (-prec + 10)
        fact = [Decimal(1)]
        for k in range(1, size):
            fact.append(fact[-1] * k)
        for i in range(size):
            for j in range(size):
                if (i - j) % 2:
                    continue
                k = max(i, j)
                p, q = (k - i) // 2, (k - j) // 2
                # first term, then ratios term_{k+2}/term_k
                term = (dm ** p if p else 1) * (dn ** q if q else 1) * (fact[k] / (fact[p] * fact[q]))
                total = term
                while True:
                    ratio = dm * dn * (k + 1) * (k + 2) / ((p + 1) * (q + 1))
                    term *= ratio
                    k, p, q = k + 2, p + 1, q + 1
                    total += term
                    if abs(ratio) < 1 and abs(term) <= tiny * abs(total):
                        break
                out[i, j] = float(total / (fact[i] * fact[j]).sqrt())
    return out


def identity_oracle(dim: int = 64, m: float = 0.2, n: float = 0.1, pad: int = 4) -> dict:
    """Max residual over the lower dim/2 block for each exponential identity.

    1. e^{m N} e^{n a^dag} e^{-m N} = e^{n e^m a^dag}
    2. e^{m a} e^{n a^dag} = e^{mn} e^{n a^dag} e^{m a}
    3. e^{m a^2} e^{n a^dag} = e^{m n^2} e^{n a^dag} e^{m a^2} e^{2mn a}
    4. e^{(m a^2 + n a^dag^2)/2} = cos(z)^{-1/2} e^{n t a^dag^2 / 2} e^{-ln cos(z) N} e^{m t a^2 / 2}
    5. e^{(m a^2 + n a^dag^2)/2} = cos(z)^{1/2} e^{m t a^2 / 2} e^{ln cos(z) N} e^{n t a^dag^2 / 2}
    6. e^{m a^2} e^{n a^dag^2} = (1-4mn)^{-1/2} e^{n a^dag^2/(1-4mn)} (1-4mn)^{-N} e^{m a^2/(1-4mn)}

    with z = sqrt(mn) and t = tan(z)/z. Residuals are max |L - R| over the
    block divided by max(1, max |L|): for mn > 0 the entries of 3 and 6 grow
    large, and only the relative size of the mismatch is meaningful. Matrix exponentials are taken in a space
    ``pad`` times larger than ``dim`` so truncation at the top does not leak
    into the reported block. Key ``"6_prefactor"`` compares the vacuum entry of
    the left side of 6 with (1-4mn)^{-1/2}.
    """
    if abs(m) > 0.3 or abs(n) > 0.3:
        raise ConfigInvalid("identity oracle needs |m|, |n| <= 0.3")
    if dim < 2:
        raise ConfigInvalid("dim must be >= 2")
    m, n = float(m), float(n)
    big = dim * pad
    h = dim // 2
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    ad = a.T
    N = np.diag(np.arange(big, dtype=float))
    a2, ad2 = a @ a, ad @ ad
    E = expm

    def res(L, R):
        L, R = L[:h, :h], R[:h, :h]
        return float(np.max(np.abs(L - R)) / max(1.0, np.max(np.abs(L))))

    z = cmath.sqrt(m * n)
    t = cmath.tan(z) / z if abs(z) > 1e-12 else 1.0
    c = cmath.cos(z)
    out = {}
    out[1] = res(E(m * N) @ E(n * ad) @ E(-m * N), E(n * np.exp(m) * ad))
    out[2] = res(E(m * a) @ E(n * ad), np.exp(m * n) * E(n * ad) @ E(m * a))
    out[3] = res(E(m * a2) @ E(n * ad), np.exp(m * n * n) * E(n * ad) @ E(m * a2) @ E(2 * m * n * a))
    S = E(0.5 * (m * a2 + n * ad2))
    out[4] = res(S, c ** -0.5 * E(0.5 * n * t * ad2) @ E(-cmath.log(c) * N) @ E(0.5 * m * t * a2))
    out[5] = res(S, c ** 0.5 * E(0.5 * m * t * a2) @ E(cmath.log(c) * N) @ E(0.5 * n * t * ad2))
    k = 1 - 4 * m * n
    lhs6 = _identity6_lhs(m, n, h)
    rhs6 = (k ** -0.5 * _exp_a2(n / k, h).T @ np.diag(k ** -np.arange(h, dtype=float))
            @ _exp_a2(m / k, h))
    out[6] = res(lhs6, rhs6)
    out["6_prefactor"] = float(abs(lhs6[0, 0] - k ** -0.5))
    return out


# --- effective-potential property suite ---------------------------------------

def structured_states(space: FockSpace, count: int = 100) -> list:
    """A deterministic, varied family of normalized states (no RNG involved).

    Parameters come from a golden-ratio sequence; amplitudes are Gaussian
    envelopes in n with quadratic phases, spanning low and moderately high energies.
    """
    g = (np.sqrt(5) - 1) / 2
    n = np.arange(space.dim)
    out = []
    for k in range(count):
        u, v, w = (k * g) % 1, (k * g * g) % 1, (k * np.sqrt(2)) % 1
        centre = u * space.dim / 4
        width = 0.5 + 6 * v
        env = np.exp(-0.5 * ((n - centre) / width) ** 2)
        out.append(from_amplitudes(env * np.exp(2j * np.pi * (w * n + v * n ** 2 / 7))))
    return out


def etilde_property_suite(space: FockSpace, states=None) -> dict:
    """Worst relative residual for each effective-potential property.

    1 shifting H by d shifts E~ by d; 2 scaling H and T by l scales E~ by l;
    3 E~ of a Fock state is its energy; 4 at chi = 1e-6, E~ equals <H> - Var(H)/2kT
    up to third order; 5 E~ <= <H> (residual is the worst violation);
    6 a global phase leaves E~ unchanged.
    """
    states = structured_states(space) if states is None else states
    H, kT = np.asarray(space.energies), space.kT
    res = {k: 0.0 for k in range(1, 7)}

    def rel(a, b):
        return abs(a - b) / max(abs(a), abs(b), 1e-300)

    for st in states:
        c = st.amplitudes
        e = effective_energy(c, H, kT)
        mean = float(np.sum(np.abs(c) ** 2 * H))
        for d in (-3.0, 0.7, 25.0):
            res[1] = max(res[1], rel(effective_energy(c, H + d, kT), e + d))
        for lam in (0.3, 2.0, 11.0):
            res[2] = max(res[2], rel(effective_energy(c, lam * H, lam * kT), lam * e))
        hot = space.hbar_omega / (2 * 1e-6)
        var = float(np.sum(np.abs(c) ** 2 * H ** 2)) - mean ** 2
        res[4] = max(res[4], rel(effective_energy(c, H, hot), mean - var / (2 * hot)))
        res[5] = max(res[5], max(0.0, e - mean) / mean)
        for theta in (0.4, 2.0, -1.1):
            res[6] = max(res[6], rel(effective_energy(np.exp(1j * theta) * c, H, kT), e))
    for n in range(space.dim // 2):
        v = np.zeros(space.dim)
        v[n] = 1.0
        res[3] = max(res[3], rel(effective_energy(v, H, kT), H[n]))
    return res
