import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from aqc.errors import ConfigInvalid, TruncationInsufficient, UnderflowRisk
from aqc.oscillator import (BatteryState, Cat, Coherent, FockLevel, FockSpace, SqueezedDisplaced,
                            apply_gibbs_weight, build_operators, coherent_overlap,
                            effective_energy, effective_potential, fidelity, from_amplitudes,
                            hermite_functions, is_hermitian, position_wavefunction,
                            prepare_state, squeezed_amplitudes, state_from_dict, time_reverse)

from conftest import random_amplitudes

finite = dict(allow_nan=False, allow_infinity=False)


def test_ladder_dim2():
    ops = FockSpace(dim=2).operators
    np.testing.assert_array_equal(ops.a, [[0, 1], [0, 0]])
    np.testing.assert_array_equal(ops.a_dagger, [[0, 0], [1, 0]])


def test_operators_are_read_only_and_hermitian():
    ops = FockSpace(dim=16).operators
    with pytest.raises(ValueError):
        ops.a[0, 0] = 1.0
    for m in (ops.number, ops.position, ops.momentum, ops.H_B):
        assert is_hermitian(m)


def test_commutator_lower_block():
    ops = FockSpace(dim=64).operators
    X, P = ops.position, ops.momentum
    C = X @ P - P @ X
    np.testing.assert_allclose(C[:32, :32], 0.5j * np.eye(32), atol=1e-8)


def test_hamiltonian_spectrum():
    sp = FockSpace(dim=10, hbar_omega=0.7)
    np.testing.assert_allclose(np.diag(sp.operators.H_B), 0.7 * (np.arange(10) + 0.5))
    np.testing.assert_allclose(sp.operators.number @ np.ones(10), np.arange(10))


@pytest.mark.parametrize("kwargs", [dict(dim=1), dict(dim=2.5), dict(kT=0.0),
                                    dict(kT=-1.0), dict(hbar_omega=0.0), dict(kT=np.inf)])
def test_fock_space_rejects_bad_input(kwargs):
    with pytest.raises(ConfigInvalid):
        FockSpace(**kwargs)


def test_from_chi():
    sp = FockSpace.from_chi(0.25, dim=8, hbar_omega=2.0)
    assert sp.kT == pytest.approx(4.0)
    assert sp.chi == pytest.approx(0.25)


def test_coherent_mean_position():
    sp = FockSpace(dim=256)
    s = prepare_state(sp, Coherent(3.0))
    assert s.expectation(sp.operators.position).real == pytest.approx(3.0, abs=1e-8)
    assert s.expectation(sp.operators.momentum).real == pytest.approx(0.0, abs=1e-12)


def test_coherent_zero_is_vacuum():
    s = prepare_state(FockSpace(dim=8), Coherent(0))
    np.testing.assert_array_equal(s.amplitudes, np.eye(8)[0])


def test_coherent_overlap():
    sp = FockSpace(dim=64)
    a, b = prepare_state(sp, Coherent(2)), prepare_state(sp, Coherent(1))
    assert fidelity(a, b) == pytest.approx(np.exp(-1), rel=1e-12)
    assert abs(coherent_overlap(1, 2)) ** 2 == pytest.approx(0.36787944117144233)
    assert a.overlap(b) == pytest.approx(coherent_overlap(2, 1), rel=1e-12)


def test_cat_norm():
    from aqc.oscillator import _analytic_amplitudes
    _, norm2 = _analytic_amplitudes(64, Cat.of(2, -2))
    assert norm2 == pytest.approx(2 + 2 * np.exp(-8), rel=1e-14)
    s = prepare_state(FockSpace(dim=64), Cat.of(2, -2))
    assert s.norm == pytest.approx(1.0)
    # even cat lives on even levels
    assert np.max(np.abs(s.amplitudes[1::2])) < 1e-15


def test_truncation_rejected():
    with pytest.raises(TruncationInsufficient):
        prepare_state(FockSpace(dim=16), Coherent(5))


def test_fock_level():
    s = prepare_state(FockSpace(dim=8), FockLevel(3))
    assert s.amplitudes[3] == 1
    with pytest.raises(ConfigInvalid):
        FockLevel(-1)


@pytest.mark.parametrize("alpha,r", [(0, 0.5), (1.5, -0.7), (1 - 0.5j, 1.0), (-2j, 0.3)])
def test_squeezed_matches_dense_oracle(alpha, r):
    big = 120
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    ad = a.T
    vac = np.eye(big)[0]
    D = expm(alpha * ad - np.conj(alpha) * a)
    S = expm(r / 2 * (a @ a - ad @ ad))
    want = (D @ S @ vac)[:40]
    got = squeezed_amplitudes(40, alpha, r)
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_squeezed_variance():
    sp = FockSpace(dim=128)
    X = sp.operators.position
    for r in (-1.0, 0.0, 1.0):
        s = prepare_state(sp, SqueezedDisplaced(1.0, r))
        m = s.expectation(X).real
        var = s.expectation(X @ X).real - m ** 2
        assert var == pytest.approx(np.exp(-2 * r) / 4, rel=1e-10)


@pytest.mark.parametrize("spec", [Coherent(1 + 2j), SqueezedDisplaced(0.5j, -0.3),
                                  Cat.of(1, -1j, weights=[1, 2j]), FockLevel(2)])
def test_state_dict_roundtrip(spec):
    assert state_from_dict(spec.to_dict()) == spec


def test_state_from_dict_errors():
    for bad in ({"alpha": 1}, {"kind": "nope"}, {"kind": "coherent"}, "coherent"):
        with pytest.raises(ConfigInvalid):
            state_from_dict(bad)


# --- Gibbs map --------------------------------------------------------------

def test_gibbs_vacuum():
    sp = FockSpace.from_chi(0.7, dim=16)
    vac = prepare_state(sp, Coherent(0))
    w, z = apply_gibbs_weight(sp, vac)
    assert fidelity(w, vac) == pytest.approx(1.0)
    assert z == pytest.approx(np.exp(-0.7), rel=1e-14)


def test_gibbs_coherent_closed_form():
    sp = FockSpace.from_chi(0.5, dim=128)
    w, z = apply_gibbs_weight(sp, prepare_state(sp, Coherent(2)))
    assert fidelity(w, prepare_state(sp, Coherent(2 * np.exp(-0.5)))) > 1 - 1e-10
    assert z == pytest.approx(np.exp(-0.5) * np.exp(-4 * (1 - np.exp(-1))), rel=1e-12)
    # dense matrix exponential cross-check
    psi = prepare_state(sp, Coherent(2)).amplitudes
    z_dense = np.vdot(psi, expm(-np.asarray(sp.operators.H_B) / sp.kT) @ psi).real
    assert z == pytest.approx(z_dense, rel=1e-12)


def test_gibbs_high_temperature_is_identity():
    sp = FockSpace(dim=32, kT=1e12)
    s = from_amplitudes(random_amplitudes(np.random.default_rng(3), 32, 20))
    w, z = apply_gibbs_weight(sp, s)
    assert fidelity(w, s) == pytest.approx(1.0, abs=1e-12)
    assert z == pytest.approx(1.0, abs=1e-9)


def test_gibbs_records_history():
    sp = FockSpace(dim=16)
    w, _ = apply_gibbs_weight(sp, time_reverse(prepare_state(sp, Coherent(1j))))
    assert w.history == ("time_reverse", "gibbs(kT=1.0)")
    assert w.recipe == Coherent(1j)


def test_gibbs_underflow():
    sp = FockSpace(dim=2000, kT=0.001)
    s = prepare_state(sp, FockLevel(1500))
    with pytest.raises(UnderflowRisk):
        apply_gibbs_weight(sp, s)


# --- time reversal -------------------------------------------------------------

def test_time_reverse_coherent():
    sp = FockSpace(dim=64)
    s = time_reverse(prepare_state(sp, Coherent(1 + 2j)))
    assert fidelity(s, prepare_state(sp, Coherent(1 - 2j))) == pytest.approx(1.0, abs=1e-14)


def test_time_reverse_real_fixed_point():
    s = prepare_state(FockSpace(dim=32), Coherent(1.3))
    np.testing.assert_array_equal(time_reverse(s).amplitudes, s.amplitudes)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_time_reverse_involution(seed):
    s = from_amplitudes(random_amplitudes(np.random.default_rng(seed), 24))
    np.testing.assert_allclose(time_reverse(time_reverse(s)).amplitudes, s.amplitudes, atol=1e-14)


# --- effective potential ---------------------------------------------------------

@pytest.mark.parametrize("n", [0, 1, 5, 30])
def test_etilde_eigenstate(n):
    sp = FockSpace(dim=64, kT=0.37, hbar_omega=1.3)
    assert effective_potential(sp, prepare_state(sp, FockLevel(n))) == pytest.approx(1.3 * (n + 0.5), rel=1e-13)


def test_etilde_high_temperature():
    sp = FockSpace.from_chi(1e-6, dim=128)
    s = prepare_state(sp, Coherent(2 - 1j))
    mean = s.expectation(sp.operators.H_B).real
    assert abs(effective_potential(sp, s) - mean) < 1e-4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 2 * np.pi))
def test_etilde_phase_independent(seed, theta):
    sp = FockSpace(dim=24, kT=0.8)
    v = random_amplitudes(np.random.default_rng(seed), 24)
    a = effective_energy(v, sp.energies, sp.kT)
    b = effective_energy(np.exp(1j * theta) * v, sp.energies, sp.kT)
    assert a == pytest.approx(b, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 20, **finite))
def test_etilde_below_mean_energy(seed, kT):
    sp = FockSpace(dim=24, kT=kT)
    v = random_amplitudes(np.random.default_rng(seed), 24)
    mean = float(np.sum(np.abs(v) ** 2 * sp.energies))
    assert effective_energy(v, sp.energies, kT) <= mean * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-5, 5, **finite), st.floats(0.1, 10, **finite))
def test_etilde_shift_and_scale(seed, delta, lam):
    sp = FockSpace(dim=20, kT=0.9)
    v = random_amplitudes(np.random.default_rng(seed), 20)
    e0 = effective_energy(v, sp.energies, sp.kT)
    assert effective_energy(v, sp.energies + delta, sp.kT) == pytest.approx(e0 + delta, abs=1e-10)
    assert effective_energy(v, lam * sp.energies, lam * sp.kT) == pytest.approx(lam * e0, rel=1e-12)


# --- position representation -----------------------------------------------------

def test_hermite_orthonormal():
    x, w = np.polynomial.hermite.hermgauss(150)
    phi = hermite_functions(100, x) * np.exp(x ** 2 / 2)
    G = (phi * w) @ phi.T
    np.testing.assert_allclose(G, np.eye(100), atol=1e-11)


def test_hermite_far_tail_no_overflow():
    vals = hermite_functions(600, np.array([0.0, 30.0, -40.0]))
    assert np.all(np.isfinite(vals))


def test_position_wavefunction_coherent():
    sp = FockSpace(dim=64)
    s = prepare_state(sp, Coherent(1.5))
    x = np.linspace(-6, 10, 2001)
    dens = np.abs(position_wavefunction(s, x)) ** 2
    # x = sqrt(2) X, so the packet sits at sqrt(2) * 1.5 with unit-width Gaussian
    want = np.exp(-(x - np.sqrt(2) * 1.5) ** 2) / np.sqrt(np.pi)
    np.testing.assert_allclose(dens, want, atol=1e-12)


def test_battery_state_read_only():
    s = BatteryState(np.array([1, 0], dtype=complex))
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0
    with pytest.raises(ConfigInvalid):
        from_amplitudes(np.zeros(3))


def test_build_operators_matches_cached():
    sp = FockSpace(dim=12)
    for a, b in zip(build_operators(sp), sp.operators):
        np.testing.assert_array_equal(a, b)
