import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm
from scipy.special import eval_hermite

from nlgpe import (OverflowRisk, ParamSet, QuadraticModel, derive_effective, make_grid,
                   residual)
from nlgpe.closedform import (MAX_NU, adaptive_simpson, action_phase, action_rate, annihilation,
                              cauchy_matrix, creation, exact_psi_nu, exact_psi_nu_family,
                              fock_state, germ_generator, hermite, ladder_frame,
                              oscillator_state, phase_rate, stationary_c5, weighted_momentum,
                              _weight_rate)
from nlgpe.grid import momentum

from conftest import REF


def test_cauchy_identity_at_zero(model, eff):
    assert np.array_equal(cauchy_matrix(0.0, eff, model), np.eye(2))


def test_cauchy_pure_rotation():
    m = QuadraticModel(mu=1.0, rho=0.0, sigma=1.0)
    e = derive_effective(m)
    t = 0.7
    assert np.allclose(cauchy_matrix(t, e, m),
                       [[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]], atol=1e-15)


@given(st.floats(-20, 20))
def test_cauchy_is_matrix_exponential(t):
    e = derive_effective(REF)
    M = cauchy_matrix(t, e, REF)
    assert np.allclose(M, expm(germ_generator(e, REF) * t), rtol=0, atol=1e-12)
    assert np.linalg.det(M) == pytest.approx(1.0, abs=1e-12)


def test_ladder_frame(model, eff):
    fr0 = ladder_frame(0.0, eff, model)
    assert fr0.wronskian() == pytest.approx(2j, abs=1e-14)
    h = 1e-5
    for t in (0.0, 1.3, -2.2):
        fr = ladder_frame(t, eff, model)
        assert fr.wronskian() == pytest.approx(2j, abs=1e-14)
        fp, fm = ladder_frame(t + h, eff, model), ladder_frame(t - h, eff, model)
        dB, dC = (fp.B - fm.B) / (2 * h), (fp.C - fm.C) / (2 * h)
        G = germ_generator(eff, model)
        assert abs(dB - (G[0, 0] * fr.B + G[0, 1] * fr.C)) < 1e-8
        assert abs(dC - (G[1, 0] * fr.B + G[1, 1] * fr.C)) < 1e-8


def test_ladder_frame_simple_case():
    m = QuadraticModel(mu=1.0, rho=0.0, sigma=1.0)
    fr = ladder_frame(0.0, derive_effective(m), m)
    assert fr.B == pytest.approx(1j) and fr.C == pytest.approx(1.0)


def test_hermite_values():
    assert hermite(2, 1.0) == 2.0
    assert hermite(3, 0.5) == -5.0
    assert hermite(2, 1j) == -6
    assert hermite(0, 3.0) == 1.0
    z = np.linspace(-3, 3, 41)
    for n in range(12):
        assert np.allclose(hermite(n, z), eval_hermite(n, z), rtol=1e-13, atol=1e-13)


def test_hermite_limits():
    hermite(MAX_NU, 0.3)
    with pytest.raises(OverflowRisk):
        hermite(MAX_NU + 1, 0.3)
    with pytest.raises(ValueError):
        hermite(-1, 0.3)


def test_fock_orthonormal(model, eff):
    g = make_grid(model, eff, d22_max=stationary_c5(8, eff, model))
    states = np.array([fock_state(n, 0.4, 1.0, eff, model, g).samples for n in range(9)])
    gram = states.conj() @ states.T * g.dx
    assert np.max(np.abs(gram - np.eye(9))) < 1e-12


def test_oscillator_space_derivative(model, eff):
    y = np.linspace(-2, 2, 9)
    h = 1e-6
    for nu in (0, 3):
        _, dv = oscillator_state(nu, y, 0.3, eff, model, derivative=True)
        fd = (oscillator_state(nu, y + h, 0.3, eff, model)
              - oscillator_state(nu, y - h, 0.3, eff, model)) / (2 * h)
        assert np.max(np.abs(dv - fd)) < 1e-7


def test_ladder_operators(model, eff):
    g = make_grid(model, eff, d22_max=stationary_c5(6, eff, model))
    t = 0.37
    phi = [oscillator_state(n, g.x, t, eff, model) for n in range(6)]
    assert np.max(np.abs(annihilation(phi[0], g, t, eff, model))) < 1e-10
    for n in range(5):
        up = creation(phi[n], g, t, eff, model)
        down = annihilation(phi[n + 1], g, t, eff, model)
        assert np.max(np.abs(up - math.sqrt(n + 1) * phi[n + 1])) < 1e-10
        assert np.max(np.abs(down - math.sqrt(n + 1) * phi[n])) < 1e-10
    f = phi[2] + 0.5 * phi[3]
    comm = (annihilation(creation(f, g, t, eff, model), g, t, eff, model)
            - creation(annihilation(f, g, t, eff, model), g, t, eff, model))
    assert np.max(np.abs(comm - f)) < 1e-10


def test_weighted_momentum_agrees_with_plain(model, eff):
    g = make_grid(model, eff)
    f = oscillator_state(2, g.x, 0.0, eff, model)
    plain = momentum(f, g, model.hbar)
    for beta in (0.0, 0.05, _weight_rate(f, g, 0.2, eff, model)):
        assert np.max(np.abs(weighted_momentum(f, g, model.hbar, beta, 0.2) - plain)) < 1e-11


def test_adaptive_simpson():
    assert adaptive_simpson(math.sin, 0, math.pi, 1e-12) == pytest.approx(2.0, abs=1e-11)
    assert adaptive_simpson(lambda s: s ** 3, 0, 2, 1e-12) == pytest.approx(4.0, abs=1e-14)


def test_action_of_stationary_orbit(model, eff):
    for nu in (0, 3):
        c5 = stationary_c5(nu, eff, model)
        for t in (0.5, 4.0, -1.5):
            s = action_phase(t, ParamSet(c5=c5), eff, model)
            assert s == pytest.approx(-eff.kappa_tilde * model.c * c5 * t / 2, rel=1e-12)


def test_action_gauss_legendre_oracle(model, eff):
    C = ParamSet(0.4, -0.3, 0.15, -0.2, 1.1)
    nodes, weights = np.polynomial.legendre.leggauss(200)
    f = np.vectorize(lambda s: action_rate(s, C, eff, model))
    ts = np.array([0.3, 2.0, 9.5, -3.0])
    got = action_phase(ts, C, eff, model)
    for t, s in zip(ts, got):
        ref = 0.5 * t * np.sum(weights * f(0.5 * t * (nodes + 1)))
        assert abs(s - ref) < 1e-11 * max(1.0, abs(ref))
    assert action_phase(0.0, C, eff, model) == 0.0
    assert action_phase(2.0, C, eff, model) == pytest.approx(got[1], abs=1e-11)


def test_phase_rate_kappa_zero_limit():
    m = REF.replace(kappa=0.0)
    e = derive_effective(m)
    om = math.sqrt(m.mu * m.sigma - m.rho ** 2)
    assert e.omega == pytest.approx(om, rel=1e-15)
    for nu in range(4):
        assert phase_rate(nu, e, m) == pytest.approx((nu + 0.5) * om, rel=1e-15)


def test_phase_rate_frozen():
    e = derive_effective(REF)
    # sigma_tilde = 1.3, Omega = sqrt(1.3 - 0.09) = sqrt(1.21) = 1.1
    assert e.omega == pytest.approx(1.1, rel=1e-15)
    assert phase_rate(0, e, REF) == pytest.approx(0.5 * (0.2 * 0.4 / 2.2 + 1.1), rel=1e-15)


def test_psi_nu_norm_and_density(model, eff):
    g = make_grid(model, eff, d22_max=stationary_c5(5, eff, model))
    for nu in (0, 2, 5):
        a = exact_psi_nu(nu, 0.0, eff, model, g)
        b = exact_psi_nu(nu, 3.1, eff, model, g)
        assert a.norm_sq() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(np.abs(a.samples), np.abs(b.samples), atol=1e-14)
        j = int(np.argmax(np.abs(a.samples)))
        ratio = b.samples[j] / a.samples[j]
        assert np.angle(ratio) == pytest.approx(
            np.angle(np.exp(-1j * phase_rate(nu, eff, model) * 3.1)), abs=1e-10)


def test_psi_nu_derivative_matches_fd(model, eff):
    g = make_grid(model, eff)
    fam = exact_psi_nu_family(1, eff, model, g)
    h = 1e-6
    fd = (fam(0.5 + h).samples - fam(0.5 - h).samples) / (2 * h)
    assert np.max(np.abs(fd - fam.derivative(0.5))) < 1e-8


def test_psi_nu_solves_equation(model, eff):
    g = make_grid(model, eff, d22_max=stationary_c5(4, eff, model))
    for nu in (0, 4):
        assert residual(exact_psi_nu_family(nu, eff, model, g), 1.2, model).relative_residual < 1e-10


def test_wrong_variance_is_not_a_solution(model, eff):
    g = make_grid(model, eff)
    c5 = 1.3 * stationary_c5(0, eff, model)
    from nlgpe.closedform import TimeFamily
    fam = TimeFamily(lambda t: fock_state(0, t, c5, eff, model, g))
    if model.kappa * model.c != 0:
        assert residual(fam, 0.8, model).relative_residual > 1e-4
