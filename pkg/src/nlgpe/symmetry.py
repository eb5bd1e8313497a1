"""Intertwining and nonlinear symmetry operators in one dimension.

Solutions of the associated linear equation with constants C are written as
K(C) phi with

    (K(C) phi)(x) = exp{i/hbar [S(t,C) + P(t,C)(x - X(t,C))]} phi(x - X(t,C)),

where phi solves the C-independent quadratic equation.  The fundamental
intertwiner from constants C to C' is

    D = exp{i/(2 hbar) dX0 (P0' + P0)} K(C') exp{i b^/hbar} K(C)^{-1},

b^ = b_x p - b_p x, with the germ vector b solving the linear Hamiltonian
system from b(0) = Z0(C') - Z0(C).  The constant phase makes D the identity
at t = 0 for every pair of constants.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Mapping

import numpy as np

from .closedform import (TimeFamily, action_phase, action_rate, cauchy_matrix,
                         creation, oscillator_state, stationary_c5)
from .grid import Grid, WaveFunction, check_edges, shift
from .model import EffectiveParams, QuadraticModel
from .moments import (ParamSet, first_moment_rates, fit_constants, hes_analytic_1d,
                      moments_from_wavefunction)


@dataclass(frozen=True)
class GermVector:
    b_p: float
    b_x: float


def initial_point(C: ParamSet, eff, model):
    """Phase point ``(P0, X0)`` of the orbit at t = 0."""
    return (eff.omega_bar * C.c1 - model.rho * C.c2) / model.mu, C.c2


def germ_vector(t: float, C_from: ParamSet, C_to: ParamSet, eff: EffectiveParams,
                model: QuadraticModel) -> GermVector:
    dc1, dc2 = C_to.c1 - C_from.c1, C_to.c2 - C_from.c2
    b0 = np.array([(eff.omega_bar * dc1 - model.rho * dc2) / model.mu, dc2])
    bp, bx = cauchy_matrix(t, eff, model) @ b0
    return GermVector(float(bp), float(bx))


def intertwiner_apply(phi: WaveFunction, t: float, C_from: ParamSet, C_to: ParamSet,
                      eff: EffectiveParams, model: QuadraticModel) -> WaveFunction:
    """Map a solution of the linear equation with ``C_from`` to one with ``C_to``.

    Translations are applied as a single spectral phase ramp; everything else
    is pointwise multiplication.
    """
    hb = model.hbar
    grid = phi.grid
    src = hes_analytic_1d(t, C_from, eff, model)
    dst = hes_analytic_1d(t, C_to, eff, model)
    b = germ_vector(t, C_from, C_to, eff, model)
    p0, x0 = initial_point(C_from, eff, model)
    p0n, x0n = initial_point(C_to, eff, model)
    s_src = action_phase(t, C_from, eff, model) if t else 0.0
    s_dst = action_phase(t, C_to, eff, model) if t else 0.0

    d = dst.x - src.x - b.b_x
    u = grid.x - dst.x + b.b_x  # argument after the outer translation
    theta = (s_dst + dst.p * (grid.x - dst.x) + 0.5 * b.b_x * b.b_p
             - b.b_p * u - s_src - src.p * u + 0.5 * (x0n - x0) * (p0n + p0)) / hb
    out = phi.with_samples(np.exp(1j * theta) * shift(phi.samples, grid, d))
    check_edges(out)
    return out


def _level(c5: float, eff, model) -> int:
    m = c5 * eff.omega / (model.hbar * model.mu) - 0.5
    n = round(m)
    if n < 0 or abs(m - n) > 1e-6:
        raise ValueError(f"position variance {c5:.12g} is not a Fock level")
    return n


def ladder_symmetry_apply(psi: WaveFunction, nu: int, t: float, eff: EffectiveParams,
                          model: QuadraticModel) -> WaveFunction:
    """Nonlinear ladder symmetry: raise a stationary family member by ``nu`` levels.

    The constants of ``psi`` are read off its moments.  Only members of the
    stationary family are accepted (zero first moments, C3 = C4 = 0).  For the
    ground member this is (a+)^nu / sqrt(nu!) followed by the stationary
    intertwiner phase.
    """
    state, _ = moments_from_wavefunction(psi, model)
    C = fit_constants(state, eff, model, t=t)
    scale = stationary_c5(0, eff, model)
    if max(abs(C.c1), abs(C.c2), abs(C.c3), abs(C.c4)) > 1e-6 * max(scale, C.c5):
        raise ValueError(f"input is not a stationary family member (C = {C})")
    m = _level(C.c5, eff, model)
    f = psi.samples
    for _ in range(nu):
        f = creation(f, psi.grid, t, eff, model)
    f = f * math.sqrt(math.factorial(m) / math.factorial(m + nu))
    raised = psi.with_samples(f)
    return intertwiner_apply(raised, t, ParamSet(c5=stationary_c5(m, eff, model)),
                             ParamSet(c5=stationary_c5(m + nu, eff, model)), eff, model)


# --- packets K(C) phi and the displaced family ---

def _packet(coeffs: Mapping[int, complex], t: float, C: ParamSet, eff, model,
            grid: Grid, derivative: bool = False):
    hb = model.hbar
    st = hes_analytic_1d(t, C, eff, model)
    y = grid.x - st.x
    s = action_phase(t, C, eff, model) if t else 0.0
    carrier = np.exp(1j * (s + st.p * y) / hb)
    phi = np.zeros(grid.n, dtype=complex)
    dphi = np.zeros(grid.n, dtype=complex)
    dphi_dt = np.zeros(grid.n, dtype=complex)
    for nu, c in coeffs.items():
        v, dv = oscillator_state(nu, y, t, eff, model, derivative=True)
        phi += c * v
        dphi += c * dv
        dphi_dt += c * (-1j * (nu + 0.5) * eff.omega) * v
    val = carrier * phi
    if not derivative:
        return val
    pdot, xdot = first_moment_rates(t, C, eff, model)
    sdot = action_rate(t, C, eff, model)
    dval = carrier * (-xdot * dphi + dphi_dt + 1j / hb * (sdot + pdot * y - st.p * xdot) * phi)
    return val, dval


def ale_solution(coeffs: Mapping[int, complex], t: float, C: ParamSet, eff, model,
                 grid: Grid) -> WaveFunction:
    """Superposition of Fock states carried along the orbit C.

    Solves the associated linear equation with constants C; it solves the
    nonlinear equation only when its moments reproduce C.
    """
    psi = WaveFunction.on(grid, _packet(coeffs, t, C, eff, model, grid))
    check_edges(psi)
    return psi


def ale_family(coeffs: Mapping[int, complex], C: ParamSet, eff, model, grid: Grid) -> TimeFamily:
    return TimeFamily(lambda t: ale_solution(coeffs, t, C, eff, model, grid),
                      lambda t: _packet(coeffs, t, C, eff, model, grid, derivative=True)[1])


@dataclass(frozen=True)
class DisplacementParams:
    """Shift-operator data: exp(alpha a+ - alpha* a) = exp(beta p + gamma x) at t = 0."""

    alpha: complex
    beta0: complex
    gamma0: complex


def shift_coefficients(alpha: complex, t: float, eff, model):
    """beta(t), gamma(t) of the shift operator written as exp(beta p + gamma x)."""
    from .closedform import ladder_frame
    fr = ladder_frame(t, eff, model)
    r = math.sqrt(2 * model.hbar)
    beta = (fr.C.conjugate() * alpha - fr.C * alpha.conjugate()) / r
    gamma = (fr.B * alpha.conjugate() - fr.B.conjugate() * alpha) / r
    return beta, gamma


def displacement_params(alpha: complex, nu: int, eff: EffectiveParams,
                        model: QuadraticModel):
    """Shift coefficients at t = 0 and the fitted orbit constants C^1(alpha).

    Returns ``(DisplacementParams, ParamSet)``.  The orbit starts at
    X0 = -sqrt(2 hbar mu/Omega) Im(alpha) with momentum
    P0 = sqrt(2 hbar/(Omega mu)) (Omega Re(alpha) + rho Im(alpha)).
    """
    alpha = complex(alpha)
    hb, mu, rho, om = model.hbar, model.mu, model.rho, eff.omega
    a1, a2 = alpha.real, alpha.imag
    beta0 = 1j * math.sqrt(2 * mu / (hb * om)) * a2
    gamma0 = 1j * math.sqrt(2) * (rho * a2 + om * a1) / math.sqrt(hb * om * mu)
    c1 = math.sqrt(2 * hb * mu * om) * a1 / eff.omega_bar
    c2 = -math.sqrt(2 * hb * mu / om) * a2
    C = ParamSet(c1, c2, 0.0, 0.0, stationary_c5(nu, eff, model))
    return DisplacementParams(alpha, beta0, gamma0), C


def _shift_phase(C: ParamSet, eff, model) -> complex:
    p0, x0 = initial_point(C, eff, model)
    return complex(np.exp(0.5j * p0 * x0 / model.hbar))


def displaced_solution(nu: int, alpha: complex, t: float, eff: EffectiveParams,
                       model: QuadraticModel, grid: Grid) -> WaveFunction:
    """Nonstationary exact solution: Psi_nu carried along the orbit C^1(alpha).

    At t = 0 it equals exp(alpha a+ - alpha* a) Psi_nu(x, 0).
    """
    _, C = displacement_params(alpha, nu, eff, model)
    vals = _shift_phase(C, eff, model) * _packet({nu: 1.0}, t, C, eff, model, grid)
    psi = WaveFunction.on(grid, vals)
    check_edges(psi)
    return psi


def displaced_family(nu: int, alpha: complex, eff, model, grid: Grid) -> TimeFamily:
    _, C = displacement_params(alpha, nu, eff, model)
    ph = _shift_phase(C, eff, model)
    return TimeFamily(
        lambda t: displaced_solution(nu, alpha, t, eff, model, grid),
        lambda t: ph * _packet({nu: 1.0}, t, C, eff, model, grid, derivative=True)[1])


def displaced_grid(nus, alphas, eff, model, **kw) -> Grid:
    """A grid wide and fine enough for every (nu, alpha) displaced member."""
    from .grid import make_grid
    from .moments import orbit_extent
    xs, ps, d22, d11 = [0.0], [0.0], [0.0], [0.0]
    for nu in nus:
        for a in alphas:
            _, C = displacement_params(a, nu, eff, model)
            xa, pa, v22, v11 = orbit_extent(C, eff, model)
            xs.append(xa), ps.append(pa), d22.append(v22), d11.append(v11)
    return make_grid(model, eff, x_max=max(xs), d22_max=max(d22), p_max=max(ps),
                     d11_max=max(d11), **kw)
