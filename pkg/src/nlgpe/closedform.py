"""Closed-form solutions: Cauchy matrix, ladder frame, action, Fock families."""
from __future__ import annotations

from dataclasses import dataclass, astuple
import math
from typing import Callable, Optional

import numpy as np

from .errors import OverflowRisk
from .grid import Grid, WaveFunction, check_edges, momentum
from .model import EffectiveParams, QuadraticModel
from .moments import ParamSet

MAX_NU = 64


@dataclass(frozen=True)
class TimeFamily:
    """A wave function given as an explicit function of time.

    ``derivative`` returns the sample array of d/dt psi; when it is None the
    consumer falls back to finite differences.
    """

    value: Callable[[float], WaveFunction]
    derivative: Optional[Callable[[float], np.ndarray]] = None

    def __call__(self, t: float) -> WaveFunction:
        return self.value(t)


def cauchy_matrix(t: float, eff: EffectiveParams, model: QuadraticModel) -> np.ndarray:
    """Fundamental matrix of dB/dt = -rho B - sigma_tilde C, dC/dt = mu B + rho C."""
    om, mu, rho = eff.omega, model.mu, model.rho
    s, c = math.sin(om * t), math.cos(om * t)
    return np.array([
        [c - rho / om * s, -(om ** 2 + rho ** 2) / (mu * om) * s],
        [mu / om * s, c + rho / om * s],
    ])


def germ_generator(eff: EffectiveParams, model: QuadraticModel) -> np.ndarray:
    return np.array([[-model.rho, -eff.sigma_tilde], [model.mu, model.rho]])


@dataclass(frozen=True)
class LadderFrame:
    B: complex
    C: complex

    def wronskian(self) -> complex:
        """B C* - C B*; equals 2i for a normalized frame."""
        return self.B * self.C.conjugate() - self.C * self.B.conjugate()


def ladder_frame(t: float, eff: EffectiveParams, model: QuadraticModel) -> LadderFrame:
    om, mu = eff.omega, model.mu
    ph = complex(math.cos(om * t), math.sin(om * t))
    return LadderFrame(ph * complex(-model.rho, om) / math.sqrt(om * mu),
                       ph * math.sqrt(mu / om))


WEIGHT_RATE = 0.4  # in units of 1/ell^2, below the 1/2 of the Gaussian envelope
_EDGE_RATIO = 1e-12


def _weight_rate(f: np.ndarray, grid: Grid, centre: float, eff, model) -> float:
    """Largest beta <= WEIGHT_RATE/ell^2 keeping exp(beta (x-centre)^2) f negligible at the edges."""
    y2 = (grid.x - centre) ** 2
    beta = WEIGHT_RATE * eff.omega / (model.hbar * model.mu)
    af = np.abs(f)
    for _ in range(40):
        if beta * y2.max() < 600:
            h = af * np.exp(beta * y2)
            if max(h[:4].max(), h[-4:].max()) <= _EDGE_RATIO * h.max():
                return beta
        beta *= 0.5
    return 0.0


def weighted_momentum(f: np.ndarray, grid: Grid, hbar: float, beta: float,
                      centre: float = 0.0) -> np.ndarray:
    """p f computed as exp(-w) p (exp(w) f) + i hbar w' f with w = beta (x - centre)^2.

    Spectral differentiation leaves an absolute noise floor of order eps*max|f|;
    working on the flatter exp(w) f scales that floor down by exp(-w) in the
    tails, which keeps pointwise relative accuracy where f is tiny.
    """
    if beta == 0:
        return momentum(f, grid, hbar)
    y = grid.x - centre
    w = np.exp(beta * y * y)
    return momentum(w * f, grid, hbar) / w + 2j * hbar * beta * y * f


def _ladder_momentum(f, grid, eff, model, X):
    return weighted_momentum(f, grid, model.hbar, _weight_rate(f, grid, X, eff, model), X)


def annihilation(f: np.ndarray, grid: Grid, t: float, eff, model, P: float = 0.0,
                 X: float = 0.0) -> np.ndarray:
    fr = ladder_frame(t, eff, model)
    pf = _ladder_momentum(f, grid, eff, model, X) - P * f
    return (fr.C * pf - fr.B * (grid.x - X) * f) / math.sqrt(2 * model.hbar)


def creation(f: np.ndarray, grid: Grid, t: float, eff, model, P: float = 0.0,
             X: float = 0.0) -> np.ndarray:
    fr = ladder_frame(t, eff, model)
    pf = _ladder_momentum(f, grid, eff, model, X) - P * f
    return (fr.C.conjugate() * pf - fr.B.conjugate() * (grid.x - X) * f) / math.sqrt(2 * model.hbar)


# --- action along a phase orbit ---

def _action_integrand(C: ParamSet, eff: EffectiveParams, model: QuadraticModel):
    mu, rho = model.mu, model.rho
    ob, om, kt = eff.omega_bar, eff.omega, eff.kappa_tilde
    c1, c2, c3, c4, c5 = astuple(C)
    px_a, px_b = (ob * c1 - rho * c2) / mu, (ob * c2 + rho * c1) / mu
    xx = eff.sigma0 + kt * (model.b + model.c)
    half_kc = 0.5 * kt * model.c
    sin, cos = math.sin, math.cos

    def f(t):
        s, co = sin(ob * t), cos(ob * t)
        x = c1 * s + c2 * co
        p = px_a * co - px_b * s
        xdot = ob * (c1 * co - c2 * s)
        d22 = c3 * sin(2 * om * t) + c4 * cos(2 * om * t) + c5
        h = 0.5 * mu * p * p + 0.5 * xx * x * x + rho * p * x + half_kc * d22
        return p * xdot - h

    return f


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float,
                     max_depth: int = 60) -> float:
    """Adaptive Simpson with Richardson correction, iterative stack."""
    if a == b:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s0, tol0, depth = stack.pop()
        m = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m), 0.5 * (m + b0)
        flm, frm = f(lm), f(rm)
        left = (m - a0) / 6 * (fa0 + 4 * flm + fm0)
        right = (b0 - m) / 6 * (fm0 + 4 * frm + fb0)
        delta = left + right - s0
        if depth >= max_depth or abs(delta) <= 15 * tol0:
            total += left + right + delta / 15
        else:
            stack.append((a0, m, fa0, flm, fm0, left, tol0 / 2, depth + 1))
            stack.append((m, b0, fm0, frm, fb0, right, tol0 / 2, depth + 1))
    return total


def action_phase(t, C: ParamSet, eff: EffectiveParams, model: QuadraticModel,
                 tol: float = 1e-12):
    """S(t, C) = int_0^t (P dX/dt - H_kappa) dt by adaptive Simpson.

    ``t`` may be a scalar or an array; arrays are integrated cumulatively
    so the total work matches the largest time.  Negative times integrate
    backwards from zero.
    """
    f = _action_integrand(C, eff, model)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    # panels no longer than a quarter of the fastest period keep the
    # first Simpson estimate from aliasing to zero
    panel = 0.25 * math.pi / max(eff.omega_bar, 2 * eff.omega)
    horizon = max(np.abs(ts).max(), 1.0)
    out = np.empty_like(ts)
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(sign * ts >= 0)
        acc, prev = 0.0, 0.0
        for i in idx[np.argsort(sign * ts[idx])]:
            cur = ts[i]
            if sign * (cur - prev) > 0:
                n = max(1, math.ceil(abs(cur - prev) / panel))
                edges = np.linspace(prev, cur, n + 1)
                for lo, hi in zip(edges[:-1], edges[1:]):
                    acc += adaptive_simpson(f, lo, hi, tol * abs(hi - lo) / horizon)
                prev = cur
            out[i] = acc
    return float(out[0]) if np.ndim(t) == 0 else out


def action_rate(t: float, C: ParamSet, eff, model) -> float:
    """dS/dt, the integrand of the action."""
    return _action_integrand(C, eff, model)(t)


# --- Hermite polynomials and oscillator states ---

def hermite(nu: int, zeta):
    """Physicists' Hermite polynomial H_nu by three-term recurrence.

    Works for real or complex ``zeta`` (scalar or array).
    """
    if nu < 0 or int(nu) != nu:
        raise ValueError("nu must be a non-negative integer")
    if nu > MAX_NU:
        raise OverflowRisk(f"nu={nu} exceeds {MAX_NU}")
    zeta = np.asarray(zeta)
    h_prev = np.ones_like(zeta, dtype=np.result_type(zeta, float))
    if nu == 0:
        return h_prev if h_prev.ndim else h_prev[()]
    h = 2 * zeta * h_prev
    for n in range(1, nu):
        h_prev, h = h, 2 * zeta * h - 2 * n * h_prev
    return h if np.ndim(h) else h[()]


def _check_nu(nu: int) -> None:
    if nu < 0 or int(nu) != nu:
        raise ValueError("nu must be a non-negative integer")
    if nu > MAX_NU:
        raise OverflowRisk(f"nu={nu} exceeds {MAX_NU}")


def oscillator_state(nu: int, y, t: float, eff: EffectiveParams, model: QuadraticModel,
                     derivative: bool = False):
    """Fock state of the C-independent quadratic operator, in the variable ``y``.

    Returns samples of i^nu/sqrt(nu!) 2^(-nu/2) H_nu(k y) phi_0(y) exp(-i(nu+1/2) Omega t),
    k = sqrt(Omega/(hbar mu)).  With ``derivative`` also returns d/dy of it.
    """
    _check_nu(nu)
    hb, mu, om, rho = model.hbar, model.mu, eff.omega, model.rho
    k = math.sqrt(om / (hb * mu))
    y = np.asarray(y, dtype=float)
    norm = (om / (math.pi * hb * mu)) ** 0.25 * 2.0 ** (-nu / 2) / math.sqrt(math.factorial(nu))
    pref = (1j ** nu) * norm * np.exp(-1j * (nu + 0.5) * om * t)
    gauss = np.exp(-(1j * rho + om) * y * y / (2 * hb * mu))
    hn = hermite(nu, k * y)
    val = pref * hn * gauss
    if not derivative:
        return val
    dh = 2 * nu * k * hermite(nu - 1, k * y) if nu > 0 else 0.0
    dval = pref * gauss * (dh - (1j * rho + om) * y / (hb * mu) * hn)
    return val, dval


def stationary_c5(nu: int, eff: EffectiveParams, model: QuadraticModel) -> float:
    """Self-consistent position variance hbar mu (nu + 1/2) / Omega of the nu-th member."""
    return model.hbar * model.mu * (nu + 0.5) / eff.omega


def phase_rate(nu: int, eff: EffectiveParams, model: QuadraticModel) -> float:
    """Angular frequency (nu + 1/2)(kappa_tilde c mu/(2 Omega) + Omega) of Psi_nu."""
    om = eff.omega
    return (nu + 0.5) * (eff.kappa_tilde * model.c * model.mu / (2 * om) + om)


def fock_state(nu: int, t: float, c5: float, eff: EffectiveParams, model: QuadraticModel,
               grid: Grid) -> WaveFunction:
    """Fock-basis solution Phi_nu(x, t) of the stationary associated linear equation."""
    vals = oscillator_state(nu, grid.x, t, eff, model)
    vals = vals * np.exp(-0.5j * eff.kappa_tilde * model.c * c5 * t / model.hbar)
    psi = WaveFunction.on(grid, vals)
    check_edges(psi)
    return psi


def ground_state(t: float, c5: float, eff: EffectiveParams, model: QuadraticModel,
                 grid: Grid) -> WaveFunction:
    return fock_state(0, t, c5, eff, model, grid)


def exact_psi_nu(nu: int, t: float, eff: EffectiveParams, model: QuadraticModel,
                 grid: Grid) -> WaveFunction:
    """Stationary-density exact solution Psi_nu of the nonlinear equation."""
    return fock_state(nu, t, stationary_c5(nu, eff, model), eff, model, grid)


def exact_psi_nu_family(nu: int, eff, model, grid: Grid) -> TimeFamily:
    w = phase_rate(nu, eff, model)
    return TimeFamily(lambda t: exact_psi_nu(nu, t, eff, model, grid),
                      lambda t: -1j * w * exact_psi_nu(nu, t, eff, model, grid).samples)
