"""Hamilton-Ehrenfest moment dynamics for the reduced 1D equation.

The moment vector is ordered ``(p, x, d11, d12, d22)`` where ``d11`` is the
momentum variance, ``d22`` the position variance and ``d12`` the symmetrized
covariance.
"""
from __future__ import annotations

from dataclasses import dataclass, astuple
from typing import Callable, Sequence

import numpy as np

from .errors import SingularFit
from .grid import WaveFunction, check_edges, momentum, write_rows
from .model import EffectiveParams, QuadraticModel


@dataclass(frozen=True)
class MomentState:
    p: float
    x: float
    d11: float
    d12: float
    d22: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, v) -> "MomentState":
        v = np.asarray(v, dtype=float)
        if v.shape != (5,):
            raise ValueError(f"moment vector must have 5 components, got shape {v.shape}")
        return cls(*map(float, v))

    def det(self) -> float:
        return self.d11 * self.d22 - self.d12 ** 2

    def is_covariance(self, tol: float = 1e-12) -> bool:
        scale = max(abs(self.d11 * self.d22), 1.0)
        return self.d11 >= -tol and self.d22 >= -tol and self.det() >= -tol * scale


@dataclass(frozen=True)
class ParamSet:
    """Integration constants C1..C5 labelling one phase orbit."""

    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    c5: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, v) -> "ParamSet":
        return cls(*map(float, np.asarray(v, dtype=float)))

    def replace(self, **kw) -> "ParamSet":
        d = dict(zip(("c1", "c2", "c3", "c4", "c5"), astuple(self)))
        d.update(kw)
        return ParamSet(**d)


def hes_rhs(t, state, eff: EffectiveParams, model: QuadraticModel) -> np.ndarray:
    """Right-hand side of the 1D moment system for ``state = (p, x, d11, d12, d22)``."""
    p, x, d11, d12, d22 = np.asarray(state, dtype=float)
    mu, rho = model.mu, model.rho
    st = eff.sigma_tilde
    return np.array([
        -rho * p - eff.sigma0 * x,
        mu * p + rho * x,
        -2 * rho * d11 - 2 * st * d12,
        mu * d11 - st * d22,
        2 * mu * d12 + 2 * rho * d22,
    ])


def quadratic_matrices(model: QuadraticModel):
    """Return ``(Hzz, Hz, Wzz, Wzw, Www)`` of the 1D model in ``z = (p, x)`` ordering."""
    hzz = np.array([[model.mu, model.rho], [model.rho, model.sigma]], dtype=float)
    hz = np.zeros(2)
    wzz = np.array([[0.0, 0.0], [0.0, model.a]])
    wzw = np.array([[0.0, 0.0], [0.0, model.b]])
    www = np.array([[0.0, 0.0], [0.0, model.c]])
    return hzz, hz, wzz, wzw, www


def symplectic_unit(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def hes_rhs_matrix(z, delta, hzz, hz, wzz, wzw, kappa_tilde):
    """General 2n-dimensional moment system in matrix form.

    ``z`` holds the first moments ``(p_1..p_n, x_1..x_n)`` and ``delta`` the
    symmetric 2n x 2n covariance.  Returns ``(dz/dt, ddelta/dt)``.
    """
    z = np.asarray(z, dtype=float)
    delta = np.asarray(delta, dtype=float)
    j = symplectic_unit(z.size // 2)
    a_first = hzz + kappa_tilde * (wzz + wzw)
    a_second = hzz + kappa_tilde * wzz
    dz = j @ (hz + a_first @ z)
    dd = j @ a_second @ delta - delta @ a_second @ j
    return dz, dd


def rk4_solve(f: Callable, y0, times: Sequence[float], step: float) -> np.ndarray:
    """Classical fixed-step RK4 returning the solution at each of ``times``.

    ``times`` must be non-decreasing; the first entry is the initial time.
    Steps are shortened so every requested time is hit exactly.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be non-decreasing")
    y = np.array(y0, dtype=float)
    out = np.empty((times.size,) + y.shape)
    out[0] = y
    t = times[0]
    for i, target in enumerate(times[1:], start=1):
        span = target - t
        nsteps = int(np.ceil(span / step - 1e-9)) if span > 0 else 0
        h = span / nsteps if nsteps else 0.0
        for _ in range(nsteps):
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t + h
        t = target
        out[i] = y
    return out


def default_step(eff: EffectiveParams) -> float:
    return min(1e-3, 0.01 / eff.omega)


@dataclass(frozen=True, eq=False)
class HesTrajectory:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), 5)

    def __len__(self):
        return self.t.size

    def state(self, i: int) -> MomentState:
        return MomentState.from_array(self.y[i])

    def to_csv(self, path) -> None:
        write_rows(path, ("t", "p", "x", "d11", "d12", "d22"),
                   (np.concatenate(([t], row)) for t, row in zip(self.t, self.y)))


def integrate_hes_numeric(initial: MomentState, t_span, step: float | None,
                          eff: EffectiveParams, model: QuadraticModel,
                          times: Sequence[float] | None = None) -> HesTrajectory:
    """Integrate the moment system with fixed-step RK4.

    Output is at ``times`` if given (must lie in ``t_span``), else at every
    step of a uniform grid over ``t_span``.
    """
    t0, t1 = map(float, t_span)
    step = default_step(eff) if step is None else step
    if times is None:
        n = max(1, int(np.ceil((t1 - t0) / step - 1e-9)))
        times = np.linspace(t0, t1, n + 1)
    else:
        times = np.asarray(times, dtype=float)
        if times.size == 0 or times[0] < t0 or times[-1] > t1:
            raise ValueError("requested times fall outside t_span")
        if times[0] != t0:
            times = np.concatenate(([t0], times))
    y = rk4_solve(lambda t, s: hes_rhs(t, s, eff, model), initial.as_array(), times, step)
    return HesTrajectory(np.asarray(times), y)


def integrate_hes_matrix(z0, delta0, times, step, model: QuadraticModel, kappa_tilde: float):
    """RK4 for the matrix-form system; returns arrays ``(z(t), delta(t))``."""
    hzz, hz, wzz, wzw, _ = quadratic_matrices(model)
    z0 = np.asarray(z0, dtype=float)
    m = z0.size

    def f(t, y):
        dz, dd = hes_rhs_matrix(y[:m], y[m:].reshape(m, m), hzz, hz, wzz, wzw, kappa_tilde)
        return np.concatenate((dz, dd.ravel()))

    y = rk4_solve(f, np.concatenate((z0, np.asarray(delta0, float).ravel())), times, step)
    return y[:, :m], y[:, m:].reshape(-1, m, m)


def hes_analytic_1d(t, C: ParamSet, eff: EffectiveParams, model: QuadraticModel) -> MomentState:
    """Closed-form general solution. ``t`` may be an array; fields then are arrays."""
    mu, rho = model.mu, model.rho
    ob, om = eff.omega_bar, eff.omega
    c1, c2, c3, c4, c5 = astuple(C)
    t = np.asarray(t, dtype=float)
    s1, co1 = np.sin(ob * t), np.cos(ob * t)
    s2, co2 = np.sin(2 * om * t), np.cos(2 * om * t)
    x = c1 * s1 + c2 * co1
    p = ((ob * c1 - rho * c2) * co1 - (ob * c2 + rho * c1) * s1) / mu
    d22 = c3 * s2 + c4 * co2 + c5
    d21 = ((om * c3 - rho * c4) * co2 - (om * c4 + rho * c3) * s2 - rho * c5) / mu
    d11 = (((rho ** 2 - om ** 2) * c3 + 2 * rho * om * c4) * s2
           + ((rho ** 2 - om ** 2) * c4 - 2 * rho * om * c3) * co2) / mu ** 2 \
        + eff.sigma_tilde * c5 / mu
    if t.ndim == 0:
        return MomentState(float(p), float(x), float(d11), float(d21), float(d22))
    return MomentState(p, x, d11, d21, d22)


def first_moment_rates(t, C: ParamSet, eff: EffectiveParams, model: QuadraticModel):
    """Time derivatives ``(dP/dt, dX/dt)`` along the closed-form orbit."""
    s = hes_analytic_1d(t, C, eff, model)
    return (-model.rho * s.p - eff.sigma0 * s.x, model.mu * s.p + model.rho * s.x)


def orbit_extent(C: ParamSet, eff: EffectiveParams, model: QuadraticModel):
    """Amplitudes ``(max|X|, max|P|, max d22, max d11)`` over the closed-form orbit."""
    mu, rho, ob, om = model.mu, model.rho, eff.omega_bar, eff.omega
    c1, c2, c3, c4, c5 = astuple(C)
    x_amp = np.hypot(c1, c2)
    p_amp = np.hypot(ob * c1 - rho * c2, ob * c2 + rho * c1) / mu
    d22 = np.hypot(c3, c4) + c5
    d11 = np.hypot((rho ** 2 - om ** 2) * c3 + 2 * rho * om * c4,
                   (rho ** 2 - om ** 2) * c4 - 2 * rho * om * c3) / mu ** 2 \
        + eff.sigma_tilde * c5 / mu
    return float(x_amp), float(p_amp), float(d22), float(d11)


def _moment_map(t: float, eff, model) -> np.ndarray:
    # the closed-form solution is linear in C; column i is g(t, e_i)
    cols = [hes_analytic_1d(t, ParamSet.from_array(e), eff, model).as_array()
            for e in np.eye(5)]
    return np.column_stack(cols)


def fit_constants(state: MomentState, eff: EffectiveParams, model: QuadraticModel,
                  t: float = 0.0) -> ParamSet:
    """Solve ``g(t, C) = state`` for the integration constants C.

    At t = 0 this is C2 = x, C1 = (mu p + rho x)/omega_bar and a 3x3 system
    for (C3, C4, C5).
    """
    if not state.is_covariance(1e-10):
        raise ValueError(f"moments are not a valid covariance: {state}")
    g = state.as_array()
    m = _moment_map(t, eff, model)
    first, second = m[:2, :2], m[2:, 2:]
    out = np.empty(5)
    for sl, block in ((slice(0, 2), first), (slice(2, 5), second)):
        cond = np.linalg.cond(block)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularFit(f"moment map is singular (cond={cond:.3g})")
        out[sl] = np.linalg.solve(block, g[sl])
    return ParamSet.from_array(out)


def moments_from_wavefunction(psi: WaveFunction, model: QuadraticModel):
    """First moments and centered second moments of a grid wave function.

    Position integrals use the trapezoidal rule on the periodic grid, momentum
    integrals use Fourier differentiation.  Returns ``(MomentState, norm_sq)``.
    """
    check_edges(psi)
    grid = psi.grid
    f = psi.samples
    dx = grid.dx
    rho = np.abs(f) ** 2
    norm = float(np.sum(rho) * dx)
    x = grid.x
    xm = float(np.sum(x * rho) * dx / norm)
    pf = momentum(f, grid, model.hbar)
    pm = float(np.real(np.sum(np.conj(f) * pf)) * dx / norm)
    dxv = x - xm
    d22 = float(np.sum(dxv ** 2 * rho) * dx / norm)
    dpf = pf - pm * f
    d11 = float(np.sum(np.abs(dpf) ** 2) * dx / norm)
    d12 = float(np.real(np.sum(np.conj(f) * dxv * dpf)) * dx / norm)
    return MomentState(pm, xm, d11, d12, d22), norm
