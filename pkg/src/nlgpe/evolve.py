"""Split-step integrator of the full 1D nonlocal equation and residual checks.

The quadratic one-body part mu p^2/2 + rho (x p + p x)/2 + sigma_tilde x^2/2 is
propagated exactly.  Conjugating by exp(-i rho x^2/(2 hbar mu)) turns it into a
harmonic oscillator of frequency Omega, whose propagator is the product
chirp * kinetic * chirp with chirp exp(-i (Omega/mu) tan(Omega dt/2) x^2/(2 hbar))
and kinetic exp(-i (mu/Omega) sin(Omega dt) p^2/(2 hbar)).  The remaining
moment-dependent terms kappa_tilde (b X x + c (d22 + X^2)/2) are applied as
half-step phases on either side.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
import numpy as np

from .errors import EdgeLeak, Unstable
from .grid import Grid, WaveFunction, check_edges, write_rows
from .model import EffectiveParams, QuadraticModel, derive_effective
from .moments import MomentState, ParamSet, hes_analytic_1d, moments_from_wavefunction

NORM_ABORT = 1e-4
FD_STEP = 1e-6
SPECTRAL_THRESHOLD = 1e-12


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_final: float
    record_every: int
    grid: Grid

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be non-negative")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")

    def check_guard(self, model: QuadraticModel) -> float:
        """Return the kinetic phase per step at the grid Nyquist frequency.

        Raises ValueError when it is not below pi.
        """
        phase = self.dt * self.grid.k_max ** 2 * model.mu * model.hbar / 2
        if not phase < math.pi:
            raise ValueError(
                f"dt*k_max^2*mu*hbar/2 = {phase:.4g} >= pi; reduce dt or coarsen the grid")
        return phase

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class ResidualReport:
    relative_residual: float
    norm_drift: float = 0.0
    moment_errors: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = [self.relative_residual, self.norm_drift, *self.moment_errors.values()]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("residual report has non-finite entries")

    def to_text(self) -> str:
        lines = [f"relative_residual={self.relative_residual:.17g}",
                 f"norm_drift={self.norm_drift:.17g}"]
        lines += [f"moment_error.{k}={v:.17g}" for k, v in self.moment_errors.items()]
        return "\n".join(lines) + "\n"


# --- operators ---

def _quadratic_part(f: np.ndarray, grid: Grid, model: QuadraticModel, sigma: float) -> np.ndarray:
    hb = model.hbar
    fk = np.fft.fft(f)
    p2f = np.fft.ifft((hb * grid.k) ** 2 * fk)
    pf = np.fft.ifft(hb * grid.k * fk)
    x = grid.x
    return 0.5 * model.mu * p2f + model.rho * (x * pf - 0.5j * hb * f) + 0.5 * sigma * x * x * f


def gpe_operator(psi: WaveFunction, model: QuadraticModel) -> np.ndarray:
    """Apply H_qu + kappa V_qu(psi) to psi, with V built from psi's own moments."""
    grid = psi.grid
    f = psi.samples
    rho = np.abs(f) ** 2
    norm = float(np.sum(rho) * grid.dx)
    x = grid.x
    xm = float(np.sum(x * rho) * grid.dx / norm)
    x2 = float(np.sum(x * x * rho) * grid.dx / norm)
    kt = model.kappa * norm
    nonlocal_pot = 0.5 * kt * (model.a * x * x + 2 * model.b * x * xm + model.c * x2)
    return _quadratic_part(f, grid, model, model.sigma) + nonlocal_pot * f


def ale_operator(psi: WaveFunction, t: float, C: ParamSet, eff: EffectiveParams,
                 model: QuadraticModel) -> np.ndarray:
    """Apply the associated linear Hamiltonian with orbit constants C."""
    st = hes_analytic_1d(t, C, eff, model)
    kt = eff.kappa_tilde
    x = psi.grid.x
    f = psi.samples
    pot = kt * model.b * st.x * x + 0.5 * kt * model.c * (st.x ** 2 + st.d22)
    return _quadratic_part(f, psi.grid, model, eff.sigma_tilde) + pot * f


def _time_derivative(candidate, t: float) -> np.ndarray:
    deriv = getattr(candidate, "derivative", None)
    if deriv is not None:
        return np.asarray(deriv(t))
    h = FD_STEP
    return (candidate(t + h).samples - candidate(t - h).samples) / (2 * h)


def residual(candidate, t: float, model: QuadraticModel, eff: EffectiveParams | None = None,
             C: ParamSet | None = None) -> ResidualReport:
    """Discrete residual ||F(psi)|| / ||psi|| of the nonlinear equation at time t.

    ``candidate`` maps t to a WaveFunction; if it has a ``derivative``
    attribute that is used for d/dt, otherwise central differences.  With
    ``C`` and ``eff`` the moment deviations from the closed-form orbit are
    reported too.
    """
    psi = candidate(t)
    dpsi = _time_derivative(candidate, t)
    f = -1j * model.hbar * dpsi + gpe_operator(psi, model)
    rel = float(np.linalg.norm(f) / np.linalg.norm(psi.samples))
    n0 = candidate(0.0).norm_sq() if t != 0 else psi.norm_sq()
    drift = abs(psi.norm_sq() - n0) / n0
    errs = {}
    if C is not None:
        if eff is None:
            raise ValueError("eff is required for moment errors")
        errs = _moment_errors(psi, t, C, eff, model)
    return ResidualReport(rel, drift, errs)


def ale_residual(candidate, t: float, C: ParamSet, eff: EffectiveParams,
                 model: QuadraticModel) -> float:
    """Relative residual of the associated linear equation with constants C."""
    psi = candidate(t)
    dpsi = _time_derivative(candidate, t)
    f = -1j * model.hbar * dpsi + ale_operator(psi, t, C, eff, model)
    return float(np.linalg.norm(f) / np.linalg.norm(psi.samples))


_FIELDS = ("p", "x", "d11", "d12", "d22")


def _moment_errors(psi, t, C, eff, model) -> dict:
    got, _ = moments_from_wavefunction(psi, model)
    ref = hes_analytic_1d(t, C, eff, model)
    return {k: abs(getattr(got, k) - getattr(ref, k)) for k in _FIELDS}


# --- split-step evolution ---

@dataclass(eq=False)
class Evolution:
    times: np.ndarray
    snapshots: list
    moments: np.ndarray  # (n_records, 5) ordered p, x, d11, d12, d22
    norms: np.ndarray
    eff: EffectiveParams

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])) / self.norms[0])

    def state(self, i: int) -> MomentState:
        return MomentState.from_array(self.moments[i])

    def moments_to_csv(self, path) -> None:
        write_rows(path, ("t", "p", "x", "d11", "d12", "d22", "norm_sq"),
                   (np.concatenate(([t], m, [n])) for t, m, n in
                    zip(self.times, self.moments, self.norms)))


def _spectral_tail(f: np.ndarray) -> float:
    s = np.abs(np.fft.fft(f)) ** 2
    n = s.size
    band = max(2, n // 32)
    return float(s[n // 2 - band:n // 2 + band].max() / s.max())


def make_stepper(grid: Grid, model: QuadraticModel, eff: EffectiveParams, dt: float):
    """Return ``(step, gauge)``: one Strang step in the rotated frame and the frame factor.

    The frame variable is chi = conj(gauge) * psi.  ``dt`` may be negative.
    """
    hb, mu, om = model.hbar, model.mu, eff.omega
    kt = eff.kappa_tilde
    x = grid.x
    dx = grid.dx
    theta = om * dt
    chirp = np.exp(-1j * (om / mu) * math.tan(theta / 2) * x * x / (2 * hb))
    kinetic = np.exp(-1j * (mu / om) * math.sin(theta) * hb * grid.k ** 2 / 2)
    gauge = np.exp(-1j * model.rho * x * x / (2 * hb * mu))

    def half_kick(f):
        dens = np.abs(f) ** 2
        nrm = np.sum(dens) * dx
        xm = np.sum(x * dens) * dx / nrm
        d22 = np.sum((x - xm) ** 2 * dens) * dx / nrm
        pot = kt * (model.b * xm * x + 0.5 * model.c * (d22 + xm * xm))
        return f * np.exp(-0.5j * dt / hb * pot)

    def step(chi):
        chi = half_kick(chi)
        chi = chirp * np.fft.ifft(kinetic * np.fft.fft(chirp * chi))
        return half_kick(chi)

    return step, gauge


def split_step_evolve(psi0: WaveFunction, cfg: EvolutionConfig, model: QuadraticModel,
                      eff: EffectiveParams | None = None) -> Evolution:
    """Second-order Strang integration of the nonlocal equation.

    ``eff`` defaults to the parameters derived from the norm of ``psi0``; the
    nonlinearity strength is frozen at that value for the whole run.
    Snapshots are recorded every ``cfg.record_every`` steps and at the end.
    """
    grid = psi0.grid
    if grid != cfg.grid:
        raise ValueError("initial state is not on the configured grid")
    check_edges(psi0)
    n0 = psi0.norm_sq()
    if eff is None:
        eff = derive_effective(model, n0)
    cfg.check_guard(model)
    step, gauge = make_stepper(grid, model, eff, cfg.dt)
    times, snaps, moms, norms = [], [], [], []

    def record(t, f):
        psi = WaveFunction.on(grid, gauge * f)
        check_edges(psi)
        if _spectral_tail(f) > SPECTRAL_THRESHOLD:
            raise EdgeLeak("spectrum reaches the grid Nyquist band; refine the grid")
        m, n = moments_from_wavefunction(psi, model)
        if abs(n - n0) / n0 > NORM_ABORT:
            raise Unstable(f"norm drift {abs(n - n0) / n0:.3g} at t={t:.6g}")
        times.append(t)
        snaps.append(psi)
        moms.append(m.as_array())
        norms.append(n)

    chi = np.conj(gauge) * psi0.samples
    record(0.0, chi)
    nsteps = cfg.n_steps
    for k in range(1, nsteps + 1):
        chi = step(chi)
        if k % cfg.record_every == 0 or k == nsteps:
            record(k * cfg.dt, chi)
    return Evolution(np.array(times), snaps, np.array(moms), np.array(norms), eff)


class _LocalPropagation:
    """Candidate built from one state by single split steps of +-h (for residuals)."""

    def __init__(self, psi: WaveFunction, model, eff, h: float = FD_STEP):
        self.psi, self.h = psi, h
        self._cache = {0.0: psi}
        for s in (h, -h):
            step, gauge = make_stepper(psi.grid, model, eff, s)
            self._cache[s] = psi.with_samples(gauge * step(np.conj(gauge) * psi.samples))

    def __call__(self, t):
        return self._cache[t]


def evolved_residual(psi: WaveFunction, model: QuadraticModel, eff: EffectiveParams) -> float:
    """GPE residual of a numerically evolved state, d/dt by central differences.

    The neighbours at +-1e-6 come from single split steps, whose local error is
    far below the finite-difference error.
    """
    return residual(_LocalPropagation(psi, model, eff), 0.0, model).relative_residual


def compare_moments(evo: Evolution, C: ParamSet, eff: EffectiveParams,
                    model: QuadraticModel) -> dict:
    """Maximum over recorded times of |measured - closed-form| per moment."""
    err = moment_error_series(evo, C, eff, model)
    return {k: float(err[:, i].max()) for i, k in enumerate(_FIELDS)}


def moment_error_series(evo: Evolution, C: ParamSet, eff, model) -> np.ndarray:
    ref = np.column_stack([getattr(hes_analytic_1d(evo.times, C, eff, model), k) for k in _FIELDS])
    return np.abs(evo.moments - ref)
