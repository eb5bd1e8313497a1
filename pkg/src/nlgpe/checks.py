"""The acceptance suite as reusable checks.

Every check returns one or more CheckResult rows with the measured value and
its threshold.  ``run_suite`` is shared by ``nlgpe verify``, ``nlgpe sweep``
and the acceptance tests, so all three report identical numbers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
import time
from typing import Callable

import numpy as np

from .closedform import (TimeFamily, exact_psi_nu, exact_psi_nu_family, fock_state,
                         ladder_frame, phase_rate, stationary_c5)
from .errors import NonOscillatoryRegime
from .evolve import (EvolutionConfig, ale_residual, compare_moments, gpe_operator, residual,
                     split_step_evolve)
from .grid import Grid, WaveFunction, make_grid
from .model import EffectiveParams, QuadraticModel, derive_effective
from .moments import (MomentState, ParamSet, fit_constants, hes_analytic_1d, hes_rhs,
                      integrate_hes_numeric, moments_from_wavefunction, orbit_extent)
from .symmetry import (ale_family, displaced_family, displaced_grid, displaced_solution,
                       displacement_params, intertwiner_apply, ladder_symmetry_apply)

NU_MAX = 5
ALPHAS = (1.0, 1j, (1 + 1j) / math.sqrt(2), -0.6 + 0.3j, 0.2 - 0.9j, 0.5 + 0.5j)
EVOLVE_POINTS = 4096
EVOLVE_STEPS = 10_000


@dataclass(frozen=True)
class CheckResult:
    key: str
    name: str
    value: float
    threshold: float
    op: str = "<="  # '<=' or '>'
    detail: str = ""
    volatile: bool = False  # value differs between identical runs (timings)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.threshold if self.op == "<=" else self.value > self.threshold

    def line(self, stable: bool = False) -> str:
        """One report line; ``stable`` hides volatile values for byte-identical files."""
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        value = "see manifest" if stable and self.volatile else f"{self.value:.17g}"
        return f"{tag} [{self.key}] {self.name}: {value} {self.op} {self.threshold:.1e}{extra}"


@dataclass
class SuiteContext:
    model: QuadraticModel
    seed: int = 12345
    # model whose closed forms serve as the moment oracle; differs from
    # ``model`` only in the negative-control run
    oracle: QuadraticModel | None = None
    timings: dict = field(default_factory=dict)

    @property
    def eff(self) -> EffectiveParams:
        return derive_effective(self.model)

    @property
    def oracle_model(self) -> QuadraticModel:
        return self.oracle or self.model

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


def period(eff: EffectiveParams) -> float:
    return 2 * math.pi / eff.omega


def random_model(rng: np.random.Generator, hbar: float = 1.0) -> QuadraticModel:
    """An admissible model with all couplings switched on."""
    while True:
        m = QuadraticModel(mu=rng.uniform(0.5, 2.0), rho=rng.uniform(-1, 1),
                           sigma=rng.uniform(0.5, 2.0), a=rng.uniform(-0.5, 0.5),
                           b=rng.uniform(-0.5, 0.5), c=rng.uniform(-0.5, 0.5),
                           kappa=rng.uniform(0.0, 0.5), hbar=hbar)
        try:
            eff = derive_effective(m)
        except NonOscillatoryRegime:
            continue
        if min(eff.omega, eff.omega_bar) > 0.2:
            return m


def random_state(rng: np.random.Generator, hbar: float) -> MomentState:
    d22 = rng.uniform(0.3, 1.5)
    d12 = rng.uniform(-0.4, 0.4)
    d11 = (d12 ** 2 + hbar ** 2 / 4) / d22 * rng.uniform(1.0, 2.0)
    return MomentState(rng.uniform(-1, 1), rng.uniform(-1, 1), d11, d12, d22)


# --- individual criteria ---

def check_ladder_normalization(ctx: SuiteContext) -> list[CheckResult]:
    rng = ctx.rng(1)
    models = [ctx.model] + [random_model(rng, ctx.model.hbar) for _ in range(9)]
    worst = 0.0
    for m in models:
        eff = derive_effective(m)
        for t in rng.uniform(0, 20 * math.pi / eff.omega, 100):
            worst = max(worst, abs(ladder_frame(t, eff, m).wronskian() - 2j))
    return [CheckResult("c1_wronskian", "1 ladder normalization |BC*-CB*-2i|", worst, 1e-14,
                        detail="100 t x 10 parameter sets")]


def check_stationarity(ctx: SuiteContext) -> list[CheckResult]:
    # the ground-level state C5 = hbar mu/(2 Omega); the absolute bound sits at
    # rounding level, so larger C5 values are covered by the relative unit tests
    m, eff = ctx.model, ctx.eff
    st = hes_analytic_1d(0.0, ParamSet(c5=stationary_c5(0, eff, m)), eff, m)
    worst = float(np.max(np.abs(hes_rhs(0.0, st.as_array(), eff, m))))
    return [CheckResult("c2_stationary_rhs", "2 stationary moment state is a fixed point",
                        worst, 1e-15)]


def _hes_error(state, eff, m, step, t_end):
    C = fit_constants(state, eff, m)
    tr = integrate_hes_numeric(state, (0.0, t_end), step, eff, m)
    ref = hes_analytic_1d(tr.t, C, eff, m)
    ref = np.column_stack([ref.p, ref.x, ref.d11, ref.d12, ref.d22])
    return float(np.max(np.abs(tr.y - ref))), tr


def check_hes_equivalence(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    state = random_state(ctx.rng(3), m.hbar)
    t_end = 10 / eff.omega
    err, _ = _hes_error(state, eff, m, 1e-3, t_end)
    h = 0.2 / max(eff.omega, eff.omega_bar)
    e1, _ = _hes_error(state, eff, m, h, t_end)
    e2, _ = _hes_error(state, eff, m, h / 2, t_end)
    order = math.log2(e1 / e2)
    return [CheckResult("c3_hes_error", "3 HES numeric vs analytic, RK4 step 1e-3", err, 1e-8),
            CheckResult("c3_order_gap", "3 RK4 observed order |p-4|", abs(order - 4), 0.5,
                        detail=f"p={order:.3f}")]


def check_determinant(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    state = random_state(ctx.rng(4), m.hbar)
    _, tr = _hes_error(state, eff, m, 1e-3, 10 / eff.omega)
    det = tr.y[:, 2] * tr.y[:, 4] - tr.y[:, 3] ** 2
    C = fit_constants(state, eff, m)
    an = hes_analytic_1d(tr.t, C, eff, m)
    det_an = an.d11 * an.d22 - an.d12 ** 2
    d0 = state.det()
    drift = max(np.max(np.abs(det - d0)), np.max(np.abs(det_an - d0))) / d0
    return [CheckResult("c4_det_drift", "4 covariance determinant drift (relative)", float(drift), 1e-10)]


def check_ground_moments(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    hb, mu, rho, om = m.hbar, m.mu, m.rho, eff.omega
    grid = make_grid(m, eff)
    st, _ = moments_from_wavefunction(fock_state(0, 0.0, stationary_c5(0, eff, m), eff, m, grid), m)
    ref = MomentState(0.0, 0.0, hb * (rho ** 2 + om ** 2) / (2 * om * mu), -hb * rho / (2 * om),
                      hb * mu / (2 * om))
    err = float(np.max(np.abs(st.as_array() - ref.as_array())))
    unc = abs(st.det() - hb ** 2 / 4) / (hb ** 2 / 4)
    return [CheckResult("c5_ground_moments", "5 ground-state moments by quadrature", err, 1e-8),
            CheckResult("c5_uncertainty", "5 uncertainty product vs hbar^2/4 (relative)", unc, 1e-10)]


def check_fock_orthonormality(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    n = 10
    c5 = stationary_c5(0, eff, m)
    grid = make_grid(m, eff, d22_max=stationary_c5(n, eff, m))
    t = 0.3 * period(eff)
    states = np.array([fock_state(k, t, c5, eff, m, grid).samples for k in range(n + 1)])
    gram = np.conj(states) @ states.T * grid.dx
    err = float(np.max(np.abs(gram - np.eye(n + 1))))
    return [CheckResult("c6_orthonormality", "6 Fock orthonormality, nu <= 10", err, 1e-8)]


class _Static:
    """A time-independent candidate; its residual is that of a non-solution."""

    def __init__(self, psi: WaveFunction):
        self.psi = psi

    def __call__(self, t):
        return self.psi


def negative_control(model: QuadraticModel, rng: np.random.Generator) -> _Static:
    eff = derive_effective(model)
    grid = make_grid(model, eff, x_max=2.0, d22_max=4 * stationary_c5(0, eff, model))
    x = grid.x
    w = rng.uniform(0.5, 2.0) * stationary_c5(0, eff, model)
    f = np.exp(-(x - rng.uniform(-1, 1)) ** 2 / (4 * w))
    f = f / math.sqrt(np.sum(np.abs(f) ** 2) * grid.dx)
    return _Static(WaveFunction.on(grid, f))


def check_family_residuals(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    ts = np.arange(20) * period(eff) / 20
    worst_psi = 0.0
    grid = make_grid(m, eff, d22_max=stationary_c5(NU_MAX, eff, m))
    for nu in range(NU_MAX + 1):
        fam = exact_psi_nu_family(nu, eff, m, grid)
        worst_psi = max(worst_psi, max(residual(fam, t, m).relative_residual for t in ts))
    worst_disp = 0.0
    for nu in range(NU_MAX + 1):
        for alpha in ALPHAS:
            g = displaced_grid([nu], [alpha], eff, m)
            fam = displaced_family(nu, alpha, eff, m, g)
            worst_disp = max(worst_disp, max(residual(fam, t, m).relative_residual for t in ts))
    neg = residual(negative_control(m, ctx.rng(7)), 0.0, m).relative_residual
    return [CheckResult("c7_residual_psi", "7 residual of Psi_nu, nu <= 5", worst_psi, 1e-6),
            CheckResult("c7_residual_displaced", "7 residual of displaced Psi_nu, nu <= 5, |alpha| <= 1", worst_disp, 1e-6),
            CheckResult("c7_negative_control", "7 negative-control residual", neg, 1e-2, op=">")]


def ladder_pointwise_error(model: QuadraticModel, nu_max: int = NU_MAX,
                           times=(0.0, 0.7)) -> float:
    eff = derive_effective(model)
    grid = make_grid(model, eff, d22_max=stationary_c5(nu_max, eff, model))
    worst = 0.0
    for t in times:
        psi0 = exact_psi_nu(0, t, eff, model, grid)
        for nu in range(nu_max + 1):
            out = ladder_symmetry_apply(psi0, nu, t, eff, model).samples
            ref = exact_psi_nu(nu, t, eff, model, grid).samples
            mask = np.abs(ref) > 1e-10
            worst = max(worst, float(np.max(np.abs(out[mask] - ref[mask]) / np.abs(ref[mask]))))
    return worst


def check_symmetry_reproduction(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    lad = ladder_pointwise_error(m)
    grid = make_grid(m, eff, d22_max=stationary_c5(NU_MAX, eff, m))
    worst = 0.0
    for nu in range(NU_MAX + 1):
        for t in (0.0, 0.45 * period(eff), 2.0 * period(eff)):
            a = displaced_solution(nu, 0.0, t, eff, m, grid).samples
            b = exact_psi_nu(nu, t, eff, m, grid).samples
            worst = max(worst, float(np.max(np.abs(a - b))))
    return [CheckResult("c8_ladder_pointwise", "8 ladder symmetry on Psi_0 vs Psi_nu (pointwise relative)", lad, 1e-8),
            CheckResult("c8_alpha_zero", "8 displaced family at alpha=0 vs Psi_nu", worst, 1e-12)]


PHASE_PAIRS = ((0.0, 0.4), (0.1, 0.4), (0.2, -0.3), (0.5, 0.8), (0.3, 0.0))


def measured_phase_rates(model: QuadraticModel, nu: int) -> tuple[float, float]:
    """Phase rate of Psi_nu measured two ways.

    Returns the slope of the unwrapped overlap phase <Psi(0), Psi(t)> and the
    energy expectation <Psi, H Psi>/(hbar ||Psi||^2), which for a solution with
    stationary density equals the rate.
    """
    eff = derive_effective(model)
    grid = make_grid(model, eff, d22_max=stationary_c5(nu, eff, model))
    psi0 = exact_psi_nu(nu, 0.0, eff, model, grid)
    energy = np.real(np.vdot(psi0.samples, gpe_operator(psi0, model))) * grid.dx
    rate_e = float(energy / (model.hbar * psi0.norm_sq()))
    # sample densely enough that consecutive phases differ by well under pi
    dt = min(period(eff) / 20, 0.5 / max(abs(rate_e), 1e-300))
    ts = dt * np.arange(41)
    ph = np.unwrap([np.angle(psi0.inner(exact_psi_nu(nu, t, eff, model, grid))) for t in ts])
    slope = -np.polyfit(ts, ph, 1)[0]
    return float(slope), rate_e


def check_phase_rate(ctx: SuiteContext) -> list[CheckResult]:
    worst, used = 0.0, 0
    for kappa, c in PHASE_PAIRS:
        m = ctx.model.replace(kappa=kappa, c=c)
        try:
            eff = derive_effective(m)
        except NonOscillatoryRegime:
            continue  # this pair leaves the oscillatory regime for the given model
        used += 1
        for nu in range(NU_MAX + 1):
            w = phase_rate(nu, eff, m)
            for got in measured_phase_rates(m, nu):
                worst = max(worst, abs(got - w) / abs(w))
    if used == 0:
        worst = math.inf
    return [CheckResult("c9_phase_rate", "9 phase rate vs (nu+1/2)(kt c mu/(2 Omega) + Omega)",
                        worst, 1e-8, detail=f"{used} admissible (kappa, c) pairs, nu <= 5")]


def evolution_grid(model: QuadraticModel, eff: EffectiveParams, dt: float, C_list,
                   n: int = EVOLVE_POINTS) -> Grid:
    """A grid of ``n`` points wide enough for the orbits and coarse enough for the
    kinetic phase guard at step ``dt``."""
    half = 0.0
    for C in C_list:
        xa, pa, d22, d11 = orbit_extent(C, eff, model)
        half = max(half, make_grid(model, eff, xa, d22, pa, d11).x_min * -1)
    # dt * k_max^2 * mu * hbar / 2 < pi with ten percent margin
    k_cap = math.sqrt(2 * math.pi / (dt * model.mu * model.hbar)) / 1.1
    half = max(half, n * math.pi / (2 * k_cap))
    return Grid.symmetric(half, n)


def check_split_step(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    om_model = ctx.oracle_model
    om_eff = derive_effective(om_model)
    T = period(eff)
    dt = T / EVOLVE_STEPS
    alpha, nu_d = 0.5 + 0.5j, 0
    C0 = ParamSet(c5=stationary_c5(0, eff, m))
    _, Cd = displacement_params(alpha, nu_d, eff, m)
    grid = evolution_grid(m, eff, dt, [C0, Cd])
    cfg = EvolutionConfig(dt=dt, t_final=T, record_every=50, grid=grid)
    t0 = time.perf_counter()
    evo0 = split_step_evolve(exact_psi_nu(0, 0.0, eff, m, grid), cfg, m)
    evod = split_step_evolve(displaced_solution(nu_d, alpha, 0.0, eff, m, grid), cfg, m)
    elapsed = time.perf_counter() - t0
    ctx.timings["split_step"] = elapsed
    # oracle constants come from the oracle model
    C0o = ParamSet(c5=stationary_c5(0, om_eff, om_model))
    _, Cdo = displacement_params(alpha, nu_d, om_eff, om_model)
    e0 = compare_moments(evo0, C0o, om_eff, om_model)
    ed = compare_moments(evod, Cdo, om_eff, om_model)
    xs = hes_analytic_1d(evod.times, Cdo, om_eff, om_model).x
    centroid = float(np.max(np.abs(evod.moments[:, 1] - xs)))
    drift = max(evo0.norm_drift(), evod.norm_drift())
    return [CheckResult("c10_norm_drift", "10 split-step norm drift over 1e4 steps", drift, 1e-10),
            CheckResult("c10_moment_error", "10 evolved moments vs HES closed form",
                        max(max(e0.values()), max(ed.values())), 1e-5),
            CheckResult("c10_centroid_error", "10 displaced centroid vs X(t) over one period", centroid, 1e-5),
            CheckResult("c10_runtime_s", "10 runtime of both runs [s]", elapsed, 300.0,
                        detail=f"{grid.n} points", volatile=True)]


def random_constants(rng: np.random.Generator, eff, model) -> ParamSet:
    c5 = stationary_c5(0, eff, model) * rng.uniform(1.2, 2.0)
    c3, c4 = rng.uniform(-0.3, 0.3, 2) * c5
    return ParamSet(rng.uniform(-1, 1), rng.uniform(-1, 1), c3, c4, c5)


def check_intertwiner(ctx: SuiteContext) -> list[CheckResult]:
    m, eff = ctx.model, ctx.eff
    rng = ctx.rng(11)
    worst, worst_in = 0.0, 0.0
    ts = np.array([0.13, 0.4, 0.75, 1.0]) * period(eff)
    for _ in range(5):
        Ca, Cb = random_constants(rng, eff, m), random_constants(rng, eff, m)
        grid = make_grid(m, eff, x_max=2.5, d22_max=4 * stationary_c5(0, eff, m),
                         p_max=2.5 * max(1.0, eff.omega_bar / m.mu + abs(m.rho)))
        coeffs = {0: complex(rng.normal(), rng.normal()), 1: complex(rng.normal(), rng.normal())}
        src = ale_family(coeffs, Ca, eff, m, grid)
        img = TimeFamily(lambda t, src=src, Ca=Ca, Cb=Cb: intertwiner_apply(src(t), t, Ca, Cb, eff, m))
        for t in ts:
            worst_in = max(worst_in, ale_residual(src, t, Ca, eff, m))
            worst = max(worst, ale_residual(img, t, Cb, eff, m))
    return [CheckResult("c11_ale_residual", "11 intertwiner image ALE(C') residual", worst, 1e-6,
                        detail=f"input ALE(C) residual {worst_in:.1e}")]


def check_kappa_continuity(ctx: SuiteContext) -> list[CheckResult]:
    m_small = ctx.model.replace(kappa=1e-8)
    m_lin = ctx.model.replace(kappa=0.0)
    eff_s, eff_l = derive_effective(m_small), derive_effective(m_lin)
    grid = make_grid(m_lin, eff_l, d22_max=stationary_c5(NU_MAX, eff_l, m_lin))
    worst = 0.0
    for nu in range(NU_MAX + 1):
        for t in np.linspace(0, 10 / eff_l.omega, 5):
            a = exact_psi_nu(nu, t, eff_s, m_small, grid)
            b = exact_psi_nu(nu, t, eff_l, m_lin, grid)
            worst = max(worst, math.sqrt(np.sum(np.abs(a.samples - b.samples) ** 2) * grid.dx))
    return [CheckResult("c12_kappa_limit", "12 kappa=1e-8 vs linear eigenstate (norm distance)", worst, 1e-6)]


CHECK_KEYS = ('c1_wronskian',
              'c2_stationary_rhs',
              'c3_hes_error',
              'c3_order_gap',
              'c4_det_drift',
              'c5_ground_moments',
              'c5_uncertainty',
              'c6_orthonormality',
              'c7_residual_psi',
              'c7_residual_displaced',
              'c7_negative_control',
              'c8_ladder_pointwise',
              'c8_alpha_zero',
              'c9_phase_rate',
              'c10_norm_drift',
              'c10_moment_error',
              'c10_centroid_error',
              'c10_runtime_s',
              'c11_ale_residual',
              'c12_kappa_limit')

CRITERIA: dict[int, Callable[[SuiteContext], list[CheckResult]]] = {
    1: check_ladder_normalization,
    2: check_stationarity,
    3: check_hes_equivalence,
    4: check_determinant,
    5: check_ground_moments,
    6: check_fock_orthonormality,
    7: check_family_residuals,
    8: check_symmetry_reproduction,
    9: check_phase_rate,
    10: check_split_step,
    11: check_intertwiner,
    12: check_kappa_continuity,
}


def run_suite(model: QuadraticModel, oracle: QuadraticModel | None = None, seed: int = 12345,
              only=None) -> list[CheckResult]:
    """Run the acceptance criteria (all, or those numbered in ``only``)."""
    derive_effective(model)  # regime errors surface before any work
    ctx = SuiteContext(model, seed=seed, oracle=oracle)
    out = []
    for k, fn in CRITERIA.items():
        if only is None or k in only:
            out.extend(fn(ctx))
    return out
