"""Model parameters of the reduced 1D nonlocal Gross-Pitaevskii equation.

The equation is

    i hbar d_t psi = [ mu p^2/2 + rho (x p + p x)/2 + sigma x^2/2
                       + (kappa/2) int (a x^2 + 2 b x y + c y^2) |psi(y)|^2 dy ] psi

with p = -i hbar d_x.  After moment reduction the nonlocal term only enters
through kappa_tilde = kappa * ||psi||^2 and the first two moments of psi.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

from .errors import NonOscillatoryRegime


@dataclass(frozen=True)
class QuadraticModel:
    mu: float = 1.0
    rho: float = 0.0
    sigma: float = 1.0
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    kappa: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        for name in ("mu", "rho", "sigma", "a", "b", "c", "kappa", "hbar"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "QuadraticModel":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return QuadraticModel(**fields)


@dataclass(frozen=True)
class EffectiveParams:
    """Frozen effective coefficients for one norm value.

    ``omega_bar`` drives the first moments, ``omega`` the second moments and
    the ladder frame.
    """

    kappa_tilde: float
    sigma0: float
    sigma_tilde: float
    omega_bar: float
    omega: float


def derive_effective(model: QuadraticModel, norm_sq: float = 1.0) -> EffectiveParams:
    """Compute kappa_tilde, sigma0, sigma_tilde and both frequencies.

    Raises NonOscillatoryRegime when ``mu <= 0`` or when ``sigma0*mu - rho**2`` or
    ``sigma_tilde*mu - rho**2`` is not strictly positive.  No clamping is
    done near zero.
    """
    if not norm_sq > 0:
        raise ValueError(f"norm_sq must be positive, got {norm_sq}")
    if not model.mu > 0:
        # mu < 0 with sigma < 0 can pass the radicand tests, but the Fock
        # states then have no normalizable Gaussian envelope
        raise NonOscillatoryRegime(f"mu = {model.mu:.6g} <= 0: no bound oscillator states")
    kt = model.kappa * norm_sq
    sigma0 = model.sigma + kt * (model.a + model.b)
    sigma_tilde = model.sigma + kt * model.a
    rad_bar = sigma0 * model.mu - model.rho ** 2
    rad = sigma_tilde * model.mu - model.rho ** 2
    if not rad_bar > 0:
        raise NonOscillatoryRegime(
            f"sigma0*mu - rho^2 = {rad_bar:.6g} <= 0: first moments are not localized")
    if not rad > 0:
        raise NonOscillatoryRegime(
            f"sigma_tilde*mu - rho^2 = {rad:.6g} <= 0: wave packets spread")
    return EffectiveParams(kt, sigma0, sigma_tilde, math.sqrt(rad_bar), math.sqrt(rad))
