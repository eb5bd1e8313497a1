"""Stationary members Psi_nu: density frozen, phase rotating at a known rate.

Run: python demos/stationary_states.py
"""
import numpy as np

from nlgpe import derive_effective, make_grid, residual
from nlgpe.closedform import exact_psi_nu, exact_psi_nu_family, phase_rate, stationary_c5
from nlgpe.config import REFERENCE

model = REFERENCE
eff = derive_effective(model)
print(f"Omega = {eff.omega:.6f}, Omega_bar = {eff.omega_bar:.6f}, kappa_tilde = {eff.kappa_tilde}")

grid = make_grid(model, eff, d22_max=stationary_c5(5, eff, model))
t = 2.0
print(f"\n{'nu':>3} {'rate':>12} {'measured':>12} {'residual':>10}")
for nu in range(6):
    a = exact_psi_nu(nu, 0.0, eff, model, grid).samples
    b = exact_psi_nu(nu, t, eff, model, grid).samples
    j = np.argmax(np.abs(a))
    # unwrap against the predicted rate to read the measured one off a single sample
    w = phase_rate(nu, eff, model)
    dphi = np.angle(b[j] / a[j] * np.exp(1j * w * t))
    measured = w - dphi / t
    res = residual(exact_psi_nu_family(nu, eff, model, grid), t, model).relative_residual
    print(f"{nu:>3} {w:12.8f} {measured:12.8f} {res:10.2e}")

# the variance is the self-consistency condition: perturb it and the residual jumps
from nlgpe.closedform import TimeFamily, fock_state

c5 = stationary_c5(0, eff, model)
for scale in (1.0, 1.01, 1.1):
    fam = TimeFamily(lambda s, c=scale * c5: fock_state(0, s, c, eff, model, grid))
    print(f"C5 scaled by {scale:4}: residual {residual(fam, t, model).relative_residual:.2e}")
