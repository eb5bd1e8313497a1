"""Build new solutions from old ones with the ladder symmetry and the intertwiner.

Run: python demos/symmetry_operators.py
"""
import numpy as np

from nlgpe import ParamSet, derive_effective, intertwiner_apply, ladder_symmetry_apply
from nlgpe.closedform import TimeFamily, exact_psi_nu
from nlgpe.config import REFERENCE
from nlgpe.evolve import ale_residual
from nlgpe.symmetry import ale_family, displaced_grid

model = REFERENCE
eff = derive_effective(model)
grid = displaced_grid([4], [1.0, 1j], eff, model)
t = 0.9

# ladder: Psi_0 -> Psi_nu, compared against the closed form
psi0 = exact_psi_nu(0, t, eff, model, grid)
for nu in range(1, 5):
    up = ladder_symmetry_apply(psi0, nu, t, eff, model)
    err = np.max(np.abs(up.samples - exact_psi_nu(nu, t, eff, model, grid).samples))
    print(f"ladder nu={nu}: max deviation from Psi_nu {err:.1e}")

# intertwiner: a superposition on orbit C1 mapped to orbit C2
C1 = ParamSet(0.3, -0.2, 0.0, 0.0, 0.6)
C2 = ParamSet(-0.4, 0.5, 0.0, 0.0, 0.6)
src = ale_family({0: 1.0, 2: 0.2j}, C1, eff, model, grid)
img = TimeFamily(lambda s: intertwiner_apply(src(s), s, C1, C2, eff, model))
print(f"\nsource residual for C1: {ale_residual(src, t, C1, eff, model):.1e}")
print(f"image residual for C2:  {ale_residual(img, t, C2, eff, model):.1e}")
print(f"image residual for C1:  {ale_residual(img, t, C1, eff, model):.1e}  (not a C1 solution)")
