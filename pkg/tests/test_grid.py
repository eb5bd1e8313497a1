import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlgpe import EdgeLeak, Grid, WaveFunction, make_grid
from nlgpe.grid import check_edges, deriv, momentum, shift


def gaussian(grid, x0=0.0, w=1.0, k0=0.0):
    return np.exp(-(grid.x - x0) ** 2 / (2 * w * w) + 1j * k0 * grid.x)


def test_grid_shape():
    g = Grid.symmetric(10.0, 256)
    assert g.x[0] == -10.0 and g.dx == pytest.approx(20 / 256)
    assert g.k_max == pytest.approx(np.pi / g.dx)
    with pytest.raises(ValueError):
        Grid(0.0, 0.1, 100)


def test_wavefunction_is_immutable_and_finite():
    g = Grid.symmetric(5.0, 64)
    psi = WaveFunction.on(g, gaussian(g))
    with pytest.raises(ValueError):
        psi.samples[0] = 1.0
    with pytest.raises(ValueError):
        WaveFunction.on(g, np.full(64, np.nan))


def test_gaussian_norm_and_inner():
    g = Grid.symmetric(12.0, 256)
    psi = WaveFunction.on(g, gaussian(g) / np.pi ** 0.25)
    assert psi.norm_sq() == pytest.approx(1.0, abs=1e-14)
    assert psi.inner(psi) == pytest.approx(1.0, abs=1e-14)


def test_spectral_derivative_matches_analytic():
    g = Grid.symmetric(12.0, 256)
    f = gaussian(g, 0.5, 1.1, 0.8)
    exact = (-(g.x - 0.5) / 1.21 + 0.8j) * f
    assert np.max(np.abs(deriv(f, g) - exact)) < 1e-12
    assert np.max(np.abs(momentum(f, g, 0.7) + 0.7j * exact)) < 1e-12


@given(st.floats(-2, 2))
def test_shift_is_translation(d):
    g = Grid.symmetric(15.0, 256)
    out = shift(gaussian(g, 0.3), g, d)
    assert np.max(np.abs(out - gaussian(g, 0.3 + d))) < 1e-12


def test_edge_leak():
    g = Grid.symmetric(3.0, 64)
    with pytest.raises(EdgeLeak):
        check_edges(WaveFunction.on(g, gaussian(g)))
    g = Grid.symmetric(12.0, 128)
    assert check_edges(WaveFunction.on(g, gaussian(g))) < 1e-12


def test_csv_roundtrip(tmp_path):
    g = Grid.symmetric(4.0, 8)
    psi = WaveFunction.on(g, np.arange(8) * (0.1 + 0.3j) + 1 / 3)
    path = tmp_path / "psi.csv"
    psi.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], g.x)
    assert np.array_equal(data[:, 1] + 1j * data[:, 2], psi.samples)
    assert path.read_text().splitlines()[0] == "x,re,im"


def test_make_grid_resolves_packet(model, eff):
    g = make_grid(model, eff)
    assert g.n >= 64 and g.n & (g.n - 1) == 0
    ell = np.sqrt(model.hbar * model.mu / eff.omega)
    assert g.dx <= ell / 6 + 1e-15
