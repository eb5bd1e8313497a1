"""Uniform periodic grids, grid wave functions and spectral helpers."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math
from typing import Iterable

import numpy as np

from .errors import EdgeLeak

EDGE_THRESHOLD = 1e-12
# finer grids only amplify roundoff in repeated spectral derivatives
POINTS_PER_LENGTH = 6


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class Grid:
    """Periodic grid ``x_j = x_min + j*dx`` for ``j < n``; ``n`` is a power of two."""

    x_min: float
    dx: float
    n: int

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two, got {self.n}")
        if not self.dx > 0:
            raise ValueError("grid step must be positive")

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "Grid":
        return cls(-half_width, 2.0 * half_width / n, n)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, self.dx)

    @property
    def k_max(self) -> float:
        return math.pi / self.dx


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid_min: float
    grid_step: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.all(np.isfinite(s)):
            raise ValueError("wave function has non-finite samples")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        Grid(self.grid_min, self.grid_step, s.size)  # validates size

    @classmethod
    def on(cls, grid: Grid, samples) -> "WaveFunction":
        return cls(grid.x_min, grid.dx, samples)

    @cached_property
    def grid(self) -> Grid:
        return Grid(self.grid_min, self.grid_step, self.samples.size)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def with_samples(self, samples) -> "WaveFunction":
        return WaveFunction(self.grid_min, self.grid_step, samples)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid_step)

    def inner(self, other: "WaveFunction") -> complex:
        """Hermitian product (self, other), conjugate-linear in ``self``."""
        return complex(np.sum(np.conj(self.samples) * other.samples) * self.grid_step)

    def density(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def to_csv(self, path) -> None:
        write_rows(path, ("x", "re", "im"),
                   zip(self.x, self.samples.real, self.samples.imag))

    def density_to_csv(self, path) -> None:
        write_rows(path, ("x", "density"), zip(self.x, self.density()))


def write_rows(path, header: Iterable[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")


def check_edges(psi: WaveFunction, threshold: float = EDGE_THRESHOLD) -> float:
    """Raise EdgeLeak if the edge density exceeds ``threshold`` times the peak.

    Returns the measured edge ratio.
    """
    rho = psi.density()
    peak = rho.max()
    if peak == 0:
        raise EdgeLeak("wave function vanishes identically")
    edge = max(rho[:2].max(), rho[-2:].max())
    ratio = float(edge / peak)
    if ratio > threshold:
        raise EdgeLeak(f"edge density ratio {ratio:.3g} exceeds {threshold:.1g}; widen the grid")
    return ratio


# spectral operators; all act on raw sample arrays

def deriv(f: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    return np.fft.ifft((1j * grid.k) ** order * np.fft.fft(f))


def momentum(f: np.ndarray, grid: Grid, hbar: float) -> np.ndarray:
    """Apply p = -i hbar d/dx."""
    return np.fft.ifft(hbar * grid.k * np.fft.fft(f))


def shift(f: np.ndarray, grid: Grid, d: float) -> np.ndarray:
    """Return samples of f(x - d) via a Fourier phase ramp (exact for band-limited f)."""
    if d == 0:
        return np.array(f, dtype=complex)
    return np.fft.ifft(np.exp(-1j * grid.k * d) * np.fft.fft(f))


def make_grid(model, eff, x_max: float = 0.0, d22_max: float | None = None,
              p_max: float = 0.0, d11_max: float | None = None,
              widths: float = 12.0, min_points: int = 64) -> Grid:
    """Choose a symmetric power-of-two grid for a packet on a known orbit.

    Half-width is ``x_max + widths*sqrt(d22_max)``.  The step resolves at least
    POINTS_PER_LENGTH points per oscillator length sqrt(hbar*mu/Omega) and puts the Nyquist
    momentum beyond ``p_max + widths*sqrt(d11_max)``.
    """
    hb, mu = model.hbar, model.mu
    ell = math.sqrt(hb * mu / eff.omega)
    if d22_max is None:
        d22_max = hb * mu / (2 * eff.omega)
    if d11_max is None:
        d11_max = hb * (model.rho ** 2 + eff.omega ** 2) / (2 * eff.omega * mu)
    half = abs(x_max) + widths * math.sqrt(d22_max)
    dx = ell / POINTS_PER_LENGTH
    p_reach = abs(p_max) + widths * math.sqrt(d11_max)
    dx = min(dx, math.pi * hb / p_reach)
    n = max(min_points, 1 << math.ceil(math.log2(2 * half / dx)))
    return Grid.symmetric(half, n)
