"""Photon spectral densities for incoherent control (Planck units, hbar = c = k_B = 1)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .propagator import ControlGrid, PiecewiseControls


class TailNotConvergedError(ArithmeticError):
    pass


def planck_density(omega, beta: float):
    """Black-body photon density ``omega^3 / (pi^2 (exp(beta omega) - 1))``.

    ``omega = 0`` gives the continuous limit 0; negative frequencies are rejected.
    """
    if not beta > 0:
        raise ValueError(f"inverse temperature must be > 0, got {beta}")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("frequencies must be finite and >= 0")
    x = beta * w
    safe = np.where(x > 0, x, 1.0)
    # omega^3 e^{-x} / (1 - e^{-x}) avoids overflow; -> omega^2 / beta as omega -> 0
    val = np.where(x > 1e-8, w**3 * np.exp(-safe) / -np.expm1(-safe), w**2 / beta) / np.pi**2
    return float(val) if np.ndim(omega) == 0 else val


def filtered_density(omega, beta: float, center: float, variance: float):
    """Planck density times the Gaussian window ``exp(-(omega - center)^2 / (2 variance))``."""
    if not variance > 0:
        raise ValueError(f"filter variance must be > 0, got {variance}")
    w = np.asarray(omega, dtype=float)
    val = planck_density(w, beta) * np.exp(-((w - center) ** 2) / (2 * variance))
    return float(val) if np.ndim(omega) == 0 else val


@dataclass(frozen=True)
class SpectralDensity:
    """``omega -> n(omega)``: Planck at ``beta``, optionally Gaussian filtered."""

    beta: float
    center: float | None = None
    variance: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"inverse temperature must be > 0, got {self.beta}")
        if (self.center is None) != (self.variance is None):
            raise ValueError("filter needs both center and variance")
        if self.scale < 0:
            raise ValueError("scale must be >= 0")

    @property
    def filtered(self) -> bool:
        return self.center is not None

    def __call__(self, omega):
        if self.filtered:
            return self.scale * filtered_density(omega, self.beta, self.center, self.variance)
        return self.scale * planck_density(omega, self.beta)

    def tail_bound(self, omega_max: float) -> float:
        """Upper bound on ``int_{omega_max}^inf n(omega) d omega``."""
        b, W = self.beta, omega_max
        # omega^3/(e^{b omega}-1) <= omega^3 e^{-b omega} / (1 - e^{-b W}) for omega >= W
        poly = W**3 / b + 3 * W**2 / b**2 + 6 * W / b**3 + 6 / b**4
        return float(self.scale * np.exp(-b * W) * poly / (-np.expm1(-b * W)) / np.pi**2)


def total_density(density: SpectralDensity, omega_max: float = 50.0, nodes: int = 20001) -> float:
    """Total photon density ``int_0^inf n(omega) d omega`` (trapezoid on ``[0, omega_max]``).

    Raises :class:`TailNotConvergedError` when the neglected tail may exceed
    1% of the computed value.
    """
    if nodes < 2:
        raise ValueError("need at least two nodes")
    if not omega_max > 0:
        raise ValueError("omega_max must be > 0")
    w = np.linspace(0.0, omega_max, int(nodes))
    total = float(np.trapezoid(density(w), w))
    tail = density.tail_bound(omega_max)
    if tail > 0.01 * total:
        raise TailNotConvergedError(
            f"tail bound {tail:.3e} exceeds 1% of the integral {total:.3e}; raise omega_max")
    return total


def peak_frequency(beta: float) -> float:
    """Maximizer of the Planck density, root of ``3 (1 - exp(-x)) = x`` scaled by ``1/beta``."""
    x = 3.0
    for _ in range(50):
        f = 3 * (1 - np.exp(-x)) - x
        x -= f / (3 * np.exp(-x) - 1)
    return x / beta


def sample_incoherent_control(density: SpectralDensity, omega0: float, grid: ControlGrid,
                              u=None) -> PiecewiseControls:
    """Constant incoherent control ``n = n(omega0)`` on every interval (coherent part ``u``, default 0)."""
    n0 = float(density(omega0))
    u = np.zeros(grid.M) if u is None else u
    return PiecewiseControls(grid, u, np.full(grid.M, np.sqrt(n0)))
