"""Photon spectral densities: black-body at two temperatures and a Gaussian-filtered one."""
import numpy as np

import gksl_grape as gg

omega = np.linspace(0, 15, 7)
for beta in (0.8, 1.0):
    print(f"beta={beta}:", np.round(gg.planck_density(omega, beta), 4))
print("filtered (beta=0.8, centre 5, variance 1):",
      np.round(gg.filtered_density(omega, 0.8, 5.0, 1.0), 4))

# The total photon density at beta = 1 is pi^2 / 15.
total = gg.total_density(gg.SpectralDensity(1.0))
print(f"\ntotal density at beta=1: {total:.6f}  (pi^2/15 = {np.pi**2 / 15:.6f})")
print(f"peak frequency at beta=1: {gg.peak_frequency(1.0):.4f}")

# A spectral density can seed a constant incoherent control at the qubit frequency.
grid = gg.ControlGrid.uniform()
seed = gg.sample_incoherent_control(gg.SpectralDensity(1.0), omega0=1.0, grid=grid)
print("n(omega0 = 1) on every interval:", seed.n[0])
problem = gg.GateProblem.for_gate("H")
print("objective with zero u and thermal n:", gg.gate_objective(problem, seed))
