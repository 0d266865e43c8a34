"""Bloch-vector dynamics of a qubit driven by coherent and incoherent controls.

Run with ``python3 demos/01_bloch_dynamics.py``.
"""
import numpy as np

import gksl_grape as gg

# The model: transition frequency omega, dipole moment mu, decoherence rate gamma.
params = gg.SystemParams(omega=1.0, mu=0.1, gamma=0.01)
gen = gg.bloch_generator(params)
print("drift B =\n", gen.B)
print("coherent Bu =\n", gen.Bu)
print("incoherent Bn =\n", gen.Bn)
print("offset b =", gen.b)

# With no controls the ground state |0> (Bloch vector (0, 0, 1)) is a fixed point.
grid = gg.ControlGrid.uniform(T=5.0, M=10)
zero = gg.PiecewiseControls(grid, np.zeros(10), np.zeros(10))
print("\n|0> under zero controls:", gg.propagate(params, zero, [0, 0, 1])[-1])

# Any other state relaxes towards it: r_z(t) = 1 + (r_z(0) - 1) exp(-gamma t).
t, traj = gg.propagate_dense(params, zero, [0, 0, -1], samples_per_interval=5)
print("|1> relaxes, r_z(T) =", traj[-1, 2], " exact:", 1 - 2 * np.exp(-params.gamma * 5))

# Turning on the default initial guess (sine u, Gaussian n) rotates and shrinks the Bloch vector.
controls = gg.default_initial_controls(grid)
print("\nu =", np.round(controls.u, 3))
print("n =", np.round(controls.n, 3))
for r0 in gg.canonical_basis():
    t, traj = gg.propagate_dense(params, controls, r0, samples_per_interval=20)
    radius = np.linalg.norm(traj, axis=1)
    print(f"start {r0} -> end {np.round(traj[-1], 4)}, min |r| = {radius.min():.4f}")

# The whole evolution is one affine map r -> M r + v on the Bloch ball.
bloch_map = gg.compose_affine_map(params, controls)
print("\nend-to-end map M =\n", np.round(bloch_map.Mmat, 4), "\nv =", np.round(bloch_map.v, 5))
