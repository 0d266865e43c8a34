"""From an optimized control to a quantum channel, its Kraus operators and a Stiefel point."""
import numpy as np

import gksl_grape as gg

problem = gg.GateProblem.for_gate("H")
result = gg.adaptive_grape(problem, gg.default_initial_controls(problem.grid))
bloch_map = gg.compose_affine_map(problem.params, result.controls)

choi = gg.choi_from_affine(bloch_map)
report = gg.cptp_report(choi)
print("Choi eigenvalues:", np.round(np.linalg.eigvalsh(choi), 6))
print(f"min eigenvalue {report.min_eigenvalue:.3e}, trace-preservation residual {report.tp_residual:.1e}")

kraus = gg.kraus_from_choi(choi)
print(f"\n{len(kraus)} Kraus operators; completeness residual "
      f"{gg.kraus_completeness_residual(kraus):.1e}")
for i, K in enumerate(kraus):
    print(f"K{i} =\n{np.round(K, 4)}")

# The channel reproduces the affine map on any density matrix.
rho = gg.density_from_bloch([0.3, -0.2, 0.5])
out = gg.apply_kraus(kraus, rho)
print("\nKraus image Bloch vector:", np.round(gg.bloch_from_density(out), 6))
print("affine image Bloch vector:", np.round(bloch_map([0.3, -0.2, 0.5]), 6))

# Stacking the Kraus operators (padded with zeros to eight) gives an 8x2 matrix
# with orthonormal columns.
S = gg.stiefel_embedding(kraus)
print("\nS^dagger S =\n", np.round(S.conj().T @ S, 12))

# One Stiefel point per grid breakpoint along the optimized evolution. Kraus
# operators are unique only up to a unitary mixing, so compare frames through
# invariants such as the number of nonzero operators.
frames = gg.stiefel_trajectory(gg.affine_map_history(problem.params, result.controls))
for t, S_t in zip(problem.grid.breakpoints, frames):
    rank = int(np.sum(np.linalg.norm(S_t.reshape(4, 2, 2), axis=(1, 2)) > 1e-9))
    resid = np.max(np.abs(S_t.conj().T @ S_t - np.eye(2)))
    print(f"t = {t:3.1f}: {rank} Kraus operators, |S^dagger S - I| = {resid:.1e}")
