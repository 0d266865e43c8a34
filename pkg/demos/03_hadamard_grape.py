"""Generate a Hadamard gate with adaptive-step GRAPE.

Start from a sine coherent pulse and a Gaussian incoherent pulse, then run
gradient descent with step growth 1.1 on success and halving on failure.
"""
import numpy as np

import gksl_grape as gg

problem = gg.GateProblem.for_gate("H")
init = gg.default_initial_controls(problem.grid)
config = gg.OptimizerConfig(h0=1.0, c=1.1, d=0.5, epsilon=1e-3, L_stuck=20)

result = gg.adaptive_grape(problem, init, config)
print(f"stopped: {result.stop_reason.value} after {result.iterations} iterations")
print(f"final objective {result.final_objective:.3e}")

accepted = sum(r.accepted for r in result.history[1:])
print(f"{accepted} accepted steps, {result.iterations - accepted} rejected")
for r in result.history[::8]:
    print(f"  l={r.l:3d}  G={r.objective:.4e}  |grad|={r.grad_norm:.3e}  h={r.step:.3f}")

print("\noptimized u:", np.round(result.controls.u, 4))
print("optimized n:", np.round(result.controls.n, 4))

# The gate acts on all four basis states, and the trajectories stay close to
# the surface of the Bloch sphere even though the incoherent control is on.
for r0, target in zip(problem.basis, problem.targets):
    _, traj = gg.propagate_dense(problem.params, result.controls, r0, 50)
    prof = gg.sphere_distance_profile(traj)
    print(f"{r0} -> {np.round(traj[-1], 3)} (target {target}), "
          f"max distance to sphere {prof.max_distance:.3f}")
