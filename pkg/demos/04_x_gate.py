"""The X gate is harder than the Hadamard gate under the same settings.

After 120 iterations the objective is small but still above the 1e-3
threshold that the Hadamard run reaches in fewer than 60.
"""
import numpy as np

import gksl_grape as gg

config = gg.OptimizerConfig(max_iter=120)
for gate in ("H", "X"):
    problem = gg.GateProblem.for_gate(gate)
    result = gg.adaptive_grape(problem, gg.default_initial_controls(problem.grid), config)
    print(f"{gate}: {result.stop_reason.value:9s} iterations {result.iterations:4d}  "
          f"objective {result.final_objective:.4e}")

# Why four input states and not two: sqrt(Y) and H agree on |0> and |1>
# but differ on |+> and |i>.
sqrt_y = (np.eye(2) - 1j * gg.SIGMA_Y) / np.sqrt(2)
m_sy = gg.AffineBlochMap.from_unitary(sqrt_y)
m_h = gg.AffineBlochMap.from_unitary(gg.GATE_H)
basis = gg.canonical_basis()
print("\ndistance sqrt(Y) vs H on |0>,|1>:", gg.map_distance(m_sy, m_h, basis[:2]))
print("distance sqrt(Y) vs H on all four:", gg.map_distance(m_sy, m_h, basis))
