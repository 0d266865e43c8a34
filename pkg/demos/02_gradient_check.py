"""Analytic gradient against central finite differences.

The derivative of each interval propagator is an integral over the interval,
evaluated with the trapezoid rule; the error should fall by about 4x each
time the number of partitions doubles.
"""
import numpy as np

import gksl_grape as gg

problem = gg.GateProblem.for_gate("H")
controls = gg.default_initial_controls(problem.grid)
print("objective at the initial guess:", gg.gate_objective(problem, controls))

reference = gg.finite_difference_gradient(problem, controls, step=1e-6)
print("finite-difference gradient (u part):", np.round(reference.du, 5))

previous = None
for n in (5, 10, 20, 40, 80, 160, 320):
    analytic = gg.objective_gradient(problem, controls, gg.QuadratureConfig(n_partition=n))
    err = gg.gradient_error(analytic, reference)["rel_error_l2"]
    ratio = "" if previous is None else f"   ratio {previous / err:5.2f}"
    print(f"n_partition = {n:4d}   relative L2 error {err:.3e}{ratio}")
    previous = err
