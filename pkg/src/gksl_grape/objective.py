"""Hilbert-Schmidt distances and the gate-generation objective (infidelity)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemParams, canonical_basis, check_density, gate_targets, resolve_gate
from .propagator import AffineBlochMap, ControlGrid, PiecewiseControls, interval_generators


@dataclass(frozen=True, eq=False)
class GateProblem:
    """Everything the objective needs: model, time grid, gate and the input states."""

    params: SystemParams
    grid: ControlGrid
    U: np.ndarray
    basis: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float).reshape(-1, 3)
        targets = np.asarray(self.targets, dtype=float).reshape(-1, 3)
        if basis.shape[0] < 1:
            raise ValueError("need at least one basis state")
        if basis.shape != targets.shape:
            raise ValueError("basis and target lists differ in length")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "targets", targets)

    @classmethod
    def for_gate(cls, gate="H", params: SystemParams | None = None,
                 grid: ControlGrid | None = None, basis=None) -> "GateProblem":
        """Build a problem for ``gate`` (``"X"``, ``"H"`` or a 2x2 unitary); defaults to omega=1, mu=0.1, gamma=0.01 on T=5, M=10."""
        U = resolve_gate(gate)
        basis = canonical_basis() if basis is None else basis
        target = gate_targets(U, basis)
        return cls(params or SystemParams(), grid or ControlGrid.uniform(), U,
                   basis, target.target_bloch)


def hs_distance(rho1, rho2) -> float:
    """``Tr (rho1 - rho2)^2``."""
    diff = check_density(rho1) - check_density(rho2)
    return float(np.trace(diff @ diff).real)


def bloch_hs_distance(r1, r2) -> float:
    d = np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)
    return 0.5 * float(d @ d)


def map_distance(map1: AffineBlochMap, map2: AffineBlochMap, states) -> float:
    """Mean Hilbert-Schmidt distance between the images of ``states`` under two maps."""
    states = np.asarray(states, dtype=float).reshape(-1, 3)
    if states.shape[0] == 0:
        raise ValueError("state list is empty")
    d = map1(states) - map2(states)
    return 0.5 * float(np.mean(np.sum(d * d, axis=1)))


def final_states(problem: GateProblem, controls: PiecewiseControls, _steps=None) -> np.ndarray:
    """``r^(j)(T)`` for every basis state, shape ``(N, 3)``."""
    _, Es, gs, _ = _steps or interval_generators(problem.params, controls)
    r = problem.basis.copy()
    for E, g in zip(Es, gs):
        r = r @ E.T + g
    return r


def gate_objective(problem: GateProblem, controls: PiecewiseControls, _steps=None) -> float:
    """``(1/2N) sum_j |r^(j)(T) - r_target^(j)|^2``, always in ``[0, 2]``."""
    if controls.grid.M != problem.grid.M or not np.array_equal(
            controls.grid.breakpoints, problem.grid.breakpoints):
        raise ValueError("controls do not live on the problem's time grid")
    res = final_states(problem, controls, _steps) - problem.targets
    per_state = np.sum(res * res, axis=1)
    total = 0.0
    for term in per_state:  # fixed order keeps results bitwise reproducible
        total += term
    return float(0.5 * total / len(per_state))
