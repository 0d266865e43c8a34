"""Gradient descent with a monotone acceptance rule and a grow/shrink step size."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .gradient import QuadratureConfig, objective_and_gradient
from .objective import GateProblem, gate_objective
from .propagator import ControlGrid, PiecewiseControls

logger = logging.getLogger(__name__)


class OptimizationError(RuntimeError):
    pass


class StopReason(str, enum.Enum):
    THRESHOLD = "threshold"
    STUCK = "stuck"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class OptimizerConfig:
    h0: float = 1.0
    c: float = 1.1
    d: float = 0.5
    epsilon: float = 1e-3
    L_stuck: int = 20
    max_iter: int = 1000

    def __post_init__(self):
        if not self.h0 > 0:
            raise ValueError(f"h0 must be > 0, got {self.h0}")
        if not self.c >= 1:
            raise ValueError(f"c must be >= 1, got {self.c}")
        if not 0 < self.d < 1:
            raise ValueError(f"d must lie in (0, 1), got {self.d}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if int(self.L_stuck) != self.L_stuck or self.L_stuck < 1:
            raise ValueError(f"L_stuck must be a positive integer, got {self.L_stuck}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")


@dataclass(frozen=True)
class IterationRecord:
    """State after iteration ``l``.

    ``objective`` and ``grad_norm`` refer to the current iterate, ``step`` is
    the step size that the next proposal will use and ``accepted`` tells
    whether iteration ``l`` moved the controls. Record 0 is the initial guess.
    """

    l: int
    objective: float
    grad_norm: float
    step: float
    accepted: bool


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    controls: PiecewiseControls
    final_objective: float
    history: list[IterationRecord] = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_ITER

    @property
    def iterations(self) -> int:
        return len(self.history) - 1


def default_initial_controls(grid: ControlGrid) -> PiecewiseControls:
    """Sine coherent guess and Gaussian incoherent guess sampled at interval starts."""
    x = grid.starts / grid.T
    u = np.sin(2 * np.pi * x)
    n = np.exp(-4 * (x - 0.5) ** 2)
    return PiecewiseControls(grid, u, np.sqrt(n))


def adaptive_grape(problem: GateProblem, init: PiecewiseControls,
                   config: OptimizerConfig = OptimizerConfig(),
                   quad: QuadratureConfig = QuadratureConfig()) -> OptimizationResult:
    """Minimize the gate objective.

    A proposal ``v - h grad`` is taken only if it strictly lowers the
    objective; the step is then multiplied by ``c``, otherwise by ``d``.
    Stops when the objective drops below ``epsilon``, when it has not changed
    for ``L_stuck`` consecutive iterations, or after ``max_iter`` iterations.
    """
    M = problem.grid.M
    v = np.concatenate([init.u, init.w])
    value, grad = objective_and_gradient(problem, init, quad)
    g = grad.flat()
    _check_finite(value, g, 0)
    h = config.h0
    history = [IterationRecord(0, value, float(np.linalg.norm(g)), h, True)]
    unchanged = 0
    reason = StopReason.MAX_ITER

    for l in range(1, config.max_iter + 1):
        if value < config.epsilon:
            reason = StopReason.THRESHOLD
            break
        candidate = v - h * g
        cand_controls = init.with_values(candidate[:M], candidate[M:])
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                cand_value = gate_objective(problem, cand_controls)
        except ValueError as exc:  # non-finite generator entries
            raise OptimizationError(f"non-finite objective at iteration {l} (step {h:g}): {exc}") from exc
        if not np.isfinite(cand_value):
            raise OptimizationError(f"non-finite objective at iteration {l} (step {h:g})")
        accepted = cand_value < value
        if accepted:
            v, value = candidate, cand_value
            _, grad = objective_and_gradient(problem, cand_controls, quad)
            g = grad.flat()
            _check_finite(value, g, l)
            h *= config.c
            unchanged = 0
        else:
            h *= config.d
            unchanged += 1
        history.append(IterationRecord(l, value, float(np.linalg.norm(g)), h, accepted))
        logger.debug("iter %d objective %.6e step %.3e accepted %s", l, value, h, accepted)
        if unchanged >= config.L_stuck:
            reason = StopReason.STUCK
            break
    else:
        if value < config.epsilon:
            reason = StopReason.THRESHOLD

    logger.info("stopped after %d iterations (%s), objective %.6e",
                len(history) - 1, reason.value, value)
    return OptimizationResult(init.with_values(v[:M], v[M:]), value, history, reason)


def _check_finite(value, g, l):
    if not (np.isfinite(value) and np.all(np.isfinite(g))):
        raise OptimizationError(f"non-finite objective or gradient at iteration {l}")
