"""Analytic gradient of the gate objective with respect to piecewise-constant controls.

Derivatives of ``exp(A dt)`` come from the Wilcox integral
``int_0^dt exp(A s) E exp(A (dt - s)) ds`` evaluated by the trapezoid rule;
a block-triangular exponential gives the same integral exactly and serves as
a reference.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import propagator
from .core import SystemParams, assemble_generator, bloch_generator
from .objective import GateProblem, gate_objective
from .propagator import PiecewiseControls, expm, interval_generators, matrix_exponential


@dataclass(frozen=True)
class QuadratureConfig:
    n_partition: int = 20

    def __post_init__(self):
        if int(self.n_partition) != self.n_partition or self.n_partition < 1:
            raise ValueError(f"n_partition must be a positive integer, got {self.n_partition}")


@dataclass(frozen=True, eq=False)
class ControlGradient:
    du: np.ndarray
    dw: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.du, self.dw])

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))


class StepDerivatives(NamedTuple):
    dexp_du: np.ndarray
    dexp_dw: np.ndarray
    dg_du: np.ndarray
    dg_dw: np.ndarray


def _weights(dt, n):
    h = dt / n
    weights = np.full(n + 1, h)
    weights[0] = weights[-1] = h / 2
    return weights


def _powers(step, n):
    powers = np.empty((n + 1,) + step.shape)
    powers[0] = np.eye(step.shape[0])
    for i in range(1, n + 1):
        powers[i] = powers[i - 1] @ step
    return powers


def _sandwich_integrals(A, dt, directions, n):
    """Trapezoid rule for ``int_0^dt exp(A s) E exp(A(dt-s)) ds`` for each ``E``."""
    powers = _powers(matrix_exponential(A, dt / n), n)
    weights = _weights(dt, n)
    return [np.tensordot(weights, powers @ E @ powers[::-1], axes=1) for E in directions]


def directional_exp_derivative(A, dt: float, E, quad: QuadratureConfig = QuadratureConfig()) -> np.ndarray:
    """Derivative of ``exp(A dt)`` along ``A -> A + eps E`` (trapezoid quadrature)."""
    A = np.asarray(A, dtype=float)
    E = np.asarray(E, dtype=float)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(E))):
        raise ValueError("non-finite matrix in directional derivative")
    if not dt >= 0:
        raise ValueError(f"duration must be >= 0, got {dt}")
    return _sandwich_integrals(A, dt, [E], quad.n_partition)[0]


def directional_exp_derivative_exact(A, dt: float, E) -> np.ndarray:
    """Same integral from the upper-right block of ``exp([[A, E], [0, A]] dt)``."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = A
    block[n:, n:] = A
    block[:n, n:] = E
    return expm(block * dt)[:n, n:]


def _step_derivatives(A, Eexp, b, Bu, Bn, w, dt, n, offset_form="integral"):
    # Powers of exp([[A, b], [0, 0]] h) carry exp(A s) and g(s) on the trapezoid nodes.
    dim = A.shape[0]
    aug = np.zeros((dim + 1, dim + 1))
    aug[:dim, :dim] = A
    aug[:dim, dim] = b
    powers = _powers(matrix_exponential(aug, dt / n), n)
    P = powers[:, :dim, :dim]
    G = powers[:, :dim, dim]
    weights = _weights(dt, n)
    Iu = np.tensordot(weights, P @ Bu @ P[::-1], axes=1)
    In = np.tensordot(weights, P @ Bn @ P[::-1], axes=1)
    if offset_form == "integral":
        # dg/dv = int_0^dt exp(A s) dA/dv g(dt - s) ds
        dg_du = weights @ np.einsum("sij,jk,sk->si", P, Bu, G[::-1])
        dg_dn = weights @ np.einsum("sij,jk,sk->si", P, Bn, G[::-1])
    elif offset_form == "closed":
        Ainv_b = np.linalg.solve(A, b)
        EmI = Eexp - np.eye(dim)
        dg_du = Iu @ Ainv_b - EmI @ np.linalg.solve(A, Bu @ Ainv_b)
        dg_dn = In @ Ainv_b - EmI @ np.linalg.solve(A, Bn @ Ainv_b)
    else:
        raise ValueError(f"unknown offset_form {offset_form!r}")
    return StepDerivatives(Iu, 2 * w * In, dg_du, 2 * w * dg_dn)


def step_derivatives(params: SystemParams, u_k: float, w_k: float, dt: float,
                     quad: QuadratureConfig = QuadratureConfig(),
                     offset_form: str = "integral") -> StepDerivatives:
    """Derivatives of ``exp(A_k dt)`` and ``g_k`` with respect to ``u_k`` and ``w_k``.

    ``offset_form="closed"`` evaluates the offset derivative as
    ``(dexp - (exp(A dt) - I) A^-1 dA) A^-1 b``. The default ``"integral"``
    form computes the same quantity as ``int exp(A s) dA g(dt - s) ds``,
    which avoids the cancellation between the two closed-form terms and
    needs no inverse of ``A``.
    """
    if not dt >= 0:
        raise ValueError(f"duration must be >= 0, got {dt}")
    A, b = assemble_generator(params, u_k, w_k**2)
    gen = bloch_generator(params)
    return _step_derivatives(A, matrix_exponential(A, dt), b, gen.Bu, gen.Bn, w_k, dt,
                             quad.n_partition, offset_form)


def _all_step_derivatives(params, controls, steps, quad):
    As, Es, _, b = steps
    gen = bloch_generator(params)
    return [_step_derivatives(A, E, b, gen.Bu, gen.Bn, w, dt, quad.n_partition)
            for A, E, w, dt in zip(As, Es, controls.w, controls.grid.dt)]


def final_state_gradient(params: SystemParams, controls: PiecewiseControls, r0,
                         quad: QuadratureConfig = QuadratureConfig()) -> np.ndarray:
    """Jacobian of ``r(T)``: array ``J[m, k]`` = d r(T) / d v_k^m, ``m = 0`` for ``u``, ``1`` for ``w``."""
    steps = interval_generators(params, controls)
    traj = propagator.propagate(params, controls, r0, _steps=steps)
    ders = _all_step_derivatives(params, controls, steps, quad)
    Es = steps[1]
    M = controls.grid.M
    jac = np.empty((2, M, 3))
    suffix = np.eye(3)
    for k in range(M - 1, -1, -1):
        d = ders[k]
        jac[0, k] = suffix @ (d.dexp_du @ traj[k] + d.dg_du)
        jac[1, k] = suffix @ (d.dexp_dw @ traj[k] + d.dg_dw)
        suffix = suffix @ Es[k]
    return jac


def objective_and_gradient(problem: GateProblem, controls: PiecewiseControls,
                           quad: QuadratureConfig = QuadratureConfig()) -> tuple[float, ControlGradient]:
    steps = interval_generators(problem.params, controls)
    value = gate_objective(problem, controls, _steps=steps)
    ders = _all_step_derivatives(problem.params, controls, steps, quad)
    Es = steps[1]
    M = controls.grid.M
    N = problem.basis.shape[0]
    du = np.zeros(M)
    dw = np.zeros(M)
    for r0, target in zip(problem.basis, problem.targets):
        traj = propagator.propagate(problem.params, controls, r0, _steps=steps)
        # adjoint sweep: lam carries residual^T times the suffix product
        lam = traj[-1] - target
        for k in range(M - 1, -1, -1):
            d = ders[k]
            du[k] += lam @ (d.dexp_du @ traj[k] + d.dg_du)
            dw[k] += lam @ (d.dexp_dw @ traj[k] + d.dg_dw)
            lam = Es[k].T @ lam
    return value, ControlGradient(du / N, dw / N)


def objective_gradient(problem: GateProblem, controls: PiecewiseControls,
                       quad: QuadratureConfig = QuadratureConfig()) -> ControlGradient:
    return objective_and_gradient(problem, controls, quad)[1]


def central_differences(func: Callable[[np.ndarray], float], x, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function of a flat vector."""
    if not step > 0:
        raise ValueError(f"finite-difference step must be > 0, got {step}")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        grad[i] = (func(xp) - func(xm)) / (2 * step)
    return grad


def finite_difference_gradient(problem: GateProblem, controls: PiecewiseControls,
                               step: float = 1e-6) -> ControlGradient:
    """Reference gradient by central differences of the exactly propagated objective."""
    M = controls.grid.M

    def f(v):
        return gate_objective(problem, controls.with_values(v[:M], v[M:]))

    g = central_differences(f, np.concatenate([controls.u, controls.w]), step)
    return ControlGradient(g[:M], g[M:])


def gradient_error(analytic: ControlGradient, reference: ControlGradient) -> dict:
    diff = analytic.flat() - reference.flat()
    return {
        "rel_error_l2": float(np.linalg.norm(diff) / np.linalg.norm(reference.flat())),
        "max_abs_component_error": float(np.max(np.abs(diff))),
    }
