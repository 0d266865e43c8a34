"""Piecewise-constant propagation of the Bloch equation ``dr/dt = A(t) r + b``.

On each interval ``[t_{k-1}, t_k)`` the controls are constant, so the exact
update is ``r_k = exp(A_k dt_k) r_{k-1} + g_k`` with
``g_k = (exp(A_k dt_k) - I) A_k^{-1} b``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .core import TOL_BALL, SystemParams, assemble_generator, bloch_generator

logger = logging.getLogger(__name__)

# Beyond this condition number g_k is taken from the augmented 4x4 exponential.
COND_LIMIT = 1e12


class IllConditionedGeneratorWarning(RuntimeWarning):
    pass


# Pade coefficients and 1-norm thresholds (Higham 2005, double precision).
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_THETA = ((3, 1.495585217958292e-2), (5, 2.539398330063230e-1),
          (7, 9.504178996162932e-1), (9, 2.097847961257068e0))
_THETA13 = 5.371920351148152


def _pade_uv(X, m):
    c = _PADE[m]
    I = np.eye(X.shape[0])
    X2 = X @ X
    if m != 13:
        powers = [I, X2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ X2)
        U = X @ sum(c[2 * j + 1] * P for j, P in enumerate(powers))
        V = sum(c[2 * j] * P for j, P in enumerate(powers))
        return U, V
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (c[13] * X6 + c[11] * X4 + c[9] * X2)
             + c[7] * X6 + c[5] * X4 + c[3] * X2 + c[1] * I)
    V = (X6 @ (c[12] * X6 + c[10] * X4 + c[8] * X2)
         + c[6] * X6 + c[4] * X4 + c[2] * X2 + c[0] * I)
    return U, V


def expm(X: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Pade approximant of degree 3..13."""
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix exponential of a non-finite matrix")
    norm1 = np.abs(X).sum(axis=0).max() if X.size else 0.0
    for m, theta in _THETA:
        if norm1 <= theta:
            U, V = _pade_uv(X, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA13))))
    U, V = _pade_uv(X / 2.0**s, 13)
    E = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        E = E @ E
    return E


def matrix_exponential(A: np.ndarray, dt: float) -> np.ndarray:
    """``exp(A dt)`` for ``dt >= 0``."""
    if not dt >= 0:
        raise ValueError(f"duration must be >= 0, got {dt}")
    return expm(np.asarray(A, dtype=float) * dt)


def _augmented_offset(A, b, dt):
    n = A.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = A
    aug[:n, n] = b
    return expm(aug * dt)[:n, n]


def step_offset(A: np.ndarray, b: np.ndarray, dt: float, E: np.ndarray | None = None) -> np.ndarray:
    """Inhomogeneous part ``g = (exp(A dt) - I) A^{-1} b = int_0^dt exp(A s) b ds``.

    ``E`` may carry a precomputed ``exp(A dt)``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.linalg.cond(A) > COND_LIMIT:
        warnings.warn("generator is near-singular; using augmented exponential for the offset",
                      IllConditionedGeneratorWarning, stacklevel=2)
        return _augmented_offset(A, b, dt)
    if E is None:
        E = matrix_exponential(A, dt)
    return (E - np.eye(A.shape[0])) @ np.linalg.solve(A, b)


@dataclass(frozen=True, eq=False)
class ControlGrid:
    """Breakpoints ``0 = t_0 < t_1 < ... < t_M = T``."""

    breakpoints: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.breakpoints, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("grid needs at least one interval")
        if t[0] != 0.0:
            raise ValueError(f"grid must start at t = 0, got {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("grid breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", t)

    @classmethod
    def uniform(cls, T: float = 5.0, M: int = 10) -> "ControlGrid":
        if not T > 0:
            raise ValueError(f"final time T must be > 0, got {T}")
        if int(M) != M or M < 1:
            raise ValueError(f"number of intervals M must be a positive integer, got {M}")
        return cls(np.arange(M + 1) * (T / M))

    @property
    def T(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def M(self) -> int:
        return self.breakpoints.size - 1

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def starts(self) -> np.ndarray:
        return self.breakpoints[:-1]


@dataclass(frozen=True, eq=False)
class PiecewiseControls:
    """Coherent amplitudes ``u`` and incoherent roots ``w`` (``n = w**2``) per interval."""

    grid: ControlGrid
    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        w = np.array(self.w, dtype=float).ravel()
        if u.size != self.grid.M or w.size != self.grid.M:
            raise ValueError(f"control lengths ({u.size}, {w.size}) do not match M = {self.grid.M}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> np.ndarray:
        return self.w**2

    def with_values(self, u, w) -> "PiecewiseControls":
        return PiecewiseControls(self.grid, u, w)


@dataclass(frozen=True, eq=False)
class AffineBlochMap:
    """Bloch-vector action ``r -> Mmat @ r + v`` of a qubit channel."""

    Mmat: np.ndarray
    v: np.ndarray

    def __call__(self, r):
        return np.asarray(r, dtype=float) @ self.Mmat.T + self.v

    @classmethod
    def from_unitary(cls, U) -> "AffineBlochMap":
        from .core import unitary_to_bloch_rotation

        return cls(unitary_to_bloch_rotation(U), np.zeros(3))


def interval_generators(params: SystemParams, controls: PiecewiseControls):
    """Per-interval ``(A_k, exp(A_k dt_k), g_k)`` lists and the shared ``b``."""
    As, Es, gs = [], [], []
    b = bloch_generator(params).b
    for uk, nk, dtk in zip(controls.u, controls.n, controls.grid.dt):
        A, _ = assemble_generator(params, uk, nk)
        E = matrix_exponential(A, dtk)
        As.append(A)
        Es.append(E)
        gs.append(step_offset(A, b, dtk, E))
    return As, Es, gs, b


def propagate(params: SystemParams, controls: PiecewiseControls, r0, _steps=None) -> np.ndarray:
    """Bloch vectors ``r_0 .. r_M`` at the grid breakpoints, shape ``(M + 1, 3)``."""
    r0 = np.asarray(r0, dtype=float)
    if np.linalg.norm(r0) > 1 + TOL_BALL:
        raise ValueError("initial Bloch vector lies outside the unit ball")
    _, Es, gs, _ = _steps or interval_generators(params, controls)
    out = np.empty((len(Es) + 1, 3))
    out[0] = r0
    for k, (E, g) in enumerate(zip(Es, gs)):
        out[k + 1] = E @ out[k] + g
    return out


def propagate_dense(params: SystemParams, controls: PiecewiseControls, r0,
                    samples_per_interval: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Trajectory sampled ``samples_per_interval`` times per interval.

    Returns ``(times, states)``; the samples of interval ``k`` sit at
    ``t_{k-1} + j dt_k / s`` for ``j = 1..s``, preceded by ``t_0``. With
    ``s = 1`` this reproduces :func:`propagate`.
    """
    if int(samples_per_interval) != samples_per_interval or samples_per_interval < 1:
        raise ValueError("samples_per_interval must be a positive integer")
    s = int(samples_per_interval)
    steps = interval_generators(params, controls)
    As, Es, gs, b = steps
    nodes = propagate(params, controls, r0, _steps=steps)
    grid = controls.grid
    times = [0.0]
    states = [nodes[0]]
    for k in range(grid.M):
        for j in range(1, s + 1):
            if j == s:
                times.append(grid.breakpoints[k + 1])
                states.append(nodes[k + 1])
                continue
            tau = grid.dt[k] * j / s
            E = matrix_exponential(As[k], tau)
            times.append(grid.breakpoints[k] + tau)
            states.append(E @ nodes[k] + step_offset(As[k], b, tau, E))
    return np.array(times), np.array(states)


def compose_affine_map(params: SystemParams, controls: PiecewiseControls) -> AffineBlochMap:
    """End-to-end affine map ``r_0 -> r(T)`` for the given controls."""
    _, Es, gs, _ = interval_generators(params, controls)
    Mmat = np.eye(3)
    v = np.zeros(3)
    for E, g in zip(Es, gs):
        Mmat = E @ Mmat
        v = E @ v + g
    return AffineBlochMap(Mmat, v)


def affine_map_history(params: SystemParams, controls: PiecewiseControls) -> list[AffineBlochMap]:
    """Affine maps ``r_0 -> r(t_k)`` at every breakpoint, starting with the identity."""
    _, Es, gs, _ = interval_generators(params, controls)
    maps = [AffineBlochMap(np.eye(3), np.zeros(3))]
    for E, g in zip(Es, gs):
        prev = maps[-1]
        maps.append(AffineBlochMap(E @ prev.Mmat, E @ prev.v + g))
    return maps
