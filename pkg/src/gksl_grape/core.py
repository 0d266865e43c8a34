"""Qubit model: parameters, Bloch <-> density-matrix conversion, generators, gate targets.

All dynamics in this package run on real Bloch vectors ``r = (r_x, r_y, r_z)``
with ``rho = (I + r . sigma) / 2``. Density matrices only appear at the edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL_BALL = 1e-9
_HERM_TOL = 1e-12
_TRACE_TOL = 1e-12
_UNITARY_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

GATE_X = SIGMA_X.copy()
GATE_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
GATES = {"X": GATE_X, "H": GATE_H}


@dataclass(frozen=True)
class SystemParams:
    """Transition frequency ``omega``, dipole moment ``mu`` and decoherence coefficient ``gamma``."""

    omega: float = 1.0
    mu: float = 0.1
    gamma: float = 0.01

    def __post_init__(self):
        if not np.isfinite(self.omega):
            raise ValueError(f"omega must be finite, got {self.omega}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class BlochGenerator:
    B: np.ndarray
    Bu: np.ndarray
    Bn: np.ndarray
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class GateTarget:
    U: np.ndarray
    target_bloch: np.ndarray  # shape (N, 3)


def bloch_generator(params: SystemParams) -> BlochGenerator:
    """Drift, coherent-control and incoherent-control matrices of the Bloch ODE."""
    w, mu, g = params.omega, params.mu, params.gamma
    B = np.array([[-g / 2, w, 0.0], [-w, -g / 2, 0.0], [0.0, 0.0, -g]])
    Bu = 2 * mu * np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    Bn = -g * np.diag([1.0, 1.0, 2.0])
    b = np.array([0.0, 0.0, g])
    return BlochGenerator(B, Bu, Bn, b)


def assemble_generator(params: SystemParams, u: float, n: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(A, b)`` with ``A = B + Bu*u + Bn*n`` for constant controls ``u``, ``n >= 0``."""
    if not n >= 0:
        raise ValueError(f"incoherent control n must be >= 0, got {n}")
    gen = bloch_generator(params)
    return gen.B + gen.Bu * u + gen.Bn * n, gen.b


def check_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"density matrix must be 2x2, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > _HERM_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > _TRACE_TOL:
        raise ValueError(f"density matrix trace is {np.trace(rho).real}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def bloch_from_density(rho) -> np.ndarray:
    """Bloch vector ``r_a = Tr(rho sigma_a)`` of a qubit density matrix."""
    rho = check_density(rho)
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def matrix_from_bloch(r) -> np.ndarray:
    """``(I + r . sigma) / 2`` without any validity check (used for non-physical maps)."""
    rx, ry, rz = r
    return 0.5 * np.array([[1 + rz, rx - 1j * ry], [rx + 1j * ry, 1 - rz]], dtype=complex)


def density_from_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError(f"Bloch vector must have 3 components, got shape {r.shape}")
    if np.linalg.norm(r) > 1 + TOL_BALL:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(r)} exceeds the unit ball")
    return matrix_from_bloch(r)


def canonical_basis() -> np.ndarray:
    """Bloch vectors of |0>, |1>, |+>, |i> (rows)."""
    return np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def basis_coefficients(X) -> np.ndarray:
    """Coefficients of a 2x2 matrix in the |0>,|1>,|+>,|i> density-matrix basis.

    For ``X = [[x1, x3 + i x4], [x3 - i x4, x2]]`` the coefficients are
    ``(x1 + x4 - x3, x2 + x4 - x3, 2 x3, -2 x4)``. Extends linearly to
    non-Hermitian ``X``.
    """
    X = np.asarray(X, dtype=complex)
    x1, x2 = X[0, 0], X[1, 1]
    x3 = (X[0, 1] + X[1, 0]) / 2
    x4 = (X[0, 1] - X[1, 0]) / 2j
    return np.array([x1 + x4 - x3, x2 + x4 - x3, 2 * x3, -2 * x4])


def check_unitary(U) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ValueError(f"gate must be 2x2, got shape {U.shape}")
    if np.max(np.abs(U.conj().T @ U - I2)) > _UNITARY_TOL:
        raise ValueError("gate matrix is not unitary")
    return U


def unitary_to_bloch_rotation(U) -> np.ndarray:
    """Rotation ``R`` with ``bloch(U rho U^+) = R bloch(rho)``; ``R_ab = Tr(s_a U s_b U^+)/2``."""
    U = check_unitary(U)
    R = np.empty((3, 3))
    for a, sa in enumerate(PAULIS):
        for b, sb in enumerate(PAULIS):
            R[a, b] = 0.5 * np.trace(sa @ U @ sb @ U.conj().T).real
    return R


def gate_targets(U, basis: Sequence | None = None) -> GateTarget:
    U = check_unitary(U)
    basis = canonical_basis() if basis is None else np.asarray(basis, dtype=float).reshape(-1, 3)
    R = unitary_to_bloch_rotation(U)
    return GateTarget(U=U, target_bloch=basis @ R.T)


def resolve_gate(gate) -> np.ndarray:
    """Accept ``"X"``, ``"H"`` or an explicit 2x2 unitary."""
    if isinstance(gate, str):
        try:
            return GATES[gate.upper()].copy()
        except KeyError:
            raise ValueError(f"unknown gate {gate!r}; expected one of {sorted(GATES)}") from None
    return check_unitary(gate)
