"""Channel view of an affine Bloch map: Choi matrix, CPTP checks, Kraus operators, Stiefel points.

Choi convention: ``C = sum_ab |a><b| (x) Phi(|a><b|)`` with the input factor
first, unnormalized (trace 2 for trace-preserving maps).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import I2, basis_coefficients, canonical_basis, matrix_from_bloch
from .propagator import AffineBlochMap

RANK_TOL = 1e-8


@dataclass(frozen=True)
class CPTPReport:
    min_eigenvalue: float
    tp_residual: float


@dataclass(frozen=True)
class SphereDistanceProfile:
    max_distance: float
    per_point: np.ndarray


def apply_affine_map(bloch_map: AffineBlochMap, X) -> np.ndarray:
    """Linear extension of the map to any 2x2 matrix via the four basis images."""
    images = [matrix_from_bloch(bloch_map(r)) for r in canonical_basis()]
    coeffs = basis_coefficients(X)
    return sum(c * img for c, img in zip(coeffs, images))


def choi_from_affine(bloch_map: AffineBlochMap) -> np.ndarray:
    choi = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[a, b] = 1.0
            choi += np.kron(unit, apply_affine_map(bloch_map, unit))
    return choi


def output_partial_trace(choi) -> np.ndarray:
    return np.einsum("aibi->ab", np.asarray(choi).reshape(2, 2, 2, 2))


def cptp_report(choi) -> CPTPReport:
    choi = np.asarray(choi, dtype=complex)
    if np.max(np.abs(choi - choi.conj().T)) > 1e-10:
        raise ValueError("Choi matrix is not Hermitian")
    herm = (choi + choi.conj().T) / 2
    return CPTPReport(
        min_eigenvalue=float(np.linalg.eigvalsh(herm)[0]),
        tp_residual=float(np.linalg.norm(output_partial_trace(choi) - I2)),
    )


def kraus_from_choi(choi, rank_tol: float = RANK_TOL) -> list[np.ndarray]:
    """Canonical Kraus operators from the eigendecomposition of the Choi matrix."""
    choi = np.asarray(choi, dtype=complex)
    evals, evecs = np.linalg.eigh((choi + choi.conj().T) / 2)
    if evals[0] < -rank_tol:
        raise ValueError(f"map is not completely positive: Choi eigenvalue {evals[0]:.3e}")
    kraus = []
    for lam, vec in sorted(zip(evals, evecs.T), key=lambda p: -p[0]):
        if lam > rank_tol:
            # vec[(a, i)] = K[i, a]
            kraus.append(np.sqrt(lam) * vec.reshape(2, 2).T)
    return kraus


def choi_from_kraus(kraus) -> np.ndarray:
    choi = np.zeros((4, 4), dtype=complex)
    for K in kraus:
        vec = np.asarray(K).T.reshape(-1)
        choi += np.outer(vec, vec.conj())
    return choi


def apply_kraus(kraus, rho) -> np.ndarray:
    return sum(K @ rho @ K.conj().T for K in kraus)


def kraus_completeness_residual(kraus) -> float:
    return float(np.max(np.abs(sum(K.conj().T @ K for K in kraus) - I2)))


def stiefel_embedding(kraus, tol: float = 1e-9) -> np.ndarray:
    """Stack up to four Kraus operators (zero padded) into an 8x2 matrix ``S`` with ``S^+ S = I``."""
    kraus = [np.asarray(K, dtype=complex) for K in kraus]
    if not 1 <= len(kraus) <= 4:
        raise ValueError(f"expected 1 to 4 Kraus operators, got {len(kraus)}")
    if any(K.shape != (2, 2) for K in kraus):
        raise ValueError("Kraus operators must be 2x2")
    if kraus_completeness_residual(kraus) > tol:
        raise ValueError("Kraus operators do not satisfy sum K^+ K = I")
    S = np.zeros((8, 2), dtype=complex)
    for i, K in enumerate(kraus):
        S[2 * i:2 * i + 2] = K
    return S


def stiefel_trajectory(maps, rank_tol: float = RANK_TOL) -> list[np.ndarray]:
    """Stiefel points of a sequence of affine maps (e.g. one per time sample)."""
    return [stiefel_embedding(kraus_from_choi(choi_from_affine(m), rank_tol)) for m in maps]


def sphere_distance_profile(trajectory) -> SphereDistanceProfile:
    """Distance ``1 - |r|`` of each point to the Bloch sphere."""
    r = np.asarray(trajectory, dtype=float).reshape(-1, 3)
    if r.shape[0] == 0:
        raise ValueError("trajectory is empty")
    d = 1.0 - np.linalg.norm(r, axis=1)
    return SphereDistanceProfile(float(d.max()), d)
