import numpy as np
import pytest

from gksl_grape.channel import (apply_affine_map, apply_kraus, choi_from_affine, choi_from_kraus,
                                cptp_report, kraus_completeness_residual, kraus_from_choi,
                                sphere_distance_profile, stiefel_embedding, stiefel_trajectory)
from gksl_grape.core import (GATE_H, GATE_X, PAULIS, canonical_basis, density_from_bloch,
                             matrix_from_bloch)
from gksl_grape.propagator import (AffineBlochMap, PiecewiseControls, affine_map_history,
                                   compose_affine_map)

IDENTITY = AffineBlochMap(np.eye(3), np.zeros(3))
PHI_PLUS = np.array([1, 0, 0, 1]) / np.sqrt(2)


def pauli_choi(m: AffineBlochMap):
    """Reference Choi matrix from the Pauli expansion of the channel action."""
    choi = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            X = np.zeros((2, 2), dtype=complex)
            X[a, b] = 1
            tr = np.trace(X)
            x = np.array([np.trace(X @ s) for s in PAULIS])
            y = m.Mmat @ x + m.v * tr
            out = 0.5 * (tr * np.eye(2) + sum(yi * s for yi, s in zip(y, PAULIS)))
            choi += np.kron(X, out)
    return choi


def same_phase(K, ref):
    i = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
    return K * (ref[i] / K[i])


def test_choi_identity():
    choi = choi_from_affine(IDENTITY)
    np.testing.assert_allclose(choi, 2 * np.outer(PHI_PLUS, PHI_PLUS), atol=1e-15)
    rep = cptp_report(choi)
    assert rep.min_eigenvalue == pytest.approx(0.0, abs=1e-15)
    assert rep.tp_residual == pytest.approx(0.0, abs=1e-15)


def test_choi_x_conjugation():
    choi = choi_from_affine(AffineBlochMap(np.diag([1.0, -1, -1]), np.zeros(3)))
    vec = np.kron(np.eye(2), GATE_X) @ PHI_PLUS * np.sqrt(2)
    np.testing.assert_allclose(choi, np.outer(vec, vec.conj()), atol=1e-15)
    assert np.linalg.matrix_rank(choi, tol=1e-12) == 1


def test_choi_depolarizing():
    choi = choi_from_affine(AffineBlochMap(np.zeros((3, 3)), np.zeros(3)))
    np.testing.assert_allclose(choi, np.eye(4) / 2, atol=1e-15)


def test_choi_matches_pauli_reference(rng):
    for _ in range(50):
        m = AffineBlochMap(rng.normal(size=(3, 3)), rng.normal(size=3))
        np.testing.assert_allclose(choi_from_affine(m), pauli_choi(m), atol=1e-14)


def test_apply_affine_map_linear_extension(rng):
    m = AffineBlochMap(rng.normal(size=(3, 3)) * 0.3, rng.normal(size=3) * 0.2)
    r = rng.normal(size=3) * 0.3
    np.testing.assert_allclose(apply_affine_map(m, matrix_from_bloch(r)), matrix_from_bloch(m(r)),
                               atol=1e-15)


def test_non_cp_shift_detected():
    choi = choi_from_affine(AffineBlochMap(np.eye(3), np.array([0.0, 0.0, 0.5])))
    ref_min = np.linalg.eigvalsh(pauli_choi(AffineBlochMap(np.eye(3), np.array([0, 0, 0.5]))))[0]
    rep = cptp_report(choi)
    assert rep.min_eigenvalue < 0
    assert rep.min_eigenvalue == pytest.approx(ref_min, abs=1e-14)
    with pytest.raises(ValueError, match="completely positive"):
        kraus_from_choi(choi)


def test_kraus_identity_and_x():
    (K,) = kraus_from_choi(choi_from_affine(IDENTITY))
    np.testing.assert_allclose(same_phase(K, np.eye(2)), np.eye(2), atol=1e-14)
    (K,) = kraus_from_choi(choi_from_affine(AffineBlochMap.from_unitary(GATE_X)))
    np.testing.assert_allclose(same_phase(K, GATE_X), GATE_X, atol=1e-14)


def test_channel_of_controls_is_cptp_and_kraus_round_trip(params, grid, rng):
    for _ in range(50):
        c = PiecewiseControls(grid, rng.uniform(-10, 10, grid.M), rng.uniform(-3, 3, grid.M))
        m = compose_affine_map(params, c)
        choi = choi_from_affine(m)
        rep = cptp_report(choi)
        assert rep.min_eigenvalue >= -1e-8
        assert rep.tp_residual <= 1e-10
        kraus = kraus_from_choi(choi)
        assert 1 <= len(kraus) <= 4
        assert kraus_completeness_residual(kraus) <= 1e-9
        for r in canonical_basis():
            np.testing.assert_allclose(apply_kraus(kraus, density_from_bloch(r)),
                                       matrix_from_bloch(m(r)), atol=1e-9)
        np.testing.assert_allclose(choi_from_kraus(kraus), choi, atol=1e-9)


def test_kraus_gauge_freedom_same_choi(rng):
    kraus = kraus_from_choi(choi_from_affine(AffineBlochMap(np.diag([0.6, 0.6, 0.36]),
                                                            np.array([0, 0, 0.64]))))
    # mixing Kraus operators with a unitary leaves the channel unchanged
    W, _ = np.linalg.qr(rng.normal(size=(len(kraus),) * 2) + 1j * rng.normal(size=(len(kraus),) * 2))
    mixed = [sum(W[i, j] * kraus[j] for j in range(len(kraus))) for i in range(len(kraus))]
    np.testing.assert_allclose(choi_from_kraus(mixed), choi_from_kraus(kraus), atol=1e-14)


def test_stiefel_embedding():
    S = stiefel_embedding([GATE_H])
    expected = np.zeros((8, 2), dtype=complex)
    expected[:2] = GATE_H
    np.testing.assert_array_equal(S, expected)
    S = stiefel_embedding([np.eye(2)])
    assert np.allclose(S[:2], np.eye(2)) and np.all(S[2:] == 0)
    with pytest.raises(ValueError):
        stiefel_embedding([0.5 * np.eye(2)])
    with pytest.raises(ValueError):
        stiefel_embedding([np.eye(2) / np.sqrt(5)] * 5)


def test_stiefel_trajectory(params, grid, paper_init):
    traj = stiefel_trajectory(affine_map_history(params, paper_init))
    assert len(traj) == grid.M + 1
    for S in traj:
        assert S.shape == (8, 2)
        assert np.max(np.abs(S.conj().T @ S - np.eye(2))) <= 1e-10


def test_sphere_distance_profile():
    prof = sphere_distance_profile([[0, 0, 1], [1, 0, 0], [0, -1, 0]])
    assert prof.max_distance == 0.0
    prof = sphere_distance_profile([[0, 0, 1], [0, 0, 0]])
    assert prof.max_distance == 1.0
    np.testing.assert_array_equal(prof.per_point, [0.0, 1.0])
    with pytest.raises(ValueError):
        sphere_distance_profile(np.empty((0, 3)))
