import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stiefelcoords.exceptions import (
    BaseMismatchError,
    DimensionError,
    NotOrthonormalError,
    PseudoRiemannianError,
)
from stiefelcoords.manifold import (
    AlphaMetric,
    as_metric,
    inner_alpha,
    norm_alpha,
    p_factors,
    project_tangent,
    random_point,
    random_tangent,
)
from stiefelcoords.validation import check_stiefel, check_tangent

seeds = st.integers(0, 2**32 - 1)
alphas = st.sampled_from([-0.9, -0.5, 0.0, 0.5, 1.0, 5.0])


def test_metric_parameters():
    for a in (-0.9, -0.5, 0.0, 0.5, 5.0, -3.0):
        m = AlphaMetric(a)
        assert m.mu == pytest.approx(m.nu - 1.0, abs=1e-15)
    assert AlphaMetric.canonical().is_canonical
    assert AlphaMetric.euclidean().is_euclidean
    assert AlphaMetric.euclidean().mu == -1.0
    assert as_metric(0.5) == AlphaMetric(0.5)


def test_alpha_minus_one_rejected():
    with pytest.raises(ValueError):
        AlphaMetric(-1.0)
    with pytest.raises(ValueError):
        AlphaMetric(float("nan"))


def test_pseudo_riemannian_flagged():
    m = AlphaMetric(-2.0)
    assert not m.is_riemannian
    with pytest.raises(PseudoRiemannianError):
        m.require_riemannian()


def test_random_point_orthonormal_and_deterministic():
    U = random_point(4, 4, 7)
    np.testing.assert_allclose(U.T @ U, np.eye(4), atol=1e-14)
    assert np.array_equal(random_point(9, 3, 11), random_point(9, 3, 11))
    with pytest.raises(ValueError):
        random_point(2, 3)


def test_random_point_octants_roughly_uniform():
    # uniform entries give only the positive octant; directions should
    # still spread across the three coordinate-dominant regions
    counts = np.zeros(3)
    rng = np.random.default_rng(0)
    for _ in range(2000):
        counts[np.argmax(random_point(3, 1, rng)[:, 0])] += 1
    expected = 2000 / 3
    sigma = np.sqrt(2000 * (1 / 3) * (2 / 3))
    assert np.all(np.abs(counts - expected) <= 3 * sigma)


@given(seeds, alphas, st.floats(0.0, 10.0))
def test_random_tangent_length(seed, alpha, length):
    U = random_point(8, 3, seed)
    D = random_tangent(U, seed + 1, alpha, length)
    check_tangent(U, D)
    assert norm_alpha(U, D, alpha) == pytest.approx(length, rel=1e-12, abs=1e-14)


def test_random_tangent_same_direction_across_metrics():
    U = random_point(10, 4, 1)
    D0 = random_tangent(U, 5, 0.0, 1.0)
    D1 = random_tangent(U, 5, -0.5, 1.0)
    c = np.vdot(D0, D1) / np.vdot(D0, D0)
    np.testing.assert_allclose(D1, c * D0, atol=1e-14)
    assert c != pytest.approx(1.0)


def test_random_tangent_zero_length():
    U = random_point(5, 2, 0)
    assert np.array_equal(random_tangent(U, 1, 0.0, 0.0), np.zeros((5, 2)))


def test_project_tangent_basics(rng):
    U = random_point(7, 3, 2)
    np.testing.assert_allclose(project_tangent(U, U), 0.0, atol=1e-15)
    D = random_tangent(U, 3)
    np.testing.assert_allclose(project_tangent(U, D), D, atol=1e-12)
    with pytest.raises(DimensionError):
        project_tangent(U, np.zeros((7, 2)))


@given(seeds)
def test_project_tangent_properties(seed):
    rng = np.random.default_rng(seed)
    U = random_point(9, 4, rng)
    W = rng.standard_normal((9, 4))
    P = project_tangent(U, W)
    A = U.T @ P
    assert np.linalg.norm(A + A.T) <= 1e-13
    np.testing.assert_allclose(project_tangent(U, P), P, atol=1e-12)
    Z = random_tangent(U, rng)
    assert np.vdot(P, Z) == pytest.approx(np.vdot(W, Z), abs=1e-12)


@given(seeds, alphas)
def test_inner_alpha_forms_agree(seed, alpha):
    rng = np.random.default_rng(seed)
    U = random_point(8, 3, rng)
    D1, D2 = random_tangent(U, rng), random_tangent(U, rng)
    m = AlphaMetric(alpha)
    full = np.trace(D1.T @ (np.eye(8) - 0.5 * m.nu * U @ U.T) @ D2)
    A1, A2 = U.T @ D1, U.T @ D2
    H1, H2 = D1 - U @ A1, D2 - U @ A2
    split = np.trace(A1.T @ A2) / (2 * (alpha + 1)) + np.trace(H1.T @ H2)
    val = inner_alpha(U, D1, D2, alpha)
    assert val == pytest.approx(full, abs=1e-12)
    assert val == pytest.approx(split, abs=1e-12)
    assert val == pytest.approx(inner_alpha(U, D2, D1, alpha), abs=1e-14)
    assert inner_alpha(U, D1, D1, alpha) > 0


def test_inner_alpha_special_cases(rng):
    U = random_point(6, 3, 0)
    D1, D2 = random_tangent(U, 1), random_tangent(U, 2)
    assert inner_alpha(U, D1, D2, -0.5) == pytest.approx(np.vdot(D1, D2), abs=1e-14)
    A = np.array([[0.0, 1.0, 2.0], [-1.0, 0.0, 0.5], [-2.0, -0.5, 0.0]])
    assert inner_alpha(U, U @ A, U @ A, 0.0) == pytest.approx(0.5 * np.sum(A * A))
    Z = np.zeros((6, 3))
    assert inner_alpha(U, Z, Z) == 0.0
    with pytest.raises(BaseMismatchError):
        inner_alpha(U, D1, np.zeros((6, 2)))


def test_norm_alpha_homogeneous_and_euclidean():
    U = random_point(6, 2, 0)
    D = random_tangent(U, 1)
    assert norm_alpha(U, -3.0 * D, 0.3) == pytest.approx(3.0 * norm_alpha(U, D, 0.3))
    assert norm_alpha(U, D, -0.5) == pytest.approx(np.linalg.norm(D))
    assert norm_alpha(U, np.zeros_like(D)) == 0.0


@given(seeds, st.integers(1, 5))
def test_p_factors_round_trip(seed, p):
    rng = np.random.default_rng(seed)
    U = random_point(2 * p + 1, p, rng)
    D = random_tangent(U, rng)
    f = p_factors(U, D)
    assert np.array_equal(f.A, -f.A.T)
    assert np.linalg.norm(f.to_tangent(U) - D) <= 1e-11
    assert np.linalg.norm(U.T @ f.Q) <= 1e-12


def test_p_factors_rank_deficient():
    U = random_point(10, 4, 3)
    A = np.zeros((4, 4))
    A[0, 1], A[1, 0] = 1.0, -1.0
    D = U @ A
    f = p_factors(U, D)
    assert np.linalg.norm(f.B) <= 1e-15
    np.testing.assert_allclose(f.to_tangent(U), D, atol=1e-15)


def test_validation_helpers():
    U = random_point(5, 2, 0)
    with pytest.raises(NotOrthonormalError):
        check_stiefel(2 * U)
    with pytest.raises(DimensionError):
        check_stiefel(np.ones((2, 3)))
    with pytest.raises(ValueError):
        check_tangent(U, U)
    with pytest.raises(ValueError):
        check_stiefel(np.full((3, 1), np.nan))
