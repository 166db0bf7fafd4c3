import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from stiefelcoords import RiemannianNormalCoordinates
from stiefelcoords.exceptions import DimensionError, NoConvergenceError
from stiefelcoords.exp import exp_alpha_reduced
from stiefelcoords.manifold import random_point, random_tangent


def sample(k=4, n=10, p=3, alpha=0.0, dist=1.0, seed=0):
    rng = np.random.default_rng(seed)
    U = random_point(n, p, rng)
    D = np.stack([random_tangent(U, rng, alpha, dist) for _ in range(k)])
    X = np.stack([exp_alpha_reduced(U, d, alpha) for d in D])
    return U, D, X


def test_get_set_params_and_clone():
    est = RiemannianNormalCoordinates(alpha=-0.5, method="pshoot-4", steps=4)
    params = est.get_params()
    assert params["alpha"] == -0.5 and params["method"] == "pshoot-4"
    other = clone(est)
    assert other.get_params() == params
    est.set_params(tau=1e-9)
    assert est.tau == 1e-9


@pytest.mark.parametrize("alpha", [0.0, -0.5, 1.5])
def test_transform_recovers_tangents(alpha):
    U, D, X = sample(alpha=alpha)
    est = RiemannianNormalCoordinates(alpha=alpha, base_point=U).fit(X)
    Z = est.transform(X)
    assert Z.shape == (4, 30)
    np.testing.assert_allclose(Z.reshape(D.shape), D, atol=1e-10)
    assert est.n_iter_.shape == (4,)
    np.testing.assert_allclose(est.inverse_transform(Z), X, atol=1e-12)


def test_default_base_point_is_first_sample():
    _, _, X = sample()
    est = RiemannianNormalCoordinates().fit(X)
    np.testing.assert_array_equal(est.base_point_, X[0])
    Z = est.fit_transform(X)
    np.testing.assert_allclose(Z[0], 0.0, atol=1e-14)


def test_single_point_input():
    U, D, X = sample(k=1)
    est = RiemannianNormalCoordinates(base_point=U).fit(X[0])
    np.testing.assert_allclose(est.transform(X[0]), D.reshape(1, -1), atol=1e-10)
    np.testing.assert_allclose(est.inverse_transform(D[0].ravel())[0], X[0], atol=1e-12)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        RiemannianNormalCoordinates().transform(np.eye(3)[:, :1])


def test_shape_and_parameter_errors():
    U, _, X = sample()
    est = RiemannianNormalCoordinates(base_point=U).fit(X)
    with pytest.raises(DimensionError):
        est.transform(np.zeros((2, 5, 3)))
    with pytest.raises(DimensionError):
        est.inverse_transform(np.zeros((2, 7)))
    with pytest.raises(DimensionError):
        RiemannianNormalCoordinates(base_point=U).fit(np.zeros((2, 5, 2)))
    with pytest.raises(ValueError):
        RiemannianNormalCoordinates(on_failure="ignore").fit(X)
    with pytest.raises(ValueError):
        RiemannianNormalCoordinates(method="bogus").fit(X)
    with pytest.raises(ValueError):
        RiemannianNormalCoordinates(alpha=-3.0).fit(X)


def test_failure_policy():
    U, _, X = sample(k=2, n=12, p=3, dist=0.95 * np.pi, seed=3)
    est = RiemannianNormalCoordinates(method="pshoot", base_point=U, max_iter=5)
    est.fit(X)
    with pytest.raises(NoConvergenceError):
        est.transform(X)
    Z = est.set_params(on_failure="nan").fit(X).transform(X)
    assert np.isnan(Z).all()


def test_in_pipeline_with_vector_space_step():
    # mean in normal coordinates, mapped back, stays on the manifold
    from sklearn.preprocessing import FunctionTransformer
    U, _, X = sample(k=5, alpha=0.0, dist=0.5)
    rnc = RiemannianNormalCoordinates(base_point=U)
    pipe = make_pipeline(rnc, FunctionTransformer(lambda Z: Z.mean(axis=0, keepdims=True)))
    Zbar = pipe.fit_transform(X)
    mean_point = rnc.inverse_transform(Zbar)[0]
    np.testing.assert_allclose(mean_point.T @ mean_point, np.eye(3), atol=1e-12)
