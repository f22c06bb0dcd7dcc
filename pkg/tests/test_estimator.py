import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from lowerframe.estimator import LowerFrameScaler
from lowerframe.exceptions import InputError, TotalityError


def test_get_set_params_roundtrip():
    est = LowerFrameScaler(mode="quantized", samples=20)
    params = est.get_params()
    assert params["mode"] == "quantized" and params["samples"] == 20
    est2 = clone(est).set_params(method="neumann")
    assert est2.method == "neumann" and est2.mode == "quantized"


def test_fit_orthonormal():
    est = LowerFrameScaler().fit(np.eye(3))
    np.testing.assert_allclose(est.lambda_, np.sqrt(2) * 4.0 ** np.arange(1, 4), rtol=1e-13)
    assert est.n_features_in_ == 3 and est.n_vectors_ == 3
    assert est.min_frame_eig_ == pytest.approx(4 * np.sqrt(2))


def test_transform_gives_frame_bound():
    X = np.array([[1.0, 0.0], [1.0, 1.0]])
    Y = LowerFrameScaler().fit_transform(X)
    S = Y.T @ Y.conj()
    assert np.linalg.eigvalsh(S)[0] >= 1
    assert Y.dtype == float


def test_complex_input():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    est = LowerFrameScaler(samples=50).fit(X)
    assert est.certificate_.family.field == "complex"
    assert np.iscomplexobj(est.transform(X))
    assert est.certificate_.passed


def test_frame_operator():
    est = LowerFrameScaler().fit(np.eye(2))
    np.testing.assert_allclose(est.frame_operator(), np.diag(est.lambda_))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        LowerFrameScaler().transform(np.eye(2))


def test_shape_checked_on_transform():
    est = LowerFrameScaler().fit(np.eye(2))
    with pytest.raises(InputError, match="vectors"):
        est.transform(np.eye(3)[:, :2])


@pytest.mark.parametrize(
    "params", [{"mode": "fast"}, {"tail": "mirror"}, {"rank_tol": 0.0}, {"samples": 0}, {"lambda_floor": -1.0}]
)
def test_invalid_params(params):
    with pytest.raises(InputError):
        LowerFrameScaler(**params).fit(np.eye(2))


def test_rejects_non_total():
    with pytest.raises(TotalityError):
        LowerFrameScaler().fit([[1.0, 0.0], [2.0, 0.0]])


def test_rejects_bad_arrays():
    with pytest.raises(InputError):
        LowerFrameScaler().fit([1.0, 2.0])
    with pytest.raises(InputError):
        LowerFrameScaler().fit([["a", "b"]])
    with pytest.raises(InputError):
        LowerFrameScaler().fit([[np.inf, 0.0]])


def test_cyclic_tail():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    est = LowerFrameScaler(tail="cyclic", samples=50).fit(X)
    assert est.certificate_.chain.core.shape[1] == 2
    assert est.min_frame_eig_ >= 1


def test_in_sklearn_pipeline():
    pipe = make_pipeline(FunctionTransformer(lambda X: 2 * X), LowerFrameScaler(samples=20))
    Y = pipe.fit_transform(np.eye(3))
    lam = pipe[-1].lambda_
    np.testing.assert_allclose(Y, 2 * np.diag(np.sqrt(lam)))
