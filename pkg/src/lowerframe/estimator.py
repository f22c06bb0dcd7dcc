"""scikit-learn compatible front end."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .family import TAIL_MODES, VectorFamily
from .linalg import DEFAULT_RANK_TOL
from .pipeline import METHODS, MODES, PipelineConfig, run_pipeline
from .validation import check_choice, check_family_array, check_scalar
from .verify import frame_operator


class LowerFrameScaler(TransformerMixin, BaseEstimator):
    """Learn positive weights that give a total family a lower frame bound of 1.

    ``fit`` takes the family as an array with one vector per row and learns
    ``lambda_`` such that ``||x||^2 <= sum_k lambda_[k] |<v_k, x>|^2`` for
    every ``x``. ``transform`` rescales the rows by ``sqrt(lambda_)``.

    Parameters
    ----------
    mode : {"exact", "quantized"}
        How the approximant coefficients are chosen.
    method : {"direct", "neumann"}
        How ``(I - T)^{-1}`` is applied.
    tail : {"zero", "cyclic"}
        What the family looks like past its last row.
    rank_tol : float
        Relative numerical-rank threshold.
    lambda_floor : float
        Added to every weight to force strict positivity.
    samples : int
        Random directions used by the sampled verification checks.
    random_state : int
        Seed for those directions.

    Attributes
    ----------
    lambda_ : ndarray of shape (n_vectors,)
        Weights folded onto the rows of the fitted family.
    certificate_ : ScalingCertificate
        Full output of the run, including the verification report.
    min_frame_eig_ : float
        Smallest eigenvalue of ``sum_k lambda_k v_k v_k^*``.
    T_norm_ : float
    n_vectors_, n_features_in_ : int

    Examples
    --------
    >>> import numpy as np
    >>> est = LowerFrameScaler().fit(np.eye(2))
    >>> est.lambda_.round(3)
    array([ 5.657, 22.627])
    """

    def __init__(
        self,
        mode="exact",
        method="direct",
        tail="zero",
        rank_tol=DEFAULT_RANK_TOL,
        lambda_floor=0.0,
        samples=1000,
        random_state=0,
    ):
        self.mode = mode
        self.method = method
        self.tail = tail
        self.rank_tol = rank_tol
        self.lambda_floor = lambda_floor
        self.samples = samples
        self.random_state = random_state

    def _config(self):
        check_choice("mode", self.mode, MODES)
        check_choice("method", self.method, METHODS)
        check_choice("tail", self.tail, TAIL_MODES)
        check_scalar("rank_tol", self.rank_tol, min_val=0, strict=True)
        check_scalar("lambda_floor", self.lambda_floor, min_val=0)
        check_scalar("samples", self.samples, min_val=1, integer=True)
        check_scalar("random_state", self.random_state, integer=True)
        return PipelineConfig(
            mode=self.mode,
            method=self.method,
            rank_tol=float(self.rank_tol),
            lambda_floor=float(self.lambda_floor),
            samples=int(self.samples),
            seed=int(self.random_state),
        )

    def fit(self, X, y=None):
        config = self._config()
        X = check_family_array(X)
        field = "complex" if np.iscomplexobj(X) else "real"
        family = VectorFamily(X, tail_mode=self.tail, field=field)
        cert = run_pipeline(family, config)
        self.certificate_ = cert
        self.lambda_ = np.array(cert.lambda_eff)
        self.weights_ = dict(cert.lambdas)
        self.min_frame_eig_ = cert.min_frame_eig
        self.T_norm_ = cert.T_norm
        self.n_vectors_, self.n_features_in_ = X.shape
        return self

    def transform(self, X):
        """Scale row ``k`` of ``X`` by ``sqrt(lambda_[k])``."""
        check_is_fitted(self, "lambda_")
        X = check_family_array(X, n_vectors=self.n_vectors_, n_features=self.n_features_in_)
        return np.sqrt(self.lambda_)[:, None] * X

    def frame_operator(self):
        """Weighted frame operator ``sum_k lambda_k v_k v_k^*`` of the fitted family."""
        check_is_fitted(self, "lambda_")
        return frame_operator(self.certificate_.family, self.lambda_)
