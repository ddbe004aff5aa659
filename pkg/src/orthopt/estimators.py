"""scikit-learn style estimators backed by POGO.

``StiefelPCA`` finds an orthonormal basis of the top principal subspace by
maximizing ``tr(W C W^T)`` over row-orthogonal ``W``; ``OrthogonalProcrustes``
fits an orthogonal map between two paired data sets.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .linalg import adjoint, householder_qr, matmul, skew_part
from .optimizers import IterateSet, OrthoStepConfig, multi_step
from .problems import PCAProblem, ProcrustesProblem


def _optimize(problem, cfg, max_iter, tol, seed):
    its = IterateSet.create(problem.init_params(seed), cfg)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        grads = problem.descent_grads(its.matrices)
        x = its.matrices[0]
        # relative gradient norm: zero exactly at critical points on the manifold
        if np.linalg.norm(skew_part(matmul(adjoint(x), grads[0]))) <= tol:
            n_iter -= 1
            break
        its = multi_step(its, grads, cfg)
    return its.matrices[0], n_iter


class StiefelPCA(TransformerMixin, BaseEstimator):
    """Principal subspace by optimization on the Stiefel manifold.

    The covariance is normalized by its Frobenius norm before optimizing, so
    ``learning_rate`` is dimensionless.
    """

    def __init__(
        self,
        n_components=2,
        learning_rate=1.0,
        momentum=0.3,
        max_iter=2000,
        tol=1e-8,
        random_state=None,
    ):
        self.n_components = n_components
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        n_features = X.shape[1]
        if not 1 <= self.n_components <= n_features:
            raise ValueError(f"n_components must be in [1, {n_features}], got {self.n_components}")
        self.mean_ = X.mean(axis=0)
        xc = X - self.mean_
        cov = matmul(xc.T, xc) / (X.shape[0] - 1)
        scale = np.linalg.norm(cov) or 1.0
        problem = PCAProblem(cov / scale, self.n_components)
        cfg = OrthoStepConfig("pogo", self.learning_rate, base="sgd", momentum=self.momentum)
        w, self.n_iter_ = _optimize(problem, cfg, self.max_iter, self.tol, self.random_state)
        # the objective only sees the subspace; rotate to principal axes inside it
        evals, evecs = np.linalg.eigh(matmul(matmul(w, cov), w.T))
        order = np.argsort(evals)[::-1]
        self.components_ = matmul(evecs[:, order].T, w)
        self.explained_variance_ = evals[order]
        self.n_features_in_ = n_features
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=np.float64)
        return X @ self.components_ + self.mean_


class OrthogonalProcrustes(BaseEstimator):
    """Orthogonal map ``W`` (``d x k``, orthonormal rows, ``d <= k``) minimizing ``||X W - Y||``.

    ``X = Q R`` reduces the data to the square problem ``||R W - Q^T Y||``.
    """

    def __init__(self, learning_rate=None, max_iter=3000, tol=1e-9, random_state=None):
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, Y):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        Y = check_array(Y, dtype=np.float64, ensure_min_samples=2)
        if X.shape[0] != Y.shape[0]:
            raise ValueError(f"X and Y need the same number of samples, got {X.shape[0]} and {Y.shape[0]}")
        d, k = X.shape[1], Y.shape[1]
        if d > k:
            raise ValueError(f"need n_features(X) <= n_features(Y), got {d} > {k}")
        if X.shape[0] < d:
            raise ValueError(f"need at least {d} samples, got {X.shape[0]}")
        q, r = householder_qr(X)
        problem = ProcrustesProblem(r, matmul(q.T, Y))
        # 1 / (2 sigma_max(R)^2) keeps the step inside the stable range
        lr = self.learning_rate or 0.5 / np.linalg.norm(r, 2) ** 2
        cfg = OrthoStepConfig("pogo", lr)
        self.coef_, self.n_iter_ = _optimize(problem, cfg, self.max_iter, self.tol, self.random_state)
        self.optimal_coef_ = problem.optimal_params()[0]
        self.n_features_in_ = d
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_

    def score(self, X, Y):
        """Negative mean squared alignment error (higher is better)."""
        Y = check_array(Y, dtype=np.float64)
        return -float(np.mean((self.predict(X) - Y) ** 2))


__all__ = ["StiefelPCA", "OrthogonalProcrustes"]
