"""Geometry of the row-orthogonal Stiefel manifold ``{X : X X^H = I_p}``."""
from dataclasses import dataclass

import numpy as np

from .exceptions import NotOnManifoldError, ShapeError
from .linalg import (
    REAL,
    adjoint,
    as_matrix,
    dtype_for,
    householder_qr,
    matmul,
    skew_part,
)

DEFAULT_CERT_TOL = 1e-8


def manifold_distance(x):
    """``||X X^H - I_p||_F``; zero exactly on the manifold."""
    gram = matmul(x, adjoint(x))
    gram[np.diag_indices_from(gram)] -= 1.0
    return float(np.linalg.norm(gram))


def normal_gradient(x):
    """Gradient of ``N(X) = 1/4 ||X X^H - I||^2``, i.e. ``(X X^H - I) X``."""
    gram = matmul(x, adjoint(x))
    return matmul(gram, x) - x


@dataclass(frozen=True)
class StiefelPoint:
    """A matrix certified to be within ``certified_tol`` of the manifold.

    Build with :meth:`certify`; :meth:`unchecked` skips the check and is meant
    for infeasible methods that carry off-manifold iterates.
    """

    matrix: np.ndarray
    certified_tol: float

    @classmethod
    def certify(cls, x, tol=DEFAULT_CERT_TOL):
        x = as_matrix(x, "Stiefel point")
        if x.shape[0] > x.shape[1]:
            raise ShapeError(f"row-orthogonal convention needs p <= n, got shape {x.shape}")
        dist = manifold_distance(x)
        if dist > tol:
            raise NotOnManifoldError(f"distance {dist:.3e} exceeds certification tolerance {tol:.1e}")
        return cls(x, tol)

    @classmethod
    def unchecked(cls, x):
        return cls(as_matrix(x, "Stiefel point"), float("inf"))

    @property
    def shape(self):
        return self.matrix.shape

    def distance(self):
        return manifold_distance(self.matrix)


@dataclass(frozen=True)
class TangentDirection:
    """Riemannian gradient ``ambient = X S`` together with its skew factor ``S``."""

    ambient: np.ndarray
    skew_factor: np.ndarray


def _matrix(x):
    return x.matrix if isinstance(x, StiefelPoint) else x


def relative_gradient(x, g):
    """Map a Euclidean direction ``g`` to ``S = Skew(X^H g)`` and ``X S``."""
    x = _matrix(x)
    if x.shape != g.shape:
        raise ShapeError(f"point has shape {x.shape} but direction has shape {g.shape}")
    s = skew_part(matmul(adjoint(x), g))
    return TangentDirection(matmul(x, s), s)


def qr_retract(x, step, tol=1e-10):
    """QR retraction: orthonormalize the rows of ``x + step``.

    Computes the thin QR of ``(x + step)^H`` and returns the adjoint of ``Q``.
    """
    x = _matrix(x)
    if x.shape != step.shape:
        raise ShapeError(f"point has shape {x.shape} but step has shape {step.shape}")
    q, _ = householder_qr(adjoint(x + step))
    return StiefelPoint.certify(np.ascontiguousarray(adjoint(q)), tol=tol)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_stiefel(p, n, field=REAL, seed=None):
    """Haar-distributed ``p x n`` matrix with orthonormal rows.

    Sign-corrected QR of a standard (complex) Gaussian ``n x p`` matrix.
    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if p > n:
        raise ShapeError(f"need p <= n, got p={p}, n={n}")
    rng = _rng(seed)
    dtype = dtype_for(field)
    z = rng.standard_normal((n, p))
    if dtype is np.complex128:
        z = (z + 1j * rng.standard_normal((n, p))) / np.sqrt(2.0)
    q, _ = householder_qr(z)
    return StiefelPoint.certify(np.ascontiguousarray(adjoint(q)), tol=1e-10)
