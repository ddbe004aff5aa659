"""Dense matrix kernels over float64 / complex128.

Matrices are plain 2-D numpy arrays. Every matrix product in the package goes
through :func:`matmul`, so the number of products an optimizer step performs
can be measured with :func:`gemm_counter`.
"""
import contextlib
import contextvars
import math

import numpy as np

from .exceptions import DegeneracyError, NumericalError, ProjectionError, ShapeError

REAL = "real"
COMPLEX = "complex"

_DTYPES = {REAL: np.float64, COMPLEX: np.complex128}

_gemm_tally = contextvars.ContextVar("gemm_tally", default=None)


class GemmTally:
    """Mutable counter handed out by :func:`gemm_counter`."""

    def __init__(self):
        self.count = 0

    def __repr__(self):
        return f"GemmTally(count={self.count})"


@contextlib.contextmanager
def gemm_counter():
    """Count :func:`matmul` calls made inside the ``with`` block.

    >>> with gemm_counter() as tally:
    ...     _ = matmul(np.eye(2), np.eye(2))
    >>> tally.count
    1
    """
    tally = GemmTally()
    token = _gemm_tally.set(tally)
    try:
        yield tally
    finally:
        _gemm_tally.reset(token)


def field_of(a):
    return COMPLEX if np.iscomplexobj(a) else REAL


def dtype_for(field):
    try:
        return _DTYPES[field]
    except KeyError:
        raise ValueError(f"unknown field {field!r}; expected 'real' or 'complex'") from None


def as_matrix(a, name="matrix"):
    """Validate ``a`` as a finite 2-D float64 or complex128 array."""
    arr = np.asarray(a)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    arr = arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} has non-finite entries")
    return arr


def matmul(a, b):
    """Matrix product ``a @ b`` with a shape check naming both operands."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")
    tally = _gemm_tally.get()
    if tally is not None:
        tally.count += 1
    return a @ b


def adjoint(a):
    """Conjugate transpose (plain transpose for real input)."""
    return a.conj().T if np.iscomplexobj(a) else a.T


def frobenius_inner(a, b):
    """Real Frobenius inner product ``Re tr(b^H a)``."""
    if a.shape != b.shape:
        raise ShapeError(f"inner product needs equal shapes, got {a.shape} and {b.shape}")
    return float(np.real(np.vdot(b, a)))


def frobenius_norm(a):
    return float(np.linalg.norm(a))


def _require_square(a, op):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{op} needs a square matrix, got shape {a.shape}")


def skew_part(a):
    """``(A - A^H) / 2``."""
    _require_square(a, "skew_part")
    return 0.5 * (a - adjoint(a))


def sym_part(a):
    """``(A + A^H) / 2``."""
    _require_square(a, "sym_part")
    return 0.5 * (a + adjoint(a))


def _panel_factor(panel, threshold, offset):
    """Unblocked Householder on a narrow panel; returns unit reflectors as columns."""
    m, b = panel.shape
    vs = np.zeros((m, b), dtype=panel.dtype)
    for j in range(b):
        x = panel[j:, j]
        alpha = math.sqrt(np.vdot(x, x).real)
        if alpha <= threshold:
            raise DegeneracyError(f"column {offset + j} is numerically dependent (pivot {alpha:.3e})")
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= math.sqrt(np.vdot(v, v).real)
        block = panel[j:, j:]
        block -= 2.0 * v[:, None] * (v.conj() @ block)[None, :]
        vs[j:, j] = v
    return vs


def _wy_factor(vs):
    """Upper-triangular ``T`` with ``H_1 ... H_b = I - V T V^H`` for ``H_j = I - 2 v_j v_j^H``."""
    b = vs.shape[1]
    t = np.zeros((b, b), dtype=vs.dtype)
    gram = vs.conj().T @ vs
    for j in range(b):
        t[j, j] = 2.0
        if j:
            t[:j, j] = -2.0 * (t[:j, :j] @ gram[:j, j])
    return t


def householder_qr(a, rtol=None, block=16):
    """Thin QR factorization by blocked Householder reflections.

    Returns ``(q, r)`` with ``q`` of shape ``(m, k)`` having orthonormal
    columns and ``r`` upper triangular ``(k, k)`` with a strictly positive real
    diagonal, which makes the factorization unique.

    Reflectors are generated a panel of ``block`` columns at a time and applied
    to the trailing columns in compact WY form, so the bulk of the work is
    matrix products.

    Raises :class:`DegeneracyError` when a pivot vanishes (rank deficiency).
    ``rtol`` scales the pivot threshold relative to ``||a||_F``.
    """
    a = as_matrix(a, "qr input")
    m, k = a.shape
    if m < k:
        raise ShapeError(f"householder_qr needs rows >= cols, got shape {a.shape}")
    if rtol is None:
        rtol = max(m, k) * np.finfo(np.float64).eps
    r = a.copy()
    threshold = rtol * np.linalg.norm(a)
    panels = []
    for j0 in range(0, k, block):
        j1 = min(j0 + block, k)
        vs = _panel_factor(r[j0:, j0:j1], threshold, j0)
        t = _wy_factor(vs)
        if j1 < k:
            trailing = r[j0:, j1:]
            trailing -= vs @ (t.conj().T @ (vs.conj().T @ trailing))
        panels.append((j0, vs, t))

    q = np.zeros((m, k), dtype=r.dtype)
    q[np.arange(k), np.arange(k)] = 1.0
    for j0, vs, t in reversed(panels):
        sub = q[j0:, j0:]
        sub -= vs @ (t @ (vs.conj().T @ sub))

    r = np.triu(r[:k, :])
    diag = np.diagonal(r).copy()
    signs = diag / np.abs(diag)
    q = q * signs
    r = signs.conj()[:, None] * r
    # the diagonal is real positive up to roundoff in the phase
    r[np.arange(k), np.arange(k)] = np.abs(diag)
    return q, r


def polar_project(a, tol=1e-12, max_iters=100, return_residuals=False):
    """Nearest matrix with orthonormal rows (or columns, if tall).

    Newton-Schulz iteration ``X <- (3/2 I - 1/2 X X^H) X`` started from
    ``a / ||a||_F``; the Frobenius scaling places every singular value in
    ``(0, 1]``, inside the basin of convergence. The limit is ``U V^H`` from
    the SVD of ``a``.

    Raises :class:`ProjectionError` if the residual ``||X X^H - I||`` has not
    reached ``tol`` after ``max_iters`` iterations (e.g. rank-deficient input).
    """
    a = as_matrix(a, "polar input")
    tall = a.shape[0] > a.shape[1]
    x = adjoint(a) if tall else a
    p = x.shape[0]
    eye = np.eye(p)
    x = x / np.linalg.norm(x)
    residuals = []
    for _ in range(max_iters + 1):
        gram = matmul(x, adjoint(x))
        res = np.linalg.norm(gram - eye)
        residuals.append(res)
        if res <= tol:
            break
        if not np.isfinite(res):
            raise ProjectionError("Newton-Schulz iteration diverged", res)
        x = 1.5 * x - 0.5 * matmul(gram, x)
    else:
        raise ProjectionError(
            f"no convergence in {max_iters} iterations (residual {residuals[-1]:.3e})", residuals[-1]
        )
    out = adjoint(x) if tall else x
    if return_residuals:
        return out, residuals
    return out
