"""Closed-form roots of real polynomials of degree <= 4, and the landing polynomial.

The landing polynomial of an intermediate iterate ``M`` is the squared
manifold distance ``||Y Y^H - I||^2`` of ``Y = M + lam (I - M M^H) M`` as a
function of the normal step size ``lam``.
"""
import cmath
from dataclasses import dataclass

import numpy as np

from .exceptions import DegeneratePolynomialError, ShapeError
from .linalg import adjoint, frobenius_inner, matmul

DEFAULT_DEGENERACY_TOL = 1e-12
_POLISH_STEPS = 3


@dataclass(frozen=True)
class QuarticPoly:
    """``c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0`` stored highest degree first."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) != 5:
            raise ShapeError(f"a quartic needs 5 coefficients, got {len(coeffs)}")
        if not all(np.isfinite(coeffs)):
            raise ValueError(f"coefficients must be finite, got {coeffs}")
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, x):
        return _horner(self.coeffs, x)

    def scaled(self, c):
        return QuarticPoly(tuple(c * k for k in self.coeffs))


@dataclass(frozen=True)
class RootSelection:
    roots: tuple
    selected_lambda: float
    residual: float


def _horner(coeffs, x):
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _horner_with_derivative(coeffs, x):
    val, der = 0.0, 0.0
    for c in coeffs:
        der = der * x + val
        val = val * x + c
    return val, der


def _quadratic(a, b, c):
    disc = cmath.sqrt(b * b - 4 * a * c)
    # pick the sign that avoids cancellation, then use Vieta for the other root
    q = -0.5 * (b + disc) if abs(b + disc) >= abs(b - disc) else -0.5 * (b - disc)
    if q == 0:
        return [0j, 0j]
    return [q / a, c / q]


def _cube_root(z):
    if z == 0:
        return 0j
    return cmath.exp(cmath.log(z) / 3)


def _cubic(a, b, c, d):
    # Cardano in complex arithmetic, branch chosen to maximize |C|
    d0 = b * b - 3 * a * c
    d1 = 2 * b**3 - 9 * a * b * c + 27 * a * a * d
    root = cmath.sqrt(d1 * d1 - 4 * d0**3)
    big = d1 + root if abs(d1 + root) >= abs(d1 - root) else d1 - root
    cc = _cube_root(big / 2)
    if cc == 0:
        return [-b / (3 * a)] * 3
    omega = complex(-0.5, np.sqrt(3) / 2)
    roots = []
    for k in range(3):
        ck = cc * omega**k
        roots.append(-(b + ck + d0 / ck) / (3 * a))
    return roots


def _quartic(a, b, c, d, e):
    # Ferrari: depress, solve the resolvent cubic, split into two quadratics
    b, c, d, e = b / a, c / a, d / a, e / a
    shift = b / 4
    p = c - 3 * b * b / 8
    q = d - b * c / 2 + b**3 / 8
    r = e - b * d / 4 + b * b * c / 16 - 3 * b**4 / 256
    scale = max(abs(p), abs(q), abs(r), 1e-300)
    if abs(q) <= 1e-14 * scale:
        ys = []
        for z in _quadratic(1.0, p, r):
            s = cmath.sqrt(z)
            ys.extend([s, -s])
    else:
        ms = _cubic(8.0, 8.0 * p, 2.0 * p * p - 8.0 * r, -q * q)
        m = max(ms, key=abs)
        s = cmath.sqrt(2 * m)
        ys = _quadratic(1.0, s, p / 2 + m - q / (2 * s)) + _quadratic(1.0, -s, p / 2 + m + q / (2 * s))
    return [y - shift for y in ys]


def _polish(coeffs, root):
    val, der = _horner_with_derivative(coeffs, root)
    best, best_val = root, abs(val)
    for _ in range(_POLISH_STEPS):
        if der == 0 or best_val == 0:
            break
        cand = best - val / der
        val, der = _horner_with_derivative(coeffs, cand)
        if abs(val) >= best_val:
            break
        best, best_val = cand, abs(val)
    return best


def effective_coeffs(poly, degeneracy_tol=DEFAULT_DEGENERACY_TOL):
    """Drop leading coefficients below ``degeneracy_tol * max|c|``."""
    coeffs = poly.coeffs if isinstance(poly, QuarticPoly) else tuple(map(float, poly))
    top = max(abs(c) for c in coeffs)
    if top == 0:
        raise DegeneratePolynomialError("zero polynomial has no well-defined roots")
    k = 0
    while abs(coeffs[k]) <= degeneracy_tol * top:
        k += 1
    return coeffs[k:]


def solve_quartic(poly, degeneracy_tol=DEFAULT_DEGENERACY_TOL):
    """All complex roots of a real polynomial of degree <= 4.

    Leading coefficients negligible relative to the largest one are dropped, so
    the number of roots equals the effective degree. Each radical root is
    refined by complex Newton steps on the original coefficients.
    """
    coeffs = effective_coeffs(poly, degeneracy_tol)
    degree = len(coeffs) - 1
    if degree == 0:
        return np.array([], dtype=np.complex128)
    if degree == 1:
        raw = [complex(-coeffs[1] / coeffs[0])]
    elif degree == 2:
        raw = _quadratic(*coeffs)
    elif degree == 3:
        raw = _cubic(*coeffs)
    else:
        raw = _quartic(*coeffs)
    return np.array([_polish(coeffs, complex(z)) for z in raw], dtype=np.complex128)


def select_landing_step(poly, degeneracy_tol=DEFAULT_DEGENERACY_TOL, tie_rtol=1e-9):
    """Pick a real step size from the roots of ``poly``.

    The real part of the root with the smallest imaginary part, i.e. the real
    number closest to some root. Near-ties (within ``tie_rtol`` relative) are
    broken by smaller ``|Re|``, then by preferring a nonnegative real part.
    """
    roots = solve_quartic(poly, degeneracy_tol)
    if roots.size == 0:
        raise DegeneratePolynomialError("constant polynomial has no roots to select from")
    tol = tie_rtol * max(1.0, float(np.max(np.abs(roots))))
    imag = np.abs(roots.imag)
    candidates = roots[imag <= imag.min() + tol]
    re = np.abs(candidates.real)
    candidates = candidates[re <= re.min() + tol]
    nonneg = candidates[candidates.real >= -tol]
    chosen = (nonneg if nonneg.size else candidates)[0]
    lam = float(chosen.real)
    if abs(lam) <= tol and chosen.real < 0:
        lam = 0.0
    coeffs = poly.coeffs if isinstance(poly, QuarticPoly) else tuple(poly)
    return RootSelection(tuple(complex(z) for z in roots), lam, abs(_horner(coeffs, lam)))


def landing_terms(m):
    """``C = M M^H - I``, ``B = (I - M M^H) M``, ``D = M B^H + B M^H``, ``E = B B^H``."""
    gram = matmul(m, adjoint(m))
    gram[np.diag_indices_from(gram)] -= 1.0
    c = gram
    b = -matmul(c, m)
    mb = matmul(m, adjoint(b))
    d = mb + adjoint(mb)
    e = matmul(b, adjoint(b))
    return c, b, d, e


def poly_from_terms(c, d, e):
    ip = frobenius_inner
    return QuarticPoly(
        (
            ip(e, e),
            2 * ip(d, e),
            ip(d, d) + 2 * ip(c, e),
            2 * ip(c, d),
            ip(c, c),
        )
    )


def landing_poly_from(m):
    """Coefficients of ``P(lam) = ||C + D lam + E lam^2||^2`` for iterate ``m``."""
    c, _, d, e = landing_terms(m)
    return poly_from_terms(c, d, e)
