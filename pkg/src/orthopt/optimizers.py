"""Constrained update rules over lists of row-orthogonal matrices.

``pogo``
    Tangent step ``M = X - eta X Skew(X^H G)`` followed by a normal step
    ``M + lam (I - M M^H) M``. ``lam`` is either 1/2 or the real number closest
    to a root of the landing polynomial of ``M``.
``landing``
    ``X - eta (X S + lam (X X^H - I) X)`` with fixed ``eta`` and ``lam``; may
    leave the manifold.
``slpg``
    Smooth sequential linearized proximal gradient: Euclidean-metric
    Riemannian gradient step, then the ``(3/2 I - 1/2 Y Y^H) Y`` normal step.
``rgd``
    Riemannian gradient descent with the QR retraction.
``unconstrained``
    ``X - eta G`` with no manifold machinery (reference baseline).
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .base import make_base
from .exceptions import DegeneratePolynomialError, NumericalError, ShapeError
from .linalg import adjoint, matmul, skew_part, sym_part
from .quartic import poly_from_terms, select_landing_step
from .stiefel import manifold_distance, qr_retract, relative_gradient

METHODS = ("pogo", "landing", "slpg", "rgd", "unconstrained")
LAMBDA_POLICIES = ("fixed_half", "find_root")
# below this distance the landing polynomial carries no usable information
ROUNDOFF_DISTANCE = 1e-13


@dataclass(frozen=True)
class OrthoStepConfig:
    method: str = "pogo"
    eta: float = 0.1
    lambda_policy: str = "fixed_half"
    landing_lambda: float = 1.0
    base: str = "identity"
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.lambda_policy not in LAMBDA_POLICIES:
            raise ValueError(f"unknown lambda policy {self.lambda_policy!r}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not self.landing_lambda > 0:
            raise ValueError(f"landing_lambda must be positive, got {self.landing_lambda}")

    def make_state(self):
        return make_base(
            self.base, momentum=self.momentum, beta1=self.beta1, beta2=self.beta2, eps=self.eps
        )

    def with_eta(self, eta):
        return replace(self, eta=eta)


@dataclass(frozen=True)
class StepInfo:
    """Per-matrix diagnostics of one update."""

    lambda_used: float = float("nan")
    xi: float = float("nan")
    skew_norm: float = float("nan")
    normal_norm: float = float("nan")
    residual: float = float("nan")


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"non-finite values in {what}")
    return a


def _check_shapes(x, grad):
    if x.shape != grad.shape:
        raise ShapeError(f"iterate has shape {x.shape} but gradient has shape {grad.shape}")


def pogo_step(x, grad, cfg, state):
    """One POGO update. Returns ``(new_x, StepInfo)``.

    The ``fixed_half`` path performs four matrix products: ``X^H G``, ``X S``,
    ``M M^H`` and ``(M M^H) M``.
    """
    _check_shapes(x, grad)
    g = state.transform(grad)
    xi = cfg.eta * float(np.linalg.norm(g))
    s = skew_part(matmul(adjoint(x), g))
    m = _check_finite(x - cfg.eta * matmul(x, s), "intermediate step")
    gram = matmul(m, adjoint(m))

    if cfg.lambda_policy == "fixed_half":
        gm = matmul(gram, m)
        normal = gm - m
        out = 1.5 * m - 0.5 * gm
        info = StepInfo(0.5, xi, float(np.linalg.norm(s)), float(np.linalg.norm(normal)))
        return _check_finite(out, "POGO update"), info

    c = gram
    c[np.diag_indices_from(c)] -= 1.0
    b = -matmul(c, m)
    mb = matmul(m, adjoint(b))
    poly = poly_from_terms(c, mb + adjoint(mb), matmul(b, adjoint(b)))
    try:
        if poly.coeffs[4] <= ROUNDOFF_DISTANCE**2:
            # M on the manifold up to roundoff: the polynomial is pure noise
            raise DegeneratePolynomialError("iterate already on the manifold")
        sel = select_landing_step(poly)
        lam, residual = sel.selected_lambda, sel.residual
    except DegeneratePolynomialError:
        lam, residual = 0.0, 0.0
    out = m + lam * b
    info = StepInfo(lam, xi, float(np.linalg.norm(s)), float(np.linalg.norm(b)), residual)
    return _check_finite(out, "POGO update"), info


def landing_step(x, grad, cfg, state):
    """One Landing update with fixed step size and attraction strength."""
    _check_shapes(x, grad)
    g = state.transform(grad)
    s = skew_part(matmul(adjoint(x), g))
    gram = matmul(x, adjoint(x))
    gram[np.diag_indices_from(gram)] -= 1.0
    field = matmul(x, s) + cfg.landing_lambda * matmul(gram, x)
    out = x - cfg.eta * field
    info = StepInfo(cfg.landing_lambda, cfg.eta * float(np.linalg.norm(g)), float(np.linalg.norm(s)))
    return _check_finite(out, "Landing update"), info


def slpg_step(x, grad, cfg, state=None):
    """Smooth SLPG update, transposed to the row-orthogonal convention.

    ``Y = X - eta (G - Sym(G X^H) X)`` then ``(3/2 I - 1/2 Y Y^H) Y``. The
    raw Euclidean gradient is used; divergence surfaces as
    :class:`NumericalError`.
    """
    _check_shapes(x, grad)
    direction = grad - matmul(sym_part(matmul(grad, adjoint(x))), x)
    y = _check_finite(x - cfg.eta * direction, "SLPG intermediate step")
    gy = matmul(matmul(y, adjoint(y)), y)
    out = 1.5 * y - 0.5 * gy
    info = StepInfo(0.5, cfg.eta * float(np.linalg.norm(grad)))
    return _check_finite(out, "SLPG update"), info


def rgd_step(x, grad, cfg, state=None):
    """Riemannian gradient step retracted by QR. Returns a ``StiefelPoint``."""
    mat = getattr(x, "matrix", x)
    _check_shapes(mat, grad)
    tangent = relative_gradient(mat, grad)
    step = -cfg.eta * tangent.ambient
    _check_finite(step, "RGD step")
    point = qr_retract(mat, step)
    info = StepInfo(float("nan"), cfg.eta * float(np.linalg.norm(grad)), float(np.linalg.norm(tangent.skew_factor)))
    return point, info


def unconstrained_step(x, grad, cfg, state):
    _check_shapes(x, grad)
    g = state.transform(grad)
    out = x - cfg.eta * g
    return _check_finite(out, "unconstrained update"), StepInfo(xi=cfg.eta * float(np.linalg.norm(g)))


_RULES = {
    "pogo": pogo_step,
    "landing": landing_step,
    "slpg": slpg_step,
    "rgd": rgd_step,
    "unconstrained": unconstrained_step,
}


def single_step(x, grad, cfg, state):
    """Dispatch to the configured rule; always returns ``(ndarray, StepInfo)``."""
    # overflow is detected by the explicit finiteness checks, not warnings
    with np.errstate(over="ignore", invalid="ignore"):
        new_x, info = _RULES[cfg.method](x, grad, cfg, state)
    return getattr(new_x, "matrix", new_x), info


@dataclass
class IterateSet:
    """The matrices ``X_1..X_L`` with their base-optimizer states and diagnostics."""

    matrices: list
    states: list
    infos: list = field(default_factory=list)
    distances: list = field(default_factory=list)

    def __post_init__(self):
        if not self.matrices:
            raise ValueError("an IterateSet needs at least one matrix")
        if len(self.states) != len(self.matrices):
            raise ValueError("one base-optimizer state per matrix is required")
        for x in self.matrices:
            if x.shape[0] > x.shape[1]:
                raise ShapeError(f"row-orthogonal convention needs p <= n, got shape {x.shape}")

    @classmethod
    def create(cls, matrices, cfg):
        matrices = [getattr(x, "matrix", x) for x in matrices]
        return cls(matrices, [cfg.make_state() for _ in matrices])

    def __len__(self):
        return len(self.matrices)

    def max_distance(self):
        if self.distances:
            return max(self.distances)
        return max(manifold_distance(x) for x in self.matrices)


def multi_step(its, grads, cfg):
    """Apply the configured rule to every matrix independently.

    Returns a new :class:`IterateSet`; ``its`` is never modified, so an error
    in any matrix leaves the caller with the complete pre-step state.
    """
    if len(grads) != len(its.matrices):
        raise ShapeError(f"{len(its.matrices)} matrices but {len(grads)} gradients")
    new_x, new_states, infos, dists = [], [], [], []
    for k, (x, g, st) in enumerate(zip(its.matrices, grads, its.states)):
        st = st.copy()
        try:
            out, info = single_step(x, g, cfg, st)
        except NumericalError as exc:
            raise NumericalError(f"matrix {k}: {exc}") from exc
        new_x.append(out)
        new_states.append(st)
        infos.append(info)
        with np.errstate(over="ignore", invalid="ignore"):
            dists.append(manifold_distance(out))
    return IterateSet(new_x, new_states, infos, dists)
