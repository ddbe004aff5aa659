"""Unconstrained gradient transforms that orthoptimizers wrap.

A base optimizer maps the Euclidean gradient to the direction ``G`` that the
constrained update consumes. The learning rate lives in the orthoptimizer, so
every transform here has unit scale.

Kinds:

* ``identity``: ``G = grad``.
* ``sgd``: heavy-ball momentum, ``buf <- beta * buf + grad``; ``G = buf``.
* ``vadam``: Adam with one second moment per *row* (the EMA of squared row
  norms), so the normalization is a left-diagonal scaling of the first moment.
* ``adam``: standard elementwise Adam, kept as the unconstrained reference.
"""
import copy
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalError, ShapeError

KINDS = ("identity", "sgd", "vadam", "adam")


@dataclass
class BaseOptimizer:
    kind: str = "identity"
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    shape: tuple = None
    momentum_buffer: np.ndarray = field(default=None, repr=False)
    first_moment: np.ndarray = field(default=None, repr=False)
    second_moment: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown base optimizer {self.kind!r}; expected one of {KINDS}")

    def copy(self):
        return copy.deepcopy(self)

    def reset(self):
        self.step_count = 0
        self.shape = None
        self.momentum_buffer = self.first_moment = self.second_moment = None

    def transform(self, grad, name="parameter"):
        """Return the search direction for ``grad`` and advance the state."""
        if not np.all(np.isfinite(grad)):
            raise NumericalError(f"non-finite gradient entries for {name}")
        if self.shape is None:
            self.shape = grad.shape
        elif grad.shape != self.shape:
            raise ShapeError(f"{name}: gradient shape {grad.shape} != registered shape {self.shape}")
        self.step_count += 1

        if self.kind == "identity":
            return grad
        if self.kind == "sgd":
            if self.momentum_buffer is None:
                self.momentum_buffer = grad.copy()
            else:
                self.momentum_buffer = self.momentum * self.momentum_buffer + grad
            return self.momentum_buffer.copy()

        t = self.step_count
        if self.first_moment is None:
            self.first_moment = np.zeros_like(grad)
        self.first_moment = self.beta1 * self.first_moment + (1 - self.beta1) * grad
        m_hat = self.first_moment / (1 - self.beta1**t)
        if self.kind == "vadam":
            sq = np.sum(np.abs(grad) ** 2, axis=1)
            if self.second_moment is None:
                self.second_moment = np.zeros(grad.shape[0])
            self.second_moment = self.beta2 * self.second_moment + (1 - self.beta2) * sq
            v_hat = self.second_moment / (1 - self.beta2**t)
            return m_hat / (np.sqrt(v_hat)[:, None] + self.eps)
        # adam
        if self.second_moment is None:
            self.second_moment = np.zeros(grad.shape)
        self.second_moment = self.beta2 * self.second_moment + (1 - self.beta2) * np.abs(grad) ** 2
        v_hat = self.second_moment / (1 - self.beta2**t)
        return m_hat / (np.sqrt(v_hat) + self.eps)


def make_base(kind="identity", **hyperparams):
    """Fresh base optimizer; ``kind='none'`` is an alias for ``identity``."""
    if kind in (None, "none"):
        kind = "identity"
    return BaseOptimizer(kind=kind, **hyperparams)


def transform(state, grad, name="parameter"):
    return state.transform(grad, name=name)


def _row_cosines(a, b):
    num = np.real(np.sum(a.conj() * b, axis=1))
    den = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    return num / den


@dataclass(frozen=True)
class LinearityReport:
    kind: str
    min_cosine: float
    scale_cosine: float
    alignment_cosine: float
    passed: bool


def check_linearity(kind, trials=10, seed=0, shape=(6, 9), scales=(0.1, 10.0), tol=1e-6, **hyperparams):
    """Empirically test the "output proportional to A grad" property.

    Two per-row cosine checks on the first step from a fresh state:

    * scale equivariance, ``T(c G)`` vs ``T(G)`` for each ``c`` in ``scales``;
    * left-linear alignment, ``T(G)`` vs ``G`` (a left-diagonal ``A`` keeps
      every row parallel to the corresponding gradient row).

    Adam passes the first check (it is scale invariant) but fails the second.
    """
    rng = np.random.default_rng(seed)
    scale_min = align_min = 1.0
    for _ in range(trials):
        g = rng.standard_normal(shape)
        ref = make_base(kind, **hyperparams).transform(g)
        align_min = min(align_min, float(_row_cosines(ref, g).min()))
        for c in scales:
            out = make_base(kind, **hyperparams).transform(c * g)
            scale_min = min(scale_min, float(_row_cosines(out, ref).min()))
    worst = min(scale_min, align_min)
    return LinearityReport(kind, worst, scale_min, align_min, worst >= 1 - tol)
