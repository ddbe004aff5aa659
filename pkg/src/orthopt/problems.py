"""Benchmark objectives with closed-form gradients and known optima.

Each problem exposes ``loss`` (the reported objective), ``euclid_grads`` (its
gradient) and ``descent_grads`` (the gradient of the quantity optimizers
minimize, i.e. the negated gradient for maximization problems).
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ShapeError, UnsupportedMetricError
from .linalg import COMPLEX, REAL, adjoint, as_matrix, dtype_for, matmul, polar_project
from .stiefel import _rng, random_stiefel

PCA_CONDITION = 1000.0


class Problem:
    """Common interface; subclasses fill in ``loss`` and ``euclid_grads``."""

    name = "problem"
    maximize = False
    optimal_value = None
    field = REAL

    @property
    def shapes(self):
        raise NotImplementedError

    @property
    def L(self):
        return len(self.shapes)

    def loss(self, params):
        raise NotImplementedError

    def euclid_grads(self, params):
        raise NotImplementedError

    def descent_grads(self, params):
        grads = self.euclid_grads(params)
        return [-g for g in grads] if self.maximize else grads

    def random_feasible(self, seed=None):
        rng = _rng(seed)
        return [random_stiefel(p, n, self.field, rng).matrix for p, n in self.shapes]

    def init_params(self, seed=None):
        """Random feasible start; see :func:`match_component` for square real factors."""
        return self.random_feasible(seed)

    def _check(self, params):
        if len(params) != self.L:
            raise ShapeError(f"{self.name} expects {self.L} matrices, got {len(params)}")
        for x, shape in zip(params, self.shapes):
            if x.shape != tuple(shape):
                raise ShapeError(f"{self.name}: expected shape {shape}, got {x.shape}")


@dataclass(frozen=True, eq=False)
class PCAProblem(Problem):
    """Maximize ``tr(X gram X^H)`` over ``p x n`` row-orthogonal ``X``."""

    gram: np.ndarray
    p: int
    spectrum: np.ndarray = None
    eigvecs: np.ndarray = field(default=None, repr=False)
    name = "pca"
    maximize = True

    def __post_init__(self):
        n = self.gram.shape[0]
        if self.gram.shape != (n, n):
            raise ShapeError(f"gram must be square, got {self.gram.shape}")
        if not 1 <= self.p <= n:
            raise ShapeError(f"need 1 <= p <= n, got p={self.p}, n={n}")

    @property
    def n(self):
        return self.gram.shape[0]

    @property
    def field(self):
        return COMPLEX if np.iscomplexobj(self.gram) else REAL

    @property
    def shapes(self):
        return [(self.p, self.n)]

    @property
    def optimal_value(self):
        if self.spectrum is None:
            return None
        return float(np.sum(np.sort(self.spectrum)[::-1][: self.p]))

    def optimal_params(self):
        order = np.argsort(self.spectrum)[::-1][: self.p]
        return [np.ascontiguousarray(adjoint(self.eigvecs[:, order]))]

    def loss(self, params):
        self._check(params)
        x = params[0]
        return float(np.real(np.vdot(x, matmul(x, self.gram))))

    def euclid_grads(self, params):
        self._check(params)
        return [2.0 * matmul(params[0], self.gram)]


def det_sign(a):
    """Sign of the determinant of a real square matrix."""
    sign, _ = np.linalg.slogdet(a)
    return float(sign)


def match_component(params, sign):
    """Reflect the first row of ``params[0]`` so that ``prod det(X_k)`` has ``sign``.

    Square real orthogonal matrices form two disconnected components; methods
    that stay on the manifold cannot cross between them, so a start in the
    wrong component can never reach a minimizer of ``||A X - B||`` whose
    determinant sign is that of ``A^T B``.
    """
    current = np.prod([det_sign(x) for x in params])
    if sign != 0 and current != sign:
        params = [x.copy() for x in params]
        params[0][0] *= -1.0
    return params


def pca_spectrum(n, condition=PCA_CONDITION):
    """Exponentially decaying ``mu_i = condition^(-(i-1)/(n-1))`` with ``mu_1 = 1``."""
    if n == 1:
        return np.ones(1)
    return condition ** (-np.arange(n) / (n - 1))


def make_pca(n, p, seed=None, condition=PCA_CONDITION):
    """PCA instance with a planted spectrum rotated by a Haar orthogonal matrix."""
    if p > n:
        raise ShapeError(f"need p <= n, got p={p}, n={n}")
    rng = _rng(seed)
    mu = pca_spectrum(n, condition)
    q = adjoint(random_stiefel(n, n, REAL, rng).matrix)
    gram = matmul(q * mu, adjoint(q))
    gram = 0.5 * (gram + gram.T)
    return PCAProblem(gram, p, mu, q)


@dataclass(frozen=True, eq=False)
class ProcrustesProblem(Problem):
    """Minimize ``||A X - B||^2`` with ``A`` of shape ``p x p`` and ``B`` of shape ``p x n``."""

    A: np.ndarray
    B: np.ndarray
    name = "procrustes"

    def __post_init__(self):
        a = as_matrix(self.A, "A")
        b = as_matrix(self.B, "B")
        p, n = b.shape
        if a.shape != (p, p):
            raise ShapeError(f"A must be {p}x{p} to match B of shape {b.shape}, got {a.shape}")
        if p > n:
            raise ShapeError(f"need p <= n, got B of shape {b.shape}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        x_star = polar_project(matmul(adjoint(a), b))
        object.__setattr__(self, "_x_star", x_star)
        object.__setattr__(self, "_opt", self._loss(x_star))

    @property
    def field(self):
        return COMPLEX if np.iscomplexobj(self.A) or np.iscomplexobj(self.B) else REAL

    @property
    def shapes(self):
        return [self.B.shape]

    @property
    def optimal_value(self):
        return self._opt

    def optimal_params(self):
        return [self._x_star.copy()]

    def init_params(self, seed=None):
        params = self.random_feasible(seed)
        if self.field == REAL and self.B.shape[0] == self.B.shape[1]:
            params = match_component(params, det_sign(matmul(self.A.T, self.B)))
        return params

    def _loss(self, x):
        r = matmul(self.A, x) - self.B
        return float(np.real(np.vdot(r, r)))

    def loss(self, params):
        self._check(params)
        return self._loss(params[0])

    def euclid_grads(self, params):
        self._check(params)
        r = matmul(self.A, params[0]) - self.B
        return [2.0 * matmul(adjoint(self.A), r)]


def _gaussian(rng, shape, field):
    z = rng.standard_normal(shape)
    if dtype_for(field) is np.complex128:
        z = (z + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return z


def make_procrustes(p, n, seed=None, field=REAL):
    """Gaussian ``A`` and ``B``; the complex field gives unitary Procrustes."""
    if p > n:
        raise ShapeError(f"need p <= n, got p={p}, n={n}")
    rng = _rng(seed)
    a = _gaussian(rng, (p, p), field)
    b = _gaussian(rng, (p, n), field)
    prob = ProcrustesProblem(a, b)
    if field == COMPLEX:
        object.__setattr__(prob, "name", "unitary-procrustes")
    return prob


@dataclass(frozen=True, eq=False)
class ChainProblem(Problem):
    """Minimize ``||A X_1 X_2 ... X_L - B||^2`` over square orthogonal factors."""

    A: np.ndarray
    B: np.ndarray
    length: int
    planted: tuple = field(default=None, repr=False)
    name = "chain"

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"chain length must be >= 1, got {self.length}")
        p = self.A.shape[0]
        if self.A.shape != (p, p) or self.B.shape != (p, p):
            raise ShapeError(f"A and B must be square of equal size, got {self.A.shape}, {self.B.shape}")

    @property
    def p(self):
        return self.A.shape[0]

    @property
    def field(self):
        return COMPLEX if np.iscomplexobj(self.A) or np.iscomplexobj(self.B) else REAL

    @property
    def shapes(self):
        return [(self.p, self.p)] * self.length

    @property
    def optimal_value(self):
        return 0.0 if self.planted is not None else None

    def optimal_params(self):
        if self.planted is None:
            raise UnsupportedMetricError("chain instance has no planted optimum")
        return [q.copy() for q in self.planted]

    def init_params(self, seed=None):
        params = self.random_feasible(seed)
        if self.field == REAL:
            params = match_component(params, det_sign(matmul(self.A.T, self.B)))
        return params

    def _prefixes(self, params):
        pre = [self.A]
        for x in params[:-1]:
            pre.append(matmul(pre[-1], x))
        return pre

    def _suffixes(self, params):
        suf = [np.eye(self.p, dtype=params[-1].dtype)]
        for x in reversed(params[1:]):
            suf.append(matmul(x, suf[-1]))
        return suf[::-1]

    def residual(self, params):
        self._check(params)
        return matmul(self._prefixes(params)[-1], params[-1]) - self.B

    def loss(self, params):
        r = self.residual(params)
        return float(np.real(np.vdot(r, r)))

    def euclid_grads(self, params):
        self._check(params)
        pre = self._prefixes(params)
        suf = self._suffixes(params)
        r = matmul(pre[-1], params[-1]) - self.B
        return [2.0 * matmul(matmul(adjoint(pre[k]), r), adjoint(suf[k])) for k in range(self.length)]


def make_chain(p, L, seed=None, attainable=True, field=REAL):
    """Chain instance with ``A`` Gaussian scaled by ``1/sqrt(p)``.

    When ``attainable``, ``B = A Q_1 ... Q_L`` for Haar ``Q_i`` so the optimum is
    0; otherwise ``B`` is an independent Gaussian and no optimum is known.
    """
    if L < 1:
        raise ValueError(f"chain length must be >= 1, got {L}")
    rng = _rng(seed)
    a = _gaussian(rng, (p, p), field) / np.sqrt(p)
    if attainable:
        qs = tuple(random_stiefel(p, p, field, rng).matrix for _ in range(L))
        prod = a
        for q in qs:
            prod = matmul(prod, q)
        return ChainProblem(a, prod, L, qs)
    b = _gaussian(rng, (p, p), field) / np.sqrt(p)
    return ChainProblem(a, b, L)


def optimality_gap(problem, params):
    """``|loss - optimum| / max(|optimum|, 1)``."""
    opt = problem.optimal_value
    if opt is None:
        raise UnsupportedMetricError(f"{problem.name} has no known optimal value")
    return abs(problem.loss(params) - opt) / max(abs(opt), 1.0)


def make_problem(name, p=None, n=None, chain_len=8, seed=0, field=REAL):
    """Build a problem by its CLI name with the desk-scale defaults."""
    if name == "pca":
        return make_pca(n or 200, p or 150, seed)
    if name == "procrustes":
        return make_procrustes(p or 200, n or p or 200, seed, field)
    if name == "unitary-procrustes":
        return make_procrustes(p or 64, n or p or 64, seed, COMPLEX)
    if name == "chain":
        return make_chain(p or 64, chain_len, seed, attainable=True, field=field)
    raise ValueError(f"unknown problem {name!r}")
