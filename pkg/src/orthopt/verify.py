"""In-package property suite behind ``orthopt verify``.

Every check is a small randomized experiment against an independent oracle
(direct distance computation, planted roots, finite differences, ...). Sizes
are kept small so the whole suite runs in seconds.
"""
import time
from dataclasses import dataclass

import numpy as np

from .base import check_linearity, make_base
from .harness import CSV_HEADER, RunRecord, format_row, parse_csv
from .linalg import COMPLEX, REAL, adjoint, gemm_counter, matmul, skew_part
from .optimizers import IterateSet, OrthoStepConfig, multi_step, pogo_step, slpg_step
from .problems import make_chain, make_pca, make_procrustes
from .quartic import QuarticPoly, landing_poly_from, select_landing_step, solve_quartic
from .stiefel import manifold_distance, normal_gradient, random_stiefel

FIELDS = (REAL, COMPLEX)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _gauss(rng, shape, field):
    z = rng.standard_normal(shape)
    if field == COMPLEX:
        z = (z + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return z


def _random_skew(rng, p, field):
    return skew_part(_gauss(rng, (p, p), field))


def _unit(g):
    return g / np.linalg.norm(g)


def check_tangent_step_bound(trials=100, seed=0):
    """``||M M^H - I|| <= eta^2 ||S^2||`` for ``M = X - eta X S`` with skew ``S``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for field in FIELDS:
        for _ in range(trials):
            x = random_stiefel(20, 30, field, rng).matrix
            s = _random_skew(rng, 30, field)
            for eta in (0.01, 0.1, 0.5):
                m = x - eta * matmul(x, s)
                bound = eta**2 * np.linalg.norm(matmul(s, s))
                worst = max(worst, manifold_distance(m) / bound)
    return worst <= 1 + 1e-10, f"max ratio to bound {worst:.6f}"


def _pogo_on_manifold_ratio(rng, xi, field, p=20, n=30):
    x = random_stiefel(p, n, field, rng).matrix
    g = _unit(_gauss(rng, (p, n), field))
    cfg = OrthoStepConfig("pogo", xi)
    out, _ = pogo_step(x, g, cfg, make_base())
    bound = (0.75 + xi**2 / 4) ** 2 * xi**8
    return manifold_distance(out) ** 2 / bound


def check_normal_step_bound(trials=100, seed=1):
    """One fixed-half POGO step from the manifold: ``dist^2 <= (3/4 + xi^2/4)^2 xi^8``."""
    rng = np.random.default_rng(seed)
    worst = max(
        _pogo_on_manifold_ratio(rng, xi, field)
        for field in FIELDS
        for xi in (0.1, 0.5, 0.9)
        for _ in range(trials)
    )
    return worst <= 1 + 1e-8, f"max ratio to bound {worst:.6f}"


def trajectory_max_distance(xi, steps=1000, p=10, n=20, seed=0, field=REAL):
    """Largest distance along a fixed-half POGO run with unit-norm random gradients."""
    rng = np.random.default_rng(seed)
    x = random_stiefel(p, n, field, rng).matrix
    cfg = OrthoStepConfig("pogo", xi)
    state = make_base()
    worst = 0.0
    for _ in range(steps):
        x, _ = pogo_step(x, _unit(_gauss(rng, (p, n), field)), cfg, state)
        worst = max(worst, manifold_distance(x))
    return worst


def check_trajectory_bound(steps=1000, seed=2):
    ok, parts = True, []
    for field in FIELDS:
        d = {xi: trajectory_max_distance(xi, steps, seed=seed, field=field) for xi in (0.1, 0.3, 0.5)}
        for xi, v in d.items():
            ok &= v <= 10 * (0.75 + xi**2 / 4) * xi**4
        ok &= d[0.1] <= 1e-2 * d[0.5]
        parts.append(f"{field}: " + ", ".join(f"xi={xi}: {v:.2e}" for xi, v in d.items()))
    return ok, "; ".join(parts)


def _direct_poly(m, lam):
    y = m - lam * normal_gradient(m)
    return manifold_distance(y) ** 2


def check_landing_polynomial(trials=100, seed=3):
    """Coefficient form of the landing polynomial vs the direct squared distance.

    Shapes have ``p >= 2``: a single row has real roots on the grid, where both
    evaluations lose all relative accuracy to cancellation.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    grid = np.linspace(0.0, 1.0, 11)
    for field in FIELDS:
        for _ in range(trials):
            p = int(rng.integers(2, 8))
            n = int(rng.integers(p, 12))
            m = _gauss(rng, (p, n), field) / np.sqrt(n)
            poly = landing_poly_from(m)
            for lam in grid:
                direct = _direct_poly(m, lam)
                worst = max(worst, abs(poly(lam) - direct) / max(direct, 1e-300))
    return worst <= 1e-10, f"max relative error {worst:.2e}"


def check_quartic_roots(trials=1000, seed=4):
    """Planted real roots are recovered to 1e-8 relative."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n_real = int(rng.choice([0, 2, 4]))
        real = rng.uniform(-3, 3, n_real)
        pairs = [complex(rng.uniform(-3, 3), rng.uniform(0.1, 3)) for _ in range((4 - n_real) // 2)]
        roots = list(real) + [z for c in pairs for z in (c, c.conjugate())]
        coeffs = np.real(np.poly(roots))
        found = solve_quartic(QuarticPoly(coeffs))
        for r in real:
            err = np.min(np.abs(found - r)) / max(1.0, abs(r))
            worst = max(worst, err)
    return worst <= 1e-8, f"worst planted-root error {worst:.2e}"


TIE_BREAK_TABLE = (
    ((1.0, -5.0, 7.0, -5.0, 6.0), 2.0),  # (x-2)(x-3)(x^2+1)
    ((1.0, 0.0, 0.0, 0.0, -1.0), 1.0),  # x^4 - 1
    ((1.0, 0.0, 6.0, 0.0, 25.0), 1.0),  # (x^2-2x+5)(x^2+2x+5)
)


def check_tie_break():
    got = [select_landing_step(QuarticPoly(c)).selected_lambda for c, _ in TIE_BREAK_TABLE]
    want = [w for _, w in TIE_BREAK_TABLE]
    ok = all(abs(g - w) <= 1e-12 for g, w in zip(got, want))
    return ok, f"selected {got}, expected {want}"


def _fd_error(problem, rng, h=1e-5):
    params = problem.random_feasible(rng)
    grads = problem.euclid_grads(params)
    worst = 0.0
    for k, x in enumerate(params):
        d = _gauss(rng, x.shape, problem.field)
        plus = list(params)
        minus = list(params)
        plus[k] = x + h * d
        minus[k] = x - h * d
        numeric = (problem.loss(plus) - problem.loss(minus)) / (2 * h)
        analytic = float(np.real(np.vdot(grads[k], d)))
        worst = max(worst, abs(numeric - analytic) / max(abs(analytic), abs(numeric), 1e-300))
    return worst


def shipped_problems(seed=0):
    return [
        make_pca(30, 10, seed),
        make_procrustes(8, 12, seed),
        make_procrustes(6, 6, seed, COMPLEX),
        make_chain(4, 3, seed),
        make_chain(4, 3, seed, field=COMPLEX),
    ]


def check_gradients(points=10, seed=5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for prob in shipped_problems(seed):
        for _ in range(points):
            worst = max(worst, _fd_error(prob, rng))
    return worst <= 1e-6, f"max relative error {worst:.2e}"


def check_field_orthogonality(trials=100, seed=6):
    """Tangent and normal landing-field components are Frobenius orthogonal off the manifold.

    Points are Haar matrices pushed off the manifold by ``delta`` in
    ``[1e-3, 1]`` plus plain Gaussian matrices. Exactly on the manifold the
    normal component vanishes and its computed value is pure roundoff.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(trials):
        field = FIELDS[k % 2]
        p, n = 5, 9
        if k % 4 == 3:
            x = _gauss(rng, (p, n), field)
        else:
            delta = 10.0 ** rng.uniform(-3, 0)
            x = random_stiefel(p, n, field, rng).matrix + delta * _gauss(rng, (p, n), field)
        s = skew_part(matmul(adjoint(x), _gauss(rng, (p, n), field)))
        xs = matmul(x, s)
        nx = normal_gradient(x)
        inner = abs(np.vdot(nx, xs).real)
        worst = max(worst, inner / (np.linalg.norm(xs) * np.linalg.norm(nx)))
    return worst <= 1e-12, f"max normalized inner product {worst:.2e}"


def check_linearity_suite(seed=7):
    reports = {k: check_linearity(k, seed=seed) for k in ("identity", "sgd", "vadam", "adam")}
    sgd_exact = _sgd_horizon_error(seed)
    ok = reports["identity"].passed and reports["sgd"].passed and reports["vadam"].passed
    ok = ok and not reports["adam"].passed and sgd_exact <= 1e-12
    detail = ", ".join(f"{k}: {r.min_cosine:.9f}" for k, r in reports.items())
    return ok, f"{detail}; sgd horizon error {sgd_exact:.1e}"


def _sgd_horizon_error(seed, steps=10, c=3.7):
    rng = np.random.default_rng(seed)
    gs = [rng.standard_normal((4, 6)) for _ in range(steps)]
    a, b = make_base("sgd", momentum=0.3), make_base("sgd", momentum=0.3)
    worst = 0.0
    for g in gs:
        out, scaled = a.transform(g), b.transform(c * g)
        worst = max(worst, np.linalg.norm(scaled - c * out) / np.linalg.norm(c * out))
    return worst


def check_slpg_equivalence(trials=100, seed=8):
    """SLPG and POGO coincide for square matrices; for a single real row POGO needs twice the step."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    cases = ((6, 6, REAL, 1.0), (6, 6, COMPLEX, 1.0), (1, 7, REAL, 2.0))
    for _ in range(trials):
        for p, n, field, ratio in cases:
            x = random_stiefel(p, n, field, rng).matrix
            g = 0.1 * _unit(_gauss(rng, (p, n), field))
            eta = 0.5
            a, _ = slpg_step(x, g, OrthoStepConfig("slpg", eta))
            b, _ = pogo_step(x, g, OrthoStepConfig("pogo", ratio * eta), make_base())
            worst = max(worst, float(np.linalg.norm(a - b)))
    return worst <= 1e-12, f"max update difference {worst:.2e}"


def check_gemm_count():
    rng = np.random.default_rng(9)
    x = random_stiefel(5, 8, REAL, rng).matrix
    with gemm_counter() as tally:
        pogo_step(x, rng.standard_normal((5, 8)), OrthoStepConfig("pogo", 0.1), make_base())
    return tally.count <= 5, f"{tally.count} matrix products"


def check_find_root(trials=100, seed=10):
    """The root policy never leaves a larger landing polynomial than lambda = 1/2."""
    rng = np.random.default_rng(seed)
    violations = 0
    for k in range(trials):
        field = FIELDS[k % 2]
        x = random_stiefel(4, 7, field, rng).matrix
        s = _random_skew(rng, 7, field)
        m = x - 0.3 * matmul(x, s)
        poly = landing_poly_from(m)
        sel = select_landing_step(poly)
        real_root = min(abs(z.imag) for z in sel.roots) <= 1e-8
        if real_root and poly(sel.selected_lambda) > poly(0.5) * (1 + 1e-9) + 1e-30:
            violations += 1
    return violations == 0, f"{violations} violations"


def check_singular_value_bound(trials=100, seed=11):
    """``|sigma^2 - 1| <= ||X X^H - I||`` for planted singular values."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        p, n = 5, 8
        u = random_stiefel(p, p, REAL, rng).matrix
        v = random_stiefel(p, n, REAL, rng).matrix
        sigma = np.sqrt(1 + rng.uniform(-0.5, 0.5, p))
        x = matmul(u * sigma, v)
        eps = manifold_distance(x)
        worst = max(worst, np.max(np.abs(sigma**2 - 1)) / eps)
    return worst <= 1 + 1e-12, f"max ratio {worst:.6f}"


def check_chain_feasibility(steps=100, seed=12):
    prob = make_chain(16, 8, seed)
    cfg = OrthoStepConfig("pogo", 0.01, base="vadam")
    its = IterateSet.create(prob.random_feasible(seed), cfg)
    for _ in range(steps):
        its = multi_step(its, prob.descent_grads(its.matrices), cfg)
    d = its.max_distance()
    return d <= 1e-6, f"max distance {d:.2e} after {steps} steps"


def check_csv_round_trip(trials=100, seed=13):
    rng = np.random.default_rng(seed)

    def maybe(v):
        return None if rng.random() < 0.2 else v

    recs = [
        RunRecord(
            k,
            float(rng.random()),
            float(rng.standard_normal() * 10.0 ** rng.integers(-20, 20)),
            maybe(float(rng.random())),
            maybe(float(rng.random() * 1e-12)),
            maybe(float(rng.standard_normal())),
            maybe(float(rng.random())),
        )
        for k in range(trials)
    ]
    text = "\n".join([CSV_HEADER] + [format_row(r) for r in recs]) + "\n"
    ok = parse_csv(text) == recs
    return ok, f"{trials} records"


CHECKS = (
    ("tangent step bound", check_tangent_step_bound),
    ("normal step bound", check_normal_step_bound),
    ("trajectory bound", check_trajectory_bound),
    ("landing polynomial oracle", check_landing_polynomial),
    ("quartic planted roots", check_quartic_roots),
    ("root selection tie-break", check_tie_break),
    ("gradient finite differences", check_gradients),
    ("field orthogonality", check_field_orthogonality),
    ("base optimizer linearity", check_linearity_suite),
    ("slpg/pogo equivalence", check_slpg_equivalence),
    ("pogo matrix products", check_gemm_count),
    ("find-root policy", check_find_root),
    ("singular value bound", check_singular_value_bound),
    ("chain feasibility", check_chain_feasibility),
    ("csv round trip", check_csv_round_trip),
)


def run_all(checks=CHECKS):
    results = []
    for name, fn in checks:
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return results


def all_passed(results):
    return all(r.passed for r in results)
