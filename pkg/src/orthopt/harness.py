"""Training loop, CSV metrics and SVG convergence plots."""
import math
import time
from dataclasses import dataclass, field as dc_field, fields

import numpy as np

from .exceptions import NumericalError, OrthoptError, UnsupportedMetricError
from .linalg import REAL
from .optimizers import IterateSet, OrthoStepConfig, multi_step
from .problems import make_problem, optimality_gap
from .stiefel import manifold_distance

CSV_HEADER = "iter,time_s,loss,gap,max_distance,lambda_used,xi"
NA = "NA"
PLOT_COLUMNS = ("loss", "gap", "max_distance")


@dataclass(frozen=True)
class RunConfig:
    problem: str = "pca"
    p: int = None
    n: int = None
    chain_len: int = 8
    field: str = REAL
    step: OrthoStepConfig = dc_field(default_factory=OrthoStepConfig)
    max_iters: int = 3000
    gap_tol: float = 1e-6
    log_every: int = 1
    seed: int = 0
    out: str = None
    plot: str = None
    plateau_halving: bool = False
    patience: int = 10

    def __post_init__(self):
        if not self.gap_tol > 0:
            raise ValueError(f"gap_tol must be positive, got {self.gap_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.log_every < 1:
            raise ValueError(f"log_every must be >= 1, got {self.log_every}")


@dataclass(frozen=True)
class RunRecord:
    iter: int
    time_s: float
    loss: float
    gap: float = None
    max_distance: float = None
    lambda_used: float = None
    xi: float = None


class RunAborted(OrthoptError):
    """A run stopped by a numerical failure; carries the records logged so far."""

    def __init__(self, records, message):
        super().__init__(message)
        self.records = records
        self.message = message


def _seeds(seed):
    problem_ss, init_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(problem_ss), np.random.default_rng(init_ss)


def build(config):
    """Construct the problem and the initial feasible iterates for ``config``."""
    prob_rng, init_rng = _seeds(config.seed)
    problem = make_problem(config.problem, config.p, config.n, config.chain_len, prob_rng, config.field)
    return problem, problem.init_params(init_rng)


def _gap(problem, params):
    try:
        return optimality_gap(problem, params)
    except UnsupportedMetricError:
        return None


def _lambda(infos):
    lams = [i.lambda_used for i in infos if not math.isnan(i.lambda_used)]
    return max(lams) if lams else None


def run(config, problem=None, params=None):
    """Optimize until ``gap <= gap_tol`` or ``max_iters`` steps.

    Logs the initial state, every ``log_every``-th iterate and the final one.
    A :class:`NumericalError` raised by a step ends the run with
    :class:`RunAborted` holding everything logged before the failure.
    """
    if problem is None:
        problem, built = build(config)
        params = built if params is None else params
    cfg = config.step
    its = IterateSet.create(params, cfg)
    records = []
    best, stale = math.inf, 0
    start = time.perf_counter()

    @np.errstate(over="ignore", invalid="ignore")
    def log(k, infos, gap):
        records.append(
            RunRecord(
                iter=k,
                time_s=time.perf_counter() - start,
                loss=problem.loss(its.matrices),
                gap=gap,
                max_distance=max(manifold_distance(x) for x in its.matrices),
                lambda_used=_lambda(infos) if infos else None,
                xi=max(i.xi for i in infos) if infos else None,
            )
        )

    gap = _gap(problem, its.matrices)
    log(0, None, gap)
    for k in range(1, config.max_iters + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                grads = problem.descent_grads(its.matrices)
            its = multi_step(its, grads, cfg)
        except NumericalError as exc:
            raise RunAborted(records, f"iteration {k}: {exc}") from exc
        with np.errstate(over="ignore", invalid="ignore"):
            gap = _gap(problem, its.matrices)
        done = k == config.max_iters or (gap is not None and gap <= config.gap_tol)
        if done or k % config.log_every == 0:
            log(k, its.infos, gap)
            if config.plateau_halving:
                loss = records[-1].loss * (-1 if problem.maximize else 1)
                if loss < best - 1e-12 * max(1.0, abs(best)):
                    best, stale = loss, 0
                else:
                    stale += 1
                    if stale >= config.patience:
                        cfg = cfg.with_eta(cfg.eta / 2)
                        stale = 0
        if done:
            break
    return records


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return NA
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def format_row(rec):
    return ",".join(_fmt(getattr(rec, f.name)) for f in fields(RunRecord))


def emit_csv(records, path, argv=None, error=None):
    """Write records as CSV; floats use the shortest exact decimal form."""
    lines = []
    if argv is not None:
        lines.append("# argv: " + " ".join(argv))
    lines.append(CSV_HEADER)
    lines.extend(format_row(r) for r in records)
    if error is not None:
        lines.append("# error: " + " ".join(str(error).split()))
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def _parse(v, kind):
    if v == NA:
        return None
    return int(v) if kind is int else float(v)


def parse_csv(text):
    """Inverse of :func:`emit_csv`; comment lines are ignored."""
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("missing or malformed CSV header")
    kinds = [int] + [float] * (len(fields(RunRecord)) - 1)
    out = []
    for ln in rows[1:]:
        vals = ln.split(",")
        out.append(RunRecord(*(_parse(v, k) for v, k in zip(vals, kinds))))
    return out


def read_csv(path):
    with open(path) as fh:
        return parse_csv(fh.read())


def emit_plot(records, path, column="gap", width=640, height=400, margin=50):
    """Standalone SVG of ``column`` against ``time_s`` on a log-scaled y axis."""
    if column not in PLOT_COLUMNS:
        raise ValueError(f"column must be one of {PLOT_COLUMNS}, got {column!r}")
    if len(records) < 2:
        raise ValueError("a plot needs at least two records")
    pts = [(r.time_s, getattr(r, column)) for r in records]
    pts = [(t, v) for t, v in pts if v is not None and math.isfinite(v) and v > 0]
    if pts:
        ts = [t for t, _ in pts]
        ys = [math.log10(v) for _, v in pts]
        t0, t1 = min(ts), max(ts)
        y0, y1 = min(ys), max(ys)
        tspan = (t1 - t0) or 1.0
        yspan = (y1 - y0) or 1.0
        w, h = width - 2 * margin, height - 2 * margin
        coords = " ".join(
            f"{margin + w * (t - t0) / tspan:.3f},{margin + h * (1 - (y - y0) / yspan):.3f}"
            for t, y in zip(ts, ys)
        )
        label = f"log10 {column}: [{y0:.2f}, {y1:.2f}]"
    else:
        coords, label = "", f"log10 {column}: no data"
    svg = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">\n'
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
        'fill="none" stroke="#999"/>\n'
        f'<text x="{margin}" y="{margin - 10}" font-size="12">{label}</text>\n'
        f'<text x="{width - margin}" y="{height - margin + 20}" font-size="12" text-anchor="end">time_s</text>\n'
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{coords}"/>\n'
        "</svg>\n"
    )
    try:
        with open(path, "w") as fh:
            fh.write(svg)
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc.strerror or exc}") from exc
