"""Optimization over matrices with orthonormal rows.

POGO and the Landing, SLPG and QR-retraction baselines, with the geometry,
quartic root solver, base optimizers and benchmark problems they rely on.
"""
from .base import BaseOptimizer, check_linearity, make_base
from .exceptions import (
    DegeneracyError,
    DegeneratePolynomialError,
    NotOnManifoldError,
    NumericalError,
    OrthoptError,
    ProjectionError,
    ShapeError,
    UnsupportedMetricError,
)
from .harness import RunConfig, RunRecord, emit_csv, emit_plot, read_csv, run
from .linalg import COMPLEX, REAL, gemm_counter, householder_qr, polar_project
from .optimizers import (
    IterateSet,
    OrthoStepConfig,
    landing_step,
    multi_step,
    pogo_step,
    rgd_step,
    slpg_step,
)
from .problems import make_chain, make_pca, make_procrustes, optimality_gap
from .quartic import QuarticPoly, landing_poly_from, select_landing_step, solve_quartic
from .stiefel import StiefelPoint, manifold_distance, qr_retract, random_stiefel, relative_gradient

__version__ = "0.1.0"
