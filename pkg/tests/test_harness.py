import re

import pytest
from hypothesis import given, settings, strategies as st

from orthopt.harness import (
    CSV_HEADER,
    RunAborted,
    RunConfig,
    RunRecord,
    emit_csv,
    emit_plot,
    format_row,
    parse_csv,
    read_csv,
    run,
)
from orthopt.optimizers import OrthoStepConfig
from orthopt.problems import make_chain


def _small_pca(**kw):
    base = dict(problem="pca", p=3, n=8, step=OrthoStepConfig("pogo", 0.5, base="sgd", momentum=0.3))
    base.update(kw)
    return RunConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(max_iters=0)
    with pytest.raises(ValueError):
        RunConfig(gap_tol=0)


def test_one_iteration_gives_two_records():
    recs = run(_small_pca(max_iters=1))
    assert [r.iter for r in recs] == [0, 1]
    assert recs[0].lambda_used is None and recs[1].lambda_used == 0.5


def test_run_converges_and_logs_monotone_time():
    recs = run(_small_pca(max_iters=2000))
    assert recs[-1].gap <= 1e-6
    assert all(b.iter > a.iter for a, b in zip(recs, recs[1:]))
    assert all(b.time_s >= a.time_s for a, b in zip(recs, recs[1:]))


def test_log_every_keeps_final_record():
    recs = run(_small_pca(max_iters=25, log_every=10, gap_tol=1e-300))
    assert [r.iter for r in recs] == [0, 10, 20, 25]


def test_determinism():
    a = run(_small_pca(max_iters=50))
    b = run(_small_pca(max_iters=50))
    strip = [(r.iter, r.loss, r.gap, r.max_distance, r.xi) for r in a]
    assert strip == [(r.iter, r.loss, r.gap, r.max_distance, r.xi) for r in b]


def test_chain_run_without_optimum_logs_na_gap():
    cfg = RunConfig(problem="chain", p=4, chain_len=2, step=OrthoStepConfig("pogo", 0.01, base="vadam"), max_iters=3)
    prob = make_chain(4, 2, seed=0, attainable=False)
    recs = run(cfg, problem=prob, params=prob.random_feasible(0))
    assert all(r.gap is None for r in recs)


def test_numeric_failure_is_reported_with_partial_records():
    cfg = RunConfig(problem="procrustes", p=4, n=6, step=OrthoStepConfig("slpg", 1e9), max_iters=50)
    with pytest.raises(RunAborted) as info:
        run(cfg)
    assert info.value.records and info.value.records[0].iter == 0
    assert "iteration" in info.value.message


def test_plateau_halving_reduces_step():
    cfg = _small_pca(max_iters=40, gap_tol=1e-300, plateau_halving=True, patience=1)
    recs = run(cfg)
    assert len(recs) == 41


def test_emit_csv_format(tmp_path):
    path = tmp_path / "r.csv"
    emit_csv([RunRecord(0, 0.0, 2.5, None, 1e-16, None, 0.1)], path)
    assert path.read_text() == CSV_HEADER + "\n0,0.0,2.5,NA,1e-16,NA,0.1\n"
    emit_csv([], path)
    assert path.read_text() == CSV_HEADER + "\n"


def test_emit_csv_comments(tmp_path):
    path = tmp_path / "r.csv"
    emit_csv([RunRecord(0, 0.0, 1.0)], path, argv=["run", "--lr", "1"], error="boom\nbad")
    lines = path.read_text().splitlines()
    assert lines[0] == "# argv: run --lr 1" and lines[-1] == "# error: boom bad"
    assert read_csv(path) == [RunRecord(0, 0.0, 1.0)]


def test_emit_csv_io_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "r.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv([], bad)


finite = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite, finite, st.none() | finite, st.none() | finite, st.none() | finite), max_size=5))
def test_csv_round_trip(rows):
    recs = [RunRecord(k, abs(t), loss, gap, 0.0 if gap is None else abs(gap), lam, xi) for k, (t, loss, gap, lam, xi) in enumerate(rows)]
    text = "\n".join([CSV_HEADER] + [format_row(r) for r in recs])
    assert parse_csv(text) == recs


def test_parse_rejects_bad_header():
    with pytest.raises(ValueError):
        parse_csv("a,b\n1,2\n")


def _polyline_points(svg):
    (pts,) = re.findall(r'points="([^"]*)"', svg)
    return [tuple(map(float, p.split(","))) for p in pts.split()]


def test_plot_two_records(tmp_path):
    path = tmp_path / "p.svg"
    emit_plot([RunRecord(0, 0.0, 1.0, 1.0), RunRecord(1, 1.0, 0.5, 0.1)], path, "gap")
    svg = path.read_text()
    assert svg.startswith("<?xml") and svg.count("<polyline") == 1
    assert len(_polyline_points(svg)) == 2


def test_plot_skips_na_and_is_monotone(tmp_path):
    recs = [RunRecord(k, 0.1 * k, 1.0, None if k == 2 else 10.0**-k) for k in range(6)]
    path = tmp_path / "p.svg"
    emit_plot(recs, path, "gap")
    pts = _polyline_points(path.read_text())
    assert len(pts) == 5
    ys = [y for _, y in pts]
    # decreasing gap moves down the axis, i.e. increasing screen y
    assert all(b > a for a, b in zip(ys, ys[1:]))


def test_plot_validation(tmp_path):
    with pytest.raises(ValueError):
        emit_plot([RunRecord(0, 0.0, 1.0)], tmp_path / "p.svg")
    with pytest.raises(ValueError):
        emit_plot([RunRecord(0, 0.0, 1.0)] * 2, tmp_path / "p.svg", "xi")
