import numpy as np
import pytest

from orthopt.base import KINDS, check_linearity, make_base
from orthopt.exceptions import NumericalError, ShapeError


def test_identity_passes_through(rng):
    g = rng.standard_normal((3, 4))
    assert make_base("identity").transform(g) is g
    assert make_base("none").kind == "identity"


def test_sgd_without_momentum_is_identity(rng):
    st = make_base("sgd", momentum=0.0)
    for _ in range(3):
        g = rng.standard_normal((3, 4))
        assert np.array_equal(st.transform(g), g)


def test_sgd_momentum_recursion():
    st = make_base("sgd", momentum=0.5)
    g1, g2 = np.ones((1, 2)), 2 * np.ones((1, 2))
    assert np.array_equal(st.transform(g1), g1)
    assert np.array_equal(st.transform(g2), 0.5 * g1 + g2)
    assert st.step_count == 2


def test_sgd_exact_linearity_over_horizon(rng):
    gs = [rng.standard_normal((4, 5)) for _ in range(10)]
    a, b = make_base("sgd", momentum=0.3), make_base("sgd", momentum=0.3)
    for g in gs:
        assert np.allclose(b.transform(-2.5 * g), -2.5 * a.transform(g), rtol=1e-14, atol=0)


def test_vadam_first_step_unit_rows():
    # hand trace: m = 0.1 g, m_hat = g; v = 0.001 |g_i|^2, v_hat = |g_i|^2
    g = np.array([[3.0, 4.0, 0.0], [0.0, 0.0, -2.0]])
    out = make_base("vadam", eps=1e-12).transform(g)
    assert np.allclose(out, [[0.6, 0.8, 0.0], [0.0, 0.0, -1.0]], atol=1e-12)


def test_vadam_second_step_trace():
    b1, b2 = 0.9, 0.999
    g1 = np.array([[1.0, 0.0]])
    g2 = np.array([[0.0, 2.0]])
    st = make_base("vadam", eps=0.0)
    st.transform(g1)
    out = st.transform(g2)
    m = (b1 * (1 - b1) * g1 + (1 - b1) * g2) / (1 - b1**2)
    v = (b2 * (1 - b2) * 1.0 + (1 - b2) * 4.0) / (1 - b2**2)
    assert np.allclose(out, m / np.sqrt(v))
    assert st.second_moment.shape == (1,)


def test_adam_matches_reference_trace():
    g = np.array([[1.0, -3.0]])
    out = make_base("adam", eps=0.0).transform(g)
    assert np.allclose(out, np.sign(g))


@pytest.mark.parametrize("kind", KINDS)
def test_transform_validates_input(kind):
    st = make_base(kind)
    with pytest.raises(NumericalError, match="weights"):
        st.transform(np.array([[np.nan]]), name="weights")
    st.transform(np.ones((2, 2)))
    with pytest.raises(ShapeError):
        st.transform(np.ones((2, 3)))


def test_transform_keeps_complex_field():
    g = np.array([[1 + 1j, 2 - 1j]])
    for kind in KINDS:
        assert np.iscomplexobj(make_base(kind).transform(g))


def test_copy_is_independent():
    st = make_base("sgd")
    st.transform(np.ones((1, 1)))
    other = st.copy()
    other.transform(np.ones((1, 1)))
    assert st.step_count == 1 and other.step_count == 2


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_base("rmsprop")


@pytest.mark.parametrize("kind", ["identity", "sgd", "vadam"])
def test_linear_kinds_pass_check(kind):
    report = check_linearity(kind, momentum=0.3)
    assert report.passed and report.min_cosine >= 1 - 1e-6


def test_adam_fails_check():
    report = check_linearity("adam")
    assert not report.passed
    # elementwise normalization is scale invariant but bends row directions
    assert report.scale_cosine >= 1 - 1e-6
    assert report.alignment_cosine < 0.99
