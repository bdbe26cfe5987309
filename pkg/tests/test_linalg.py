import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbroadcast.linalg import (
    HermitianEig,
    dag,
    hermitian_eig,
    kron,
    matrix_function_on_support,
    max_abs,
    partial_trace,
    support_isometry,
    support_projector,
    trace_norm,
)


def random_herm(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + dag(g)) / 2


def random_psd(d, rng, rank=None):
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    return g @ dag(g)


def test_kron_convention_first_factor_slow():
    a = np.diag([1.0, 2.0])
    b = np.diag([10.0, 20.0, 30.0])
    k = kron(a, b)
    # row index (i, j) = i * 3 + j
    assert k[0 * 3 + 1, 0 * 3 + 1] == 1.0 * 20.0
    assert k[1 * 3 + 2, 1 * 3 + 2] == 2.0 * 30.0


def test_partial_trace_of_product():
    rng = np.random.default_rng(0)
    a = random_psd(2, rng)
    b = random_psd(3, rng)
    c = random_psd(2, rng)
    full = kron(a, b, c)
    assert max_abs(partial_trace(full, [2, 3, 2], [0]) - a * b.trace() * c.trace()) < 1e-10
    assert max_abs(partial_trace(full, [2, 3, 2], [1]) - b * a.trace() * c.trace()) < 1e-10
    assert max_abs(partial_trace(full, [2, 3, 2], [0, 2]) - kron(a, c) * b.trace()) < 1e-10


def test_partial_trace_keeps_trace():
    rng = np.random.default_rng(1)
    m = random_psd(12, rng)
    red = partial_trace(m, [2, 3, 2], [1])
    assert abs(red.trace() - m.trace()) < 1e-10


def test_partial_trace_matches_elementwise_oracle():
    # independent contraction written out by hand
    rng = np.random.default_rng(2)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    got = partial_trace(m, [2, 3], [0])
    want = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(3):
                want[i, j] += m[i * 3 + k, j * 3 + k]
    assert max_abs(got - want) < 1e-12


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(ValueError):
        partial_trace(np.eye(5), [2, 3], [0])
    with pytest.raises(ValueError):
        partial_trace(np.eye(6), [2, 3], [2])


def test_hermitian_eig_descending_and_reconstructs():
    rng = np.random.default_rng(3)
    h = random_herm(7, rng)
    vals, vecs = hermitian_eig(h)
    assert np.all(np.diff(vals) <= 1e-12)
    assert max_abs((vecs * vals) @ dag(vecs) - h) < 1e-10
    assert max_abs(dag(vecs) @ vecs - np.eye(7)) < 1e-10


def test_hermitian_eig_rejects_nonhermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_matrix_function_on_support_pseudoinverse():
    rng = np.random.default_rng(4)
    m = random_psd(6, rng, rank=4)
    inv = matrix_function_on_support(m, lambda x: 1.0 / x)
    proj = support_projector(m)
    assert max_abs(m @ inv - proj) < 1e-8
    assert max_abs(inv @ m - proj) < 1e-8


def test_matrix_function_sqrt_squares_back():
    rng = np.random.default_rng(5)
    m = random_psd(5, rng, rank=3)
    r = matrix_function_on_support(m, np.sqrt)
    assert max_abs(r @ r - m) < 1e-8


def test_matrix_function_rejects_negative():
    with pytest.raises(ValueError, match="positive semidefinite"):
        matrix_function_on_support(np.diag([1.0, -0.5]), np.sqrt)


def test_support_isometry_spans_range():
    rng = np.random.default_rng(6)
    m = random_psd(6, rng, rank=2)
    v = support_isometry(m)
    assert v.shape == (6, 2)
    assert max_abs(dag(v) @ v - np.eye(2)) < 1e-10
    assert max_abs(v @ dag(v) - support_projector(m)) < 1e-10


def test_trace_norm_known_values():
    assert abs(trace_norm(np.diag([1.0, -2.0, 3.0])) - 6.0) < 1e-12
    assert abs(trace_norm(np.zeros((3, 3)))) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 5))
def test_trace_norm_equals_abs_eigs_for_hermitian(seed, d):
    h = random_herm(d, np.random.default_rng(seed))
    assert abs(trace_norm(h) - np.abs(np.linalg.eigvalsh(h)).sum()) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_partial_trace_adjoint_of_tensoring(seed):
    # <Tr_B(M), X> == <M, X (x) I_B>
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    lhs = np.trace(dag(x) @ partial_trace(m, [2, 3], [0]))
    rhs = np.trace(dag(kron(x, np.eye(3))) @ m)
    assert abs(lhs - rhs) < 1e-9


def test_hermitian_eig_namedtuple_fields():
    out = hermitian_eig(np.eye(2))
    assert isinstance(out, HermitianEig)
    assert out.values.shape == (2,)
    assert out.vectors.shape == (2, 2)
