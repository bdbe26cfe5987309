import numpy as np
import pytest

from qbroadcast.corpus import bell_state, random_state
from qbroadcast.frames import (
    build_ic_povm,
    decompose,
)
from qbroadcast.linalg import dag, max_abs
from qbroadcast.states import DensityMatrix


def random_herm(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + dag(g)) / 2


@pytest.mark.parametrize("d", [2, 3, 4])
def test_ic_povm_is_minimal_and_valid(d):
    ic = build_ic_povm(d)
    assert ic.povm.n_outcomes == d * d
    assert np.isfinite(ic.gram_condition)
    total = sum(ic.povm.elements)
    assert max_abs(total - np.eye(d)) < 1e-10


def test_tetrahedral_qubit_sum_and_trace():
    ic = build_ic_povm(2)
    for e in ic.povm.elements:
        assert abs(np.trace(e).real - 0.5) < 1e-12
        # rank one: one eigenvalue 1/2, one 0
        vals = np.linalg.eigvalsh(e)
        assert abs(vals[1] - 0.5) < 1e-12 and abs(vals[0]) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_dual_frame_reconstruction(d):
    ic = build_ic_povm(d)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = random_herm(d, rng)
        rebuilt = sum(
            np.trace(e @ x) * f for e, f in zip(ic.povm.elements, ic.dual)
        )
        assert max_abs(rebuilt - x) < 1e-9


def test_dual_frame_biorthogonal():
    ic = build_ic_povm(3)
    k = ic.povm.n_outcomes
    for i in range(k):
        for j in range(k):
            got = np.trace(ic.dual[i] @ ic.povm.elements[j]).real
            assert abs(got - (1.0 if i == j else 0.0)) < 1e-9


def test_qubit_dual_frame_not_positive():
    # dual frame operators are Hermitian but generically carry a
    # negative eigenvalue; for the tetrahedral POVM every one does
    ic = build_ic_povm(2)
    for f in ic.dual:
        assert max_abs(f - dag(f)) < 1e-10
        assert np.linalg.eigvalsh(f)[0] < -0.1


def test_decompose_product_state():
    rng = np.random.default_rng(1)
    a, b = random_state(2, rng), random_state(3, rng)
    dec = decompose(a.tensor(b), build_ic_povm(2))
    for w, c in zip(dec.weights, dec.cond_states):
        if w > 1e-12:
            assert max_abs(c.matrix - b.matrix) < 1e-9


def test_decompose_weights_are_born_probabilities():
    rng = np.random.default_rng(2)
    rho = random_state((2, 2), rng)
    ic = build_ic_povm(2)
    dec = decompose(rho, ic)
    want = ic.povm.probabilities(rho.marginal(0))
    assert max_abs(dec.weights - want) < 1e-10
    assert abs(dec.weights.sum() - 1.0) < 1e-9


@pytest.mark.parametrize("measured", [0, 1])
def test_decompose_reconstructs(measured):
    rng = np.random.default_rng(3)
    rho = random_state((2, 2), rng)
    dec = decompose(rho, build_ic_povm(2), measured=measured)
    assert max_abs(dec.reconstruct() - rho.matrix) < 1e-9


def test_decompose_bell_conditionals_do_not_commute():
    dec = decompose(bell_state(), build_ic_povm(2))
    worst = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            x = dec.cond_states[i].matrix
            y = dec.cond_states[j].matrix
            worst = max(worst, max_abs(x @ y - y @ x))
    assert worst > 0.1


def test_decompose_rejects_wrong_dims():
    with pytest.raises(ValueError):
        decompose(DensityMatrix.maximally_mixed((2, 2)), build_ic_povm(3))
    with pytest.raises(ValueError):
        decompose(DensityMatrix.maximally_mixed((2,)), build_ic_povm(2))


def test_build_rejects_trivial_dimension():
    with pytest.raises(ValueError):
        build_ic_povm(1)
