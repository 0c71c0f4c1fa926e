import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from gpolar import (
    DimensionError,
    DomainError,
    GraphBasis,
    NoExchangeError,
    RankError,
    Signature,
    StructureError,
    lagrangian_basis_from_graph,
    permuted_graph_basis,
    permuted_lagrangian_graph_basis,
    ppt_exchange,
    symplectic_swap,
)
from gpolar.sigspaces import EPS


def _J(n):
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def _max_angle(U, V):
    return float(np.max(scipy.linalg.subspace_angles(U, V)))


def test_exchange_scalar():
    assert ppt_exchange([[2.0]], 0, 0) == pytest.approx(np.array([[0.5]]))


def test_exchange_block_without_coupling():
    out = ppt_exchange([[2.0, 0.0], [0.0, 2.0]], 0, 0)
    assert np.array_equal(np.abs(out), [[0.5, 0.0], [0.0, 2.0]])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_exchange_involution(seed):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, (4, 3))
    i, j = int(rng.integers(4)), int(rng.integers(3))
    X[i, j] = rng.choice([-1, 1]) * rng.uniform(0.5, 2)
    back = ppt_exchange(ppt_exchange(X, i, j), i, j)
    assert np.max(np.abs(back - X)) <= 4 * EPS * max(1.0, np.max(np.abs(X))) * 4


def test_exchange_preserves_span(rng):
    X = rng.standard_normal((3, 2))
    X[1, 0] = 1.7
    Y = ppt_exchange(X, 1, 0)
    before = np.vstack([np.eye(2), X])
    # identity row 0 and row 3 (X row 1) trade places
    after = GraphBasis("general", np.array([3, 1, 2, 0, 4]), Y, 2.0).basis()
    assert _max_angle(before, after) <= 1e-14


def test_exchange_tiny_pivot():
    with pytest.raises(NoExchangeError):
        ppt_exchange([[1e-12]], 0, 0)


def test_graph_basis_already_bounded(rng):
    X = rng.uniform(-1, 1, (3, 2))
    g = permuted_graph_basis(np.vstack([np.eye(2), X]), 1.5)
    assert np.array_equal(g.selector, np.arange(5))
    assert np.allclose(g.xhat, X, atol=1e-15)
    assert g.swaps == 0


def test_graph_basis_one_dimensional():
    g = permuted_graph_basis(np.array([[1.0], [2.0]]), 1.5)
    assert list(g.selector) == [1, 0]
    assert g.xhat == pytest.approx(np.array([[0.5]]), abs=1e-15)


def test_graph_basis_random_large(rng):
    Y = rng.standard_normal((200, 100))
    g = permuted_graph_basis(Y, 4.0)
    assert np.max(np.abs(g.xhat)) <= 4.0
    assert _max_angle(g.basis(), Y) <= 1e-12


def test_graph_basis_ill_conditioned_top_block(rng):
    Y = rng.standard_normal((12, 5))
    Y[:5] *= 1e-9
    g = permuted_graph_basis(Y, 2.0)
    assert np.max(np.abs(g.xhat)) <= 2.0
    assert _max_angle(g.basis(), Y) <= 1e-12


def test_graph_basis_errors(rng):
    with pytest.raises(DomainError):
        permuted_graph_basis(rng.standard_normal((4, 2)), 1.0)
    with pytest.raises(DimensionError):
        permuted_graph_basis(rng.standard_normal((2, 3)))
    with pytest.raises(RankError):
        permuted_graph_basis(np.ones((4, 2)))


def test_lagrangian_identity_selector(rng):
    B = rng.uniform(-1, 1, (3, 3))
    X = 0.5 * (B + B.T)
    g = permuted_lagrangian_graph_basis(np.vstack([np.eye(3), X]), 1.5)
    assert g.selector.all()
    assert np.allclose(g.xhat, X, atol=1e-15)


def test_lagrangian_scalar():
    Y = np.array([[1.0], [3.0]])
    g = permuted_lagrangian_graph_basis(Y, 1.5)
    assert not g.selector[0]
    assert abs(g.xhat[0, 0]) == pytest.approx(1 / 3)
    assert _max_angle(g.basis(), Y) <= 1e-15


@pytest.mark.parametrize("n", [4, 10, 30])
def test_lagrangian_random(rng, n):
    B = rng.standard_normal((n, n)) * 10
    X = B + B.T
    Y = np.vstack([np.eye(n), X]) @ rng.standard_normal((n, n))
    g = permuted_lagrangian_graph_basis(Y, 2.0)
    assert np.max(np.abs(g.xhat)) <= 2.0
    assert np.linalg.norm(g.xhat - g.xhat.T) <= 1e-14 * np.linalg.norm(g.xhat)
    U = g.basis()
    assert _max_angle(U, Y) <= 1e-12
    assert np.linalg.norm(U.T @ _J(n) @ U) <= 1e-10 * np.linalg.norm(U) ** 2


def test_lagrangian_rejects_non_lagrangian(rng):
    with pytest.raises(StructureError):
        permuted_lagrangian_graph_basis(rng.standard_normal((6, 3)))


def test_lagrangian_tau_bound():
    with pytest.raises(DomainError):
        lagrangian_basis_from_graph(np.eye(2), 1.4)


def test_symplectic_swap_commutes_with_sigma2():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        v = rng.integers(0, 2, n).astype(bool)
        s = Signature(rng.choice([-1.0, 1.0], n)).dense()
        S2 = np.block([[s, np.zeros((n, n))], [np.zeros((n, n)), s]])
        P = symplectic_swap(v)
        assert np.array_equal(P @ S2 @ P.T, S2)
        assert np.array_equal(P.T @ P, np.eye(2 * n))
        assert np.array_equal(P.T @ _J(n) @ P, _J(n))
