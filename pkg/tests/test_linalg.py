import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from orbitspace import linalg
from orbitspace.exceptions import DimensionMismatch, NotCoregular, NotInImage, NotPositiveSemidefinite


def cofactor_det(A):
    """Laplace expansion along the first row."""
    n = len(A)
    if n == 0:
        return 1.0
    if n == 1:
        return A[0][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        total += (-1) ** j * A[0][j] * cofactor_det(minor)
    return total


def bounded_pd(seed, k, low=0.1, high=10.0):
    rng = np.random.default_rng(seed)
    Q = special_ortho_group.rvs(k, random_state=rng) if k > 1 else np.eye(1)
    return (Q * rng.uniform(low, high, k)) @ Q.T


# --- frozen examples ---------------------------------------------------------------------

def test_gram_examples():
    np.testing.assert_array_equal(linalg.gram([[1, 0, 0], [0, 1, 0]]), np.eye(2))
    G = linalg.gram([[1, 2, 2], [2, 0, 0]])
    np.testing.assert_array_equal(linalg.pack_lower(G), [9, 2, 4])
    assert linalg.gram([[-3.5]])[0, 0] == 12.25


def test_leading_minors_examples():
    np.testing.assert_allclose(linalg.leading_minors(np.eye(3)), [1, 1, 1, 1])
    np.testing.assert_allclose(linalg.leading_minors([[9, 2], [2, 4]]), [1, 9, 32], rtol=1e-15)
    np.testing.assert_allclose(linalg.leading_minors([[1, 1], [1, 1]]), [1, 1, 0], atol=1e-15)


def test_cholesky_examples():
    np.testing.assert_array_equal(linalg.semidefinite_cholesky(np.eye(3)), np.eye(3))
    W = linalg.semidefinite_cholesky([[9, 2], [2, 4]])
    np.testing.assert_allclose(W, [[3, 0], [2 / 3, 4 * math.sqrt(2) / 3]], rtol=1e-15)
    assert (4 * math.sqrt(2) / 3) ** 2 == pytest.approx(4 - 4 / 9, rel=1e-15)
    with pytest.raises(NotPositiveSemidefinite):
        linalg.semidefinite_cholesky([[1, 2], [2, 1]])


def test_cholesky_rank_deficient():
    W = linalg.semidefinite_cholesky([[1, 1], [1, 1]])
    np.testing.assert_allclose(W, [[1, 0], [1, 0]], atol=1e-15)
    # zero pivot followed by an inconsistent column
    with pytest.raises(NotPositiveSemidefinite):
        linalg.semidefinite_cholesky([[0, 1], [1, 1]])


def test_is_in_image_examples():
    assert linalg.is_in_image(np.eye(2), 2, 3)
    assert not linalg.is_in_image([[1, 2], [2, 1]], 2, 2)
    assert linalg.is_in_image([[1, 1], [1, 1]], 2, 2)
    with pytest.raises(NotCoregular):
        linalg.is_in_image(np.eye(3), 3, 2)


def test_lift_examples():
    V = linalg.lift([[9, 2], [2, 4]], 3)
    assert V.shape == (2, 3)
    np.testing.assert_allclose(linalg.gram(V), [[9, 2], [2, 4]], atol=1e-14)
    with pytest.raises(NotInImage):
        linalg.lift([[1, 2], [2, 1]], 3)


def test_packing_formats():
    assert [linalg.n_packed(k) for k in range(1, 5)] == [1, 3, 6, 10]
    assert linalg.k_from_packed(10) == 4
    with pytest.raises(DimensionMismatch):
        linalg.k_from_packed(5)
    G = np.array([[1.0, 2, 4], [2, 3, 5], [4, 5, 6]])
    np.testing.assert_array_equal(linalg.pack_lower(G), [1, 2, 3, 4, 5, 6])
    np.testing.assert_array_equal(linalg.unpack_lower([1, 2, 3, 4, 5, 6]), G)
    np.testing.assert_array_equal(linalg.as_gram([1, 2, 3]), [[1, 2], [2, 3]])
    with pytest.raises(DimensionMismatch):
        linalg.as_gram(np.eye(2), k=3)


# --- oracles -----------------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_leading_minors_match_cofactor_determinants(k):
    for seed in range(40):
        G = bounded_pd(1000 * k + seed, k)
        expected = [cofactor_det(G[:l, :l].tolist()) for l in range(k + 1)]
        np.testing.assert_allclose(linalg.leading_minors(G), expected, rtol=1e-12)


def test_leading_minors_fallback_on_boundary():
    # rank 1 leading block, then the full matrix is singular too
    V = np.array([[1.0, 0, 0], [2.0, 0, 0], [0, 1.0, 0]])
    G = V @ V.T
    minors = linalg.leading_minors(G)
    np.testing.assert_allclose(minors, [1, 1, 0, 0], atol=1e-14)
    # indefinite: still the true leading determinants
    np.testing.assert_allclose(linalg.leading_minors([[1, 2], [2, 1]]), [1, 1, -3], rtol=1e-14)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 5), extra=st.integers(0, 3), seed=st.integers(0, 2 ** 32 - 1))
def test_gram_of_configuration_is_in_image(k, extra, seed):
    V = np.random.default_rng(seed).standard_normal((k, k + extra))
    G = linalg.gram(V)
    assert linalg.is_in_image(G, k, k + extra)
    W = linalg.semidefinite_cholesky(G)
    assert np.all(np.triu(W, 1) == 0) and np.all(np.diag(W) >= 0)
    np.testing.assert_allclose(W @ W.T, G, atol=1e-12 * np.max(np.diag(G)))


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 5), rank=st.integers(0, 5), seed=st.integers(0, 2 ** 32 - 1))
def test_lift_reproduces_low_rank(k, rank, seed):
    rank = min(rank, k)
    B = np.random.default_rng(seed).standard_normal((k, rank))
    G = B @ B.T
    V = linalg.lift(G, k + 1)
    assert V.shape == (k, k + 1)
    np.testing.assert_allclose(linalg.gram(V), G, atol=1e-10 * max(1.0, np.max(np.abs(G))))


@settings(max_examples=300, deadline=None)
@given(k=st.integers(1, 4), seed=st.integers(0, 2 ** 32 - 1))
def test_membership_matches_eigenvalues(k, seed):
    A = np.random.default_rng(seed).uniform(-1, 1, (k, k))
    G = np.tril(A) + np.tril(A, -1).T
    lam = np.linalg.eigvalsh(G)[0]
    if abs(lam) > 1e-8:
        assert linalg.is_in_image(G, k, k) == (lam > 0)


def test_gram_batches():
    V = np.random.default_rng(1).standard_normal((7, 2, 3))
    G = linalg.gram(V)
    assert G.shape == (7, 2, 2)
    for n, Vn in enumerate(V):
        np.testing.assert_allclose(G[n], Vn @ Vn.T, rtol=1e-14)


def test_cholesky_scale_invariant_tolerance():
    # same matrix at very different scales: the decision must not change
    for s in (1e-150, 1.0, 1e150):
        assert linalg.is_in_image(s * np.array([[1.0, 1.0], [1.0, 1.0]]), 2, 2)
        assert not linalg.is_in_image(s * np.array([[1.0, 2.0], [2.0, 1.0]]), 2, 2)


def test_cofactor_oracle_sanity():
    for perm_sign in itertools.permutations(range(3)):
        P = np.eye(3)[list(perm_sign)]
        assert abs(abs(cofactor_det(P.tolist())) - 1) < 1e-15
