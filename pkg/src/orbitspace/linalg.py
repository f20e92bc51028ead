"""Small dense kernels on configurations and their Gram matrices.

Conventions used throughout the package:

* a configuration of ``k`` vectors in R^m is a ``(k, m)`` array whose rows are
  the vectors;
* a Gram matrix is a symmetric ``(k, k)`` array.  Its packed form lists the
  lower triangle row by row, ``u11, u21, u22, u31, ...``;
* a triangular factor is a ``(k, k)`` lower-triangular array with a
  nonnegative diagonal; :func:`embed_rows` pads it with zero columns to a
  ``(k, m)`` configuration.
"""

import numpy as np

from .exceptions import DimensionMismatch, NotCoregular, NotInImage, NotPositiveSemidefinite

DEFAULT_TOL = 1e-12


def n_packed(k):
    """Number of independent entries of a symmetric k x k matrix."""
    return k * (k + 1) // 2


def k_from_packed(n):
    k = int(round((np.sqrt(8 * n + 1) - 1) / 2))
    if n_packed(k) != n:
        raise DimensionMismatch(f"{n} is not a triangular number", length=n)
    return k


def pack_lower(G):
    G = np.asarray(G, dtype=float)
    k = G.shape[-1]
    rows, cols = np.tril_indices(k)
    return G[..., rows, cols]


def unpack_lower(packed):
    packed = np.asarray(packed, dtype=float)
    k = k_from_packed(packed.shape[-1])
    rows, cols = np.tril_indices(k)
    G = np.zeros(packed.shape[:-1] + (k, k))
    G[..., rows, cols] = packed
    G[..., cols, rows] = packed
    return G


def as_vectors(V):
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[None, :]
    if V.ndim != 2 or V.shape[0] < 1 or V.shape[1] < 1:
        raise DimensionMismatch("expected a (k, m) array of vectors", shape=V.shape)
    if not np.all(np.isfinite(V)):
        raise DimensionMismatch("configuration has non-finite entries")
    return V


def as_gram(G, k=None):
    """Coerce a full or packed Gram matrix to a symmetric (k, k) array.

    Only the lower triangle of a full matrix is read.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim == 0:
        G = G.reshape(1, 1)
    elif G.ndim == 1:
        G = unpack_lower(G)
    elif G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatch("expected a square matrix", shape=G.shape)
    else:
        G = np.tril(G) + np.tril(G, -1).T
    if k is not None and G.shape[0] != k:
        raise DimensionMismatch(f"Gram matrix is {G.shape[0]}x{G.shape[0]}, expected k={k}",
                                k=k, shape=G.shape)
    if not np.all(np.isfinite(G)):
        raise DimensionMismatch("Gram matrix has non-finite entries")
    return G


def gram(V):
    """Matrix of mutual inner products of the rows of ``V``.

    Works on a single ``(k, m)`` configuration or a batch ``(..., k, m)``.
    """
    V = np.asarray(V, dtype=float)
    return V @ np.swapaxes(V, -1, -2)


def embed_rows(W, m):
    """Zero-pad a ``(k, j)`` array of rows to ``(k, m)``."""
    W = np.asarray(W, dtype=float)
    k, j = W.shape[-2:]
    if j > m:
        raise DimensionMismatch(f"cannot embed {j} columns into R^{m}", m=m)
    out = np.zeros(W.shape[:-1] + (m,))
    out[..., :j] = W
    return out


def _scale(G):
    d = np.diag(G)
    return float(np.max(np.abs(d))) if d.size else 0.0


def _cholesky(G, tol, strict):
    """Unpivoted outer-product Cholesky with clamping of vanishing pivots.

    Returns ``(W, pivots, ok)``.  ``pivots[j]`` is the Schur-complement
    diagonal before the square root (so ``|G_l| = prod(pivots[:l])``).  With
    ``strict=False`` the factorization stops at the first negative pivot and
    reports ``ok=False`` instead of raising.
    """
    k = G.shape[0]
    scale = _scale(G)
    thr = tol * scale
    # |residual| <= sqrt(pivot * diag) for a PSD matrix (Cauchy-Schwarz)
    col_thr = np.sqrt(thr * scale) + 64 * np.finfo(float).eps * scale
    W = np.zeros((k, k))
    pivots = np.zeros(k)
    for j in range(k):
        d = G[j, j] - W[j, :j] @ W[j, :j]
        pivots[j] = d
        if d < -thr:
            if strict:
                raise NotPositiveSemidefinite(
                    f"pivot {j + 1} is {d:.3e}, below -tol*scale", index=j + 1, pivot=d)
            return W, pivots, False
        r = G[j + 1:, j] - W[j + 1:, :j] @ W[j, :j]
        if d <= thr:
            pivots[j] = 0.0
            if np.any(np.abs(r) > col_thr):
                if strict:
                    raise NotPositiveSemidefinite(
                        f"pivot {j + 1} vanishes but its column does not", index=j + 1)
                return W, pivots, False
            continue
        W[j, j] = np.sqrt(d)
        W[j + 1:, j] = r / W[j, j]
    return W, pivots, True


def semidefinite_cholesky(G, tol=DEFAULT_TOL):
    """Lower-triangular ``W`` with nonnegative diagonal and ``W @ W.T == G``.

    Pivots within ``tol * max(diag G)`` of zero are clamped to zero and the
    rest of their column is set to zero, so rank-deficient (boundary) Gram
    matrices factor too.

    Raises
    ------
    NotPositiveSemidefinite
        If a pivot is below ``-tol * max(diag G)``, or a vanishing pivot has a
        non-vanishing column.
    """
    G = as_gram(G)
    W, _, _ = _cholesky(G, tol, strict=True)
    return W


def leading_minors(G, tol=DEFAULT_TOL):
    """Determinants ``(|G_0|, |G_1|, ..., |G_k|)`` of the upper-left blocks.

    ``|G_0| = 1``.  The minors are running products of the Cholesky pivots.
    Once a pivot vanishes (or turns negative for an indefinite input) the
    remaining minors are evaluated directly and values within
    ``tol * scale**l`` of zero are reported as exactly zero.
    """
    G = as_gram(G)
    k = G.shape[0]
    W, pivots, ok = _cholesky(G, tol, strict=False)
    minors = np.ones(k + 1)
    minors[1:] = np.cumprod(pivots)
    bad = np.flatnonzero(pivots <= 0.0)
    if ok and bad.size == 0:
        return minors
    start = int(bad[0]) + 1 if bad.size else 1
    scale = _scale(G)
    for ell in range(start, k + 1):
        det = float(np.linalg.det(G[:ell, :ell]))
        minors[ell] = 0.0 if abs(det) <= tol * scale ** ell else det
    return minors


def is_in_image(G, k, m, tol=DEFAULT_TOL):
    """Whether ``G`` is the Gram matrix of some k vectors in R^m.

    For ``k <= m`` this holds exactly when ``G`` is positive semidefinite.
    """
    if k > m:
        raise NotCoregular(f"k={k} > m={m}: image test only defined for k <= m", k=k, m=m)
    G = as_gram(G, k)
    try:
        _cholesky(G, tol, strict=True)
    except NotPositiveSemidefinite:
        return False
    return True


def lift(G, m, tol=DEFAULT_TOL):
    """A configuration in R^m whose Gram matrix is ``G``.

    The rows are the rows of the semidefinite Cholesky factor, padded with
    zeros, so the result lies in the closed fundamental domain.
    """
    G = as_gram(G)
    k = G.shape[0]
    if k > m:
        raise NotCoregular(f"k={k} > m={m}", k=k, m=m)
    try:
        W = semidefinite_cholesky(G, tol)
    except NotPositiveSemidefinite as exc:
        raise NotInImage(f"not a Gram matrix: {exc}", **exc.context) from exc
    return embed_rows(W, m)
