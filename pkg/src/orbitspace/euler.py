"""Generalized Euler angles for unit vectors and rotations.

A unit vector in R^m is written with m - 1 angles as

    v = sin t1 e1 + cos t1 (sin t2 e2 + cos t2 (... (sin t_{m-1} e_{m-1} + cos t_{m-1} e_m)))

with polar angles ``t1..t_{m-2}`` in [-pi/2, pi/2] and the azimuthal angle
``t_{m-1}`` in (-pi, pi].  The same angles define an orthonormal frame whose
last column is ``v`` (:func:`rotation_from_angles`).  Angles are stored as a
1-d array of length ``m - 1``.
"""

import numpy as np

from .exceptions import DimensionMismatch, NotEulerFrame, NotSpecialOrthogonal, ZeroVector

ZERO_TAIL = 0.0  # only an exactly vanishing tail leaves angles undetermined


def _angles(theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1:
        raise DimensionMismatch("angles must be a 1-d array", shape=theta.shape)
    return theta


def vector_from_angles(theta):
    """Unit vector in R^(len(theta) + 1) with the given Euler angles.

    Any real angles are accepted; the formula does not care about ranges.
    """
    theta = _angles(theta)
    m = theta.size + 1
    s, c = np.sin(theta), np.cos(theta)
    v = np.empty(m)
    prod = 1.0
    for j in range(m - 1):
        v[j] = prod * s[j]
        prod *= c[j]
    v[m - 1] = prod
    return v


def angles_from_unit_vector(v):
    """Canonical Euler angles of ``v / |v|``.

    When the trailing coordinates vanish the remaining angles are not
    determined; they are set to zero.
    """
    v = np.asarray(v, dtype=float).ravel()
    norm = np.linalg.norm(v)
    if norm < 1e-8:
        raise ZeroVector("cannot take angles of a zero vector", norm=norm)
    v = v / norm
    m = v.size
    theta = np.zeros(m - 1)
    # tails[j] = |(v_j, ..., v_m)|, computed from the back to avoid cancellation
    tails = np.sqrt(np.cumsum((v ** 2)[::-1])[::-1])
    for j in range(m - 2):
        if tails[j] <= ZERO_TAIL:
            return theta
        theta[j] = np.arctan2(v[j], tails[j + 1])
    if m >= 2 and tails[m - 2] > ZERO_TAIL:
        theta[m - 2] = np.arctan2(v[m - 2], v[m - 1])
    return theta


def normalize_angles(theta):
    """Map arbitrary angles to the canonical angles of the same unit vector."""
    return angles_from_unit_vector(vector_from_angles(theta))


def rotation_from_angles(theta):
    """The frame matrix whose columns are the Euler frame vectors.

    Column ``j < m`` is ``cos t_j e_j - sin t_j f_{j+1}`` and column ``m`` is
    :func:`vector_from_angles`.  Entries are formed as products of sines and
    cosines, never through tangents, so angles at +-pi/2 are harmless.
    """
    theta = _angles(theta)
    m = theta.size + 1
    # sin/cos padded with the convention t_m = pi/2
    s = np.append(np.sin(theta), 1.0)
    c = np.append(np.cos(theta), 0.0)
    A = np.zeros((m, m))
    for j in range(m - 1):
        A[j, j] = c[j]
        prod = 1.0
        for i in range(j + 1, m):
            A[i, j] = -s[j] * s[i] * prod
            prod *= c[i]
    A[:, m - 1] = vector_from_angles(theta)
    return A


def _check_special_orthogonal(A, tol):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch("expected a square matrix", shape=A.shape)
    m = A.shape[0]
    err = np.max(np.abs(A.T @ A - np.eye(m)))
    if err > tol:
        raise NotSpecialOrthogonal(f"columns not orthonormal (error {err:.3e})", error=err)
    det = np.linalg.det(A)
    if abs(det - 1.0) > tol:
        raise NotSpecialOrthogonal(f"determinant is {det:.6g}, not +1", det=det)
    return A


def angles_from_rotation(A, tol=1e-8):
    """Recover ``theta`` from a frame matrix ``A = rotation_from_angles(theta)``.

    The angles are read off the frame columns from the last one backwards:
    ``cos t_j = A[j, j]`` and ``sin t_j = -<a_j, f_{j+1}>``.  This stays
    accurate when polar cosines are small.

    Raises
    ------
    NotSpecialOrthogonal
        If ``A`` is not orthonormal with determinant +1 to ``tol``.
    NotEulerFrame
        If ``A`` is a rotation but not of the single-frame form (use
        :func:`euler_decomposition` for general rotations).
    """
    A = _check_special_orthogonal(A, tol)
    m = A.shape[0]
    theta = np.zeros(m - 1)
    if m == 1:
        return theta
    theta[m - 2] = np.arctan2(-A[m - 1, m - 2], A[m - 2, m - 2])
    f = np.zeros(m)
    f[m - 1] = 1.0
    for j in range(m - 2, 0, -1):
        # f_{j+1} from f_{j+2} and t_{j+1}, all 0-based here
        t = theta[j]
        f = np.cos(t) * f
        f[j] += np.sin(t)
        s = -A[:, j - 1] @ f
        c = A[j - 1, j - 1]
        theta[j - 1] = np.arctan2(s, max(c, 0.0))
    err = np.max(np.abs(rotation_from_angles(theta) - A))
    if err > tol:
        raise NotEulerFrame(
            f"rotation is not a single Euler frame (residual {err:.3e})", error=err)
    return theta


def euler_decomposition(A, tol=1e-8):
    """Write a rotation as a nested product of Euler frames.

    Returns a list ``[theta_m, theta_{m-1}, ..., theta_2]`` with
    ``len(theta_d) == d - 1`` such that ``A`` equals
    ``F_m @ (F_{m-1} (+) 1) @ (F_{m-2} (+) I_2) ...`` where ``F_d`` is
    ``rotation_from_angles(theta_d)``.  That is m(m-1)/2 angles in total.
    """
    A = _check_special_orthogonal(A, tol)
    out = []
    B = A.copy()
    for d in range(A.shape[0], 1, -1):
        theta = angles_from_unit_vector(B[:, d - 1])
        out.append(theta)
        B = (rotation_from_angles(theta).T @ B)[: d - 1, : d - 1]
    return out


def compose_euler(parts):
    """Inverse of :func:`euler_decomposition`."""
    m = len(parts) + 1
    A = np.eye(m)
    for theta in parts:
        d = len(theta) + 1
        F = np.eye(m)
        F[:d, :d] = rotation_from_angles(theta)
        A = A @ F
    return A
