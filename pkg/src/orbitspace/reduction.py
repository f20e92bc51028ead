"""Reduction of a configuration to the fundamental domain by plane rotations.

The rotations target the vectors one at a time.  For vector ``i`` (1-based)
the planes ``(m-1, m), (m-2, m-1), ..., (i, i+1)`` are rotated in turn, each
rotation zeroing the higher coordinate of the pair and leaving the lower one
nonnegative.  Rotation ``p`` of vector ``i`` has angle ``theta[(i, p)]``, with
``theta[(i, 1)]`` in (-pi, pi] and ``theta[(i, p)]`` in (0, pi) for p > 1.
When ``k == m`` the last vector admits no rotation and a reflection of the
last coordinate makes its final coordinate nonnegative.

Plane indices and schedule keys are 1-based, matching the usual notation.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionMismatch, NotCoregular
from .linalg import as_vectors
from .measure import sphere_volume

TINY_PAIR = 1e-13


def plane_rotation(m, j, angle):
    """Rotation by ``angle`` in the plane of coordinates ``j`` and ``j + 1``."""
    if not 1 <= j <= m - 1:
        raise DimensionMismatch(f"plane index {j} outside 1..{m - 1}", m=m, j=j)
    R = np.eye(m)
    c, s = np.cos(angle), np.sin(angle)
    R[j - 1, j - 1] = c
    R[j - 1, j] = -s
    R[j, j - 1] = s
    R[j, j] = c
    return R


def schedule_keys(k, m):
    """The ``(i, p)`` keys of a schedule, in application order."""
    return [(i, p) for i in range(1, min(k, m - 1) + 1) for p in range(1, m - i + 1)]


@dataclass
class AngleSchedule:
    k: int
    m: int
    theta: dict = field(default_factory=dict)
    reflection: bool = False

    def __post_init__(self):
        expected = schedule_keys(self.k, self.m)
        if sorted(self.theta) != sorted(expected):
            raise DimensionMismatch(
                f"schedule for k={self.k}, m={self.m} needs {len(expected)} angles",
                k=self.k, m=self.m, got=len(self.theta))

    @property
    def n_angles(self):
        return len(self.theta)

    def as_array(self):
        return np.array([self.theta[key] for key in schedule_keys(self.k, self.m)])


class Reduction(NamedTuple):
    W: np.ndarray
    schedule: AngleSchedule
    R: np.ndarray


def reduce(V, tol=TINY_PAIR):
    """Rotate ``V`` into the fundamental domain.

    Returns ``(W, schedule, R)`` where ``W`` is the ``(k, k)`` lower-triangular
    representative with nonnegative diagonal and ``R`` is the accumulated
    orthogonal matrix with ``V = embed_rows(W, m) @ R.T`` (``R w_i = v_i``).

    A coordinate pair whose entries are both below ``tol`` times the largest
    entry of ``V`` is treated as zero: its angle is 0 and the pair is cleared.
    This makes the procedure total on rank-deficient input, where the
    vanished pivots give ``w[i, i] = 0``.
    """
    V = as_vectors(V)
    k, m = V.shape
    if k > m:
        raise DimensionMismatch(f"k={k} > m={m}: no triangular representative", k=k, m=m)
    X = V.copy()
    R = np.eye(m)
    tiny = tol * float(np.max(np.abs(V)))
    theta = {}
    for i, p in schedule_keys(k, m):
        j = m - p  # 1-based plane (j, j + 1); zero coordinate j + 1 of vector i
        a, b = X[i - 1, j - 1], X[i - 1, j]
        if abs(a) <= tiny and abs(b) <= tiny:
            angle = 0.0
            X[i - 1, j - 1] = X[i - 1, j] = 0.0
        else:
            angle = float(np.arctan2(b, a))
        theta[(i, p)] = angle
        c, s = np.cos(angle), np.sin(angle)
        # X <- R_{-angle} X on the pair, R <- R R_angle on the same columns
        xa, xb = X[:, j - 1].copy(), X[:, j].copy()
        X[:, j - 1] = c * xa + s * xb
        X[:, j] = -s * xa + c * xb
        ra, rb = R[:, j - 1].copy(), R[:, j].copy()
        R[:, j - 1] = c * ra + s * rb
        R[:, j] = -s * ra + c * rb
        X[i - 1, j] = 0.0
    reflection = False
    if k == m:
        if abs(X[k - 1, k - 1]) <= tiny:
            X[k - 1, k - 1] = 0.0
        elif X[k - 1, k - 1] < 0:
            X[:, k - 1] *= -1.0
            R[:, k - 1] *= -1.0
            reflection = True
    W = np.tril(X[:, :k])
    return Reduction(W, AngleSchedule(k, m, theta, reflection), R)


def angular_weight(schedule):
    """Angular part of the volume element of the reduction.

    The product of ``sin(theta[(i, p)]) ** (p - 1)`` over the schedule, times
    2 when ``k == m`` to account for the reflection.
    """
    w = 2.0 if schedule.k == schedule.m else 1.0
    for (i, p), angle in schedule.theta.items():
        if p > 1:
            w *= np.sin(angle) ** (p - 1)
    return float(w)


def angle_ranges(k, m):
    """Integration ranges for each schedule angle, in schedule order."""
    return [(-np.pi, np.pi) if p == 1 else (0.0, np.pi) for _, p in schedule_keys(k, m)]


def angular_volume(k, m):
    """Integral of :func:`angular_weight` over the angle ranges.

    Equal to the product of Vol(S^(m-i)) for i = 1..k; the i = m factor is
    Vol(S^0) = 2, the reflection.
    """
    if k > m:
        raise NotCoregular(f"k={k} > m={m}", k=k, m=m)
    if k < 1:
        raise DimensionMismatch("k must be positive", k=k)
    out = 1.0
    for i in range(1, k + 1):
        out *= sphere_volume(m - i)
    return out
