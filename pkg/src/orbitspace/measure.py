"""Volume constants and the density of the pushforward measure on the orbit space.

For k <= m the Lebesgue measure on (R^m)^k pushed forward by the map to
inner products has density

    lambda_{k,m}(u) = 2**-k * Vol(O_m / O_{m-k}) * |G_k| ** ((m - k - 1) / 2)

with respect to Lebesgue measure on the packed lower triangle ``u``.  It is
constant for k = m - 1, vanishes on the boundary of the image for k < m - 1
and blows up there for k = m.  The same density serves SO_m-invariant
integrands when k <= m - 1, since SO_m and O_m orbits then coincide.
"""

import contextlib
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, NotCoregular, NotInImage, NotPositiveSemidefinite
from .linalg import DEFAULT_TOL, _scale, as_gram, semidefinite_cholesky

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)

# Negative control for the verification suite: when set, the 2**-k factor of
# the density is replaced by 2**k.
_fault = {"flip_power_of_two": False}


@contextlib.contextmanager
def injected_fault():
    _fault["flip_power_of_two"] = True
    try:
        yield
    finally:
        _fault["flip_power_of_two"] = False


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma is only defined for x > 0, got {x!r}")
    return math.lgamma(x)


def log_sphere_volume(n):
    """log Vol(S^n), the n-dimensional unit sphere in R^(n+1)."""
    if n < 0 or int(n) != n:
        raise ValueError(f"sphere dimension must be a nonnegative integer, got {n!r}")
    return LOG_2 + 0.5 * (n + 1) * LOG_PI - log_gamma(0.5 * (n + 1))


def sphere_volume(n):
    """Surface volume of the unit n-sphere; ``sphere_volume(0) == 2``."""
    if 0 <= n < 300 and int(n) == n:
        return 2.0 * math.pi ** (0.5 * (n + 1)) / math.gamma(0.5 * (n + 1))
    return math.exp(log_sphere_volume(n))


def log_orthogonal_group_volume(m):
    if m < 1:
        raise ValueError(f"m must be positive, got {m!r}")
    return (m * LOG_2 + 0.25 * m * (m + 1) * LOG_PI
            - sum(log_gamma(0.5 * j) for j in range(1, m + 1)))


def orthogonal_group_volume(m):
    """Vol(O_m) = 2**m * sqrt(pi)**(m(m+1)/2) / prod_{j=1}^m Gamma(j/2).

    This equals the product of Vol(S^j) for j = 0..m-1.
    """
    return math.exp(log_orthogonal_group_volume(m))


def _check_coregular(k, m):
    if k < 1 or m < 1:
        raise DimensionMismatch("k and m must be positive", k=k, m=m)
    if k > m:
        raise NotCoregular(f"k={k} > m={m}: the representation is not coregular", k=k, m=m)


def log_stiefel_volume(m, k):
    _check_coregular(k, m)
    return sum(log_sphere_volume(m - j) for j in range(1, k + 1))


def stiefel_volume(m, k):
    """Volume of the space of orthonormal k-frames in R^m."""
    return math.exp(log_stiefel_volume(m, k))


def log_density_constant(k, m):
    """log of ``2**-k * Vol(O_m / O_{m-k})``."""
    sign = 1.0 if _fault["flip_power_of_two"] else -1.0
    return sign * k * LOG_2 + log_stiefel_volume(m, k)


def density_exponent(k, m):
    return 0.5 * (m - k - 1)


@dataclass(frozen=True)
class DensityValue:
    value: float
    log_value: float
    singular: bool = False


def hilbert_density(G, k, m, tol=DEFAULT_TOL):
    """Density of the pushed-forward Lebesgue measure at the Gram matrix ``G``.

    ``G`` may be a full symmetric matrix or its packed lower triangle.  The
    computation is done in log space.  On the boundary of the image
    (``|G_k| <= tol * scale**k``) the value is the continuous extension for
    k < m and is flagged singular (``+inf``) for k = m.

    Raises
    ------
    NotCoregular
        If k > m.
    NotInImage
        If ``G`` is not positive semidefinite to ``tol``.
    """
    _check_coregular(k, m)
    G = as_gram(G, k)
    try:
        W = semidefinite_cholesky(G, tol)
    except NotPositiveSemidefinite as exc:
        raise NotInImage(f"Gram matrix is not positive semidefinite: {exc}") from exc
    const = log_density_constant(k, m)
    expo = density_exponent(k, m)
    # |G_k| is the product of squared pivots, i.e. the last leading minor
    pivots = np.diag(W)
    logdet = 2.0 * float(np.sum(np.log(pivots))) if np.all(pivots > 0) else -math.inf
    if logdet == -math.inf or logdet <= math.log(tol) + k * math.log(_scale(G)):
        if expo < 0:
            return DensityValue(math.inf, math.inf, singular=True)
        if expo > 0:
            return DensityValue(0.0, -math.inf)
        return DensityValue(math.exp(const), const)
    log_value = const + expo * logdet
    return DensityValue(_exp(log_value), log_value)


def _exp(x):
    return math.exp(x) if x < 709.0 else math.inf


def log_hilbert_density_from_logdet(logdet, k, m):
    """Vectorized log-density from ``log |G_k|`` (interior points only)."""
    return log_density_constant(k, m) + density_exponent(k, m) * np.asarray(logdet)
