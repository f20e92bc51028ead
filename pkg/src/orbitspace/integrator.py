"""Three routes to the integral of an invariant function over (R^m)^k.

* ``ambient-mc``: importance sampling directly on R^(km);
* ``domain-w``: integrate over lower-triangular representatives ``W`` with
  weight ``prod_i w_ii^(m-i)``, times the angular volume;
* ``orbit-u``: integrate ``F(u) * lambda_{k,m}(u)`` over the image of the
  inner-product map, either by substituting ``u = W W^T`` (which absorbs the
  k = m singularity of the density) or, for k < m, by sampling ``u`` directly
  from a Wishart proposal.

Agreement of the three routes is the defining property of the density.

Monte Carlo runs are split into fixed-size chunks.  Chunk ``c`` of the
stream for a method draws from a Philox generator keyed by
``(seed, stream, c)``, and chunk statistics are merged in chunk order, so the
result does not depend on the number of worker threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import multigammaln, roots_genlaguerre

from .exceptions import (BoundaryPoint, DimensionMismatch, NotCoregular,
                         QuadratureUnavailable, UnsupportedDecayClass, ValidationError)
from .integrands import COMPACT, GAUSSIAN
from .linalg import DEFAULT_TOL, as_gram, embed_rows, leading_minors, n_packed
from .measure import log_hilbert_density_from_logdet
from .reduction import angular_volume

AMBIENT = "ambient-mc"
DOMAIN_W = "domain-w"
ORBIT_U = "orbit-u"
METHODS = (AMBIENT, DOMAIN_W, ORBIT_U)

QUADRATURE_MAX_DIM = 6
_STREAMS = {AMBIENT: 1, DOMAIN_W: 2, ORBIT_U: 3, "orbit-u-direct": 4}


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    std_error: float
    samples: int
    method: str
    scheme: str = "mc"

    def as_dict(self):
        return {"value": self.value, "std_error": self.std_error, "samples": self.samples,
                "method": self.method, "scheme": self.scheme}


@dataclass(frozen=True)
class MCConfig:
    samples: int = 10 ** 6
    seed: int = 0
    chunk: int = 2 ** 16
    workers: int = 1

    def __post_init__(self):
        if self.samples < 2 or self.chunk < 1 or self.workers < 1:
            raise ValidationError("samples must be >= 2, chunk and workers >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")


def _check_km(k, m):
    if k < 1 or m < 1:
        raise DimensionMismatch("k and m must be positive", k=k, m=m)
    if k > m:
        raise NotCoregular(f"k={k} > m={m}: the representation is not coregular", k=k, m=m)


# -- change of variables w -> u ------------------------------------------------

def _triangular(W, tol):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DimensionMismatch("expected a square lower-triangular factor", shape=W.shape)
    diag = np.diag(W)
    scale = max(float(np.max(np.abs(W))), 1.0) if W.size else 1.0
    if np.any(diag <= tol * scale):
        raise BoundaryPoint("triangular factor has a vanishing diagonal entry",
                            diagonal=diag.tolist())
    return np.tril(W)


def jacobian_w_to_u(W, tol=DEFAULT_TOL):
    """|du/dw| for ``u = W W^T`` with both sides in packed lexicographic order.

    The Jacobian matrix is lower-triangular with diagonal entries
    ``(1 + [i == j]) * w_jj``, so the determinant is
    ``2**k * prod_i prod_{j <= i} w_jj``.
    """
    W = _triangular(W, tol)
    k = W.shape[0]
    diag = np.diag(W)
    out = 2.0 ** k
    for i in range(k):
        out *= np.prod(diag[: i + 1])
    return float(out)


def diag_from_minors(G, tol=DEFAULT_TOL):
    """Diagonal of the triangular factor, ``w_ii = sqrt(|G_i| / |G_{i-1}|)``."""
    G = as_gram(G)
    minors = leading_minors(G, tol)
    ratios = minors[1:] / np.where(minors[:-1] > 0, minors[:-1], np.nan)
    scale = float(np.max(np.abs(np.diag(G)))) if G.size else 1.0
    if not np.all(ratios > tol * scale):
        raise BoundaryPoint("a leading minor vanishes: not an interior point",
                            minors=minors.tolist())
    return np.sqrt(ratios)


def _log_jacobian_batch(W):
    k = W.shape[-1]
    logd = np.log(np.diagonal(W, axis1=-2, axis2=-1))
    # w_jj appears once for every row i >= j
    return k * math.log(2.0) + logd @ np.arange(k, 0, -1, dtype=float)


def _log_det_batch(U):
    L = np.linalg.cholesky(U)
    return 2.0 * np.sum(np.log(np.diagonal(L, axis1=-2, axis2=-1)), axis=-1)


# -- Monte Carlo engine ------------------------------------------------------------

def _chunk_rng(seed, stream, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, index])))


def _run_mc(weights_fn, config, stream):
    """Mean and standard error of ``weights_fn(rng, size)`` over the sample stream."""
    n, chunk = config.samples, config.chunk
    sizes = [chunk] * (n // chunk) + ([n % chunk] if n % chunk else [])

    def one(index):
        w = np.asarray(weights_fn(_chunk_rng(config.seed, stream, index), sizes[index]), float)
        mean = float(np.mean(w))
        return w.size, mean, float(np.sum((w - mean) ** 2))

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            stats = list(pool.map(one, range(len(sizes))))
    else:
        stats = [one(i) for i in range(len(sizes))]
    # pairwise merge (Chan et al.), always in chunk order
    count, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in stats:
        delta = mb - mean
        total = count + nb
        mean += delta * nb / total
        m2 += m2b + delta * delta * count * nb / total
        count = total
    var = m2 / (count - 1)
    return mean, math.sqrt(var / count)


# -- samplers on the triangular domain -----------------------------------------------

def _diag_mask(k):
    rows, cols = np.tril_indices(k)
    return rows == cols


def _to_triangular(x, k):
    rows, cols = np.tril_indices(k)
    W = np.zeros(x.shape[:-1] + (k, k))
    W[..., rows, cols] = x
    return W


def _diag_powers(k, m):
    return np.array([m - i for i in range(1, k + 1)], dtype=float)


def _sample_w(g, k, rng, size):
    """Draw packed triangular factors and return ``(W, log q)``."""
    d = n_packed(k)
    is_diag = _diag_mask(k)
    if g.decay == GAUSSIAN:
        x = rng.standard_normal((size, d)) / math.sqrt(2.0)
        x[:, is_diag] = np.abs(x[:, is_diag])
        # N(0, 1/2) off the diagonal, half-normal with the same scale on it
        logq = -np.sum(x * x, axis=1) - 0.5 * d * math.log(math.pi) + k * math.log(2.0)
    elif g.decay == COMPACT:
        r = g.radius
        x = rng.uniform(-r, r, size=(size, d))
        x[:, is_diag] = np.abs(x[:, is_diag])
        logq = np.full(size, -(d - k) * math.log(2 * r) - k * math.log(r))
    else:
        raise UnsupportedDecayClass(f"decay class {g.decay!r}", integrand=g.name)
    return _to_triangular(x, k), logq


def _w_weight(g, W, m):
    """``f(w) * prod w_ii^(m - i)`` on a batch of factors."""
    k = W.shape[-1]
    diag = np.diagonal(W, axis1=-2, axis2=-1)
    return g.f(embed_rows(W, m)) * np.prod(diag ** _diag_powers(k, m), axis=-1)


def _u_weight(g, W, m):
    """``F(u) * lambda(u) * |du/dw|`` with ``u = W W^T``, on interior factors."""
    k = W.shape[-1]
    U = W @ np.swapaxes(W, -1, -2)
    log_factor = log_hilbert_density_from_logdet(_log_det_batch(U), k, m) \
        + _log_jacobian_batch(W)
    return g.F(U) * np.exp(log_factor)


def _interior(W):
    return np.all(np.diagonal(W, axis1=-2, axis2=-1) > 0, axis=-1)


# -- tensor quadrature ------------------------------------------------------------------

def default_nodes(k):
    d = n_packed(k)
    return {1: 40, 3: 16}.get(d, 8)


def _quadrature_grid(k, m, nodes):
    """Nodes and weights for the weight ``exp(-|w|^2) prod w_ii^(m-i)`` on W.

    Off-diagonal coordinates use Gauss-Hermite.  For a diagonal coordinate
    with power p, ``t = w^2`` turns the weight into ``t^((p-1)/2) e^-t / 2``,
    which is generalized Gauss-Laguerre.
    """
    rows, cols = np.tril_indices(k)
    axes, weights = [], []
    for i, j in zip(rows, cols):
        if i == j:
            t, wt = roots_genlaguerre(nodes, 0.5 * (m - i - 2))
            axes.append(np.sqrt(t))
            weights.append(0.5 * wt)
        else:
            x, wt = np.polynomial.hermite.hermgauss(nodes)
            axes.append(x)
            weights.append(wt)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    wgrid = np.ones(grid.shape[0])
    for ax, wts in enumerate(np.meshgrid(*weights, indexing="ij")):
        wgrid *= wts.ravel()
    return _to_triangular(grid, k), wgrid


def _envelope(W, m):
    """The quadrature weight function evaluated at the nodes."""
    k = W.shape[-1]
    diag = np.diagonal(W, axis1=-2, axis2=-1)
    return np.exp(-np.sum(W * W, axis=(-2, -1))) * np.prod(diag ** _diag_powers(k, m), axis=-1)


def _resolve_scheme(g, k, scheme):
    if scheme == "auto":
        return "quadrature" if g.decay == GAUSSIAN and n_packed(k) <= QUADRATURE_MAX_DIM else "mc"
    if scheme == "quadrature" and g.decay != GAUSSIAN:
        raise QuadratureUnavailable(
            f"quadrature needs a Gaussian-decay integrand, {g.name!r} is {g.decay!r}",
            integrand=g.name)
    if scheme not in ("quadrature", "mc"):
        raise ValidationError(f"unknown scheme {scheme!r}")
    return scheme


# -- the three routes --------------------------------------------------------------------

def integrate_ambient_mc(g, k, m, config=MCConfig()):
    """Importance-sampled integral of ``f`` over R^(km).

    Gaussian-decay integrands use a standard normal proposal per coordinate;
    compact ones a uniform proposal on ``[-radius, radius]^(km)``.
    """
    _check_km(k, m)
    n = k * m
    if g.decay == GAUSSIAN:
        log_norm = 0.5 * n * math.log(2 * math.pi)

        def weights(rng, size):
            V = rng.standard_normal((size, k, m))
            return g.f(V) * np.exp(0.5 * np.sum(V * V, axis=(-2, -1)) + log_norm)
    elif g.decay == COMPACT:
        r = g.radius
        volume = (2.0 * r) ** n

        def weights(rng, size):
            return g.f(rng.uniform(-r, r, size=(size, k, m))) * volume
    else:
        raise UnsupportedDecayClass(f"decay class {g.decay!r}", integrand=g.name)
    mean, se = _run_mc(weights, config, _STREAMS[AMBIENT])
    return IntegralEstimate(mean, se, config.samples, AMBIENT, "mc")


def integrate_domain_w(g, k, m, scheme="auto", nodes=None, config=MCConfig()):
    """Angular volume times the integral of ``f(w) prod w_ii^(m-i)`` over W.

    ``scheme`` is ``"quadrature"`` (tensor Gauss-Hermite / generalized
    Gauss-Laguerre, Gaussian-decay only), ``"mc"``, or ``"auto"``, which picks
    quadrature up to ``k(k+1)/2 = 6`` coordinates.
    """
    _check_km(k, m)
    scheme = _resolve_scheme(g, k, scheme)
    omega = angular_volume(k, m)
    if scheme == "quadrature":
        nodes = nodes or default_nodes(k)
        W, wq = _quadrature_grid(k, m, nodes)
        value = omega * float(np.sum(wq * _w_weight(g, W, m) / _envelope(W, m)))
        return IntegralEstimate(value, 0.0, wq.size, DOMAIN_W, "quadrature")

    def weights(rng, size):
        W, logq = _sample_w(g, k, rng, size)
        return _w_weight(g, W, m) * np.exp(-logq)

    mean, se = _run_mc(weights, config, _STREAMS[DOMAIN_W])
    return IntegralEstimate(omega * mean, omega * se, config.samples, DOMAIN_W, "mc")


def wishart_logpdf(U, df, scale):
    """Log-density of Wishart(df, scale) w.r.t. Lebesgue measure on the packed entries."""
    k = scale.shape[0]
    _, logdet_scale = np.linalg.slogdet(scale)
    inv = np.linalg.inv(scale)
    logdet = _log_det_batch(U)
    tr = np.einsum("ij,...ji->...", inv, U)
    return (0.5 * (df - k - 1) * logdet - 0.5 * tr - 0.5 * df * k * math.log(2.0)
            - 0.5 * df * logdet_scale - multigammaln(0.5 * df, k))


def wishart_sample(rng, size, df, scale):
    """Bartlett construction of ``size`` Wishart(df, scale) matrices."""
    k = scale.shape[0]
    L = np.linalg.cholesky(scale)
    A = np.zeros((size, k, k))
    rows, cols = np.tril_indices(k, -1)
    A[:, rows, cols] = rng.standard_normal((size, rows.size))
    idx = np.arange(k)
    A[:, idx, idx] = np.sqrt(rng.chisquare(df - idx, size=(size, k)))
    LA = L @ A
    return LA @ np.swapaxes(LA, -1, -2)


def _direct_weights(g, k, m):
    if g.decay == GAUSSIAN:
        # matches exp(-tr G) |G|^((m-k-1)/2) up to the integrand's extra factor
        df, scale = float(m), 0.5 * np.eye(k)

        def weights(rng, size):
            U = wishart_sample(rng, size, df, scale)
            log_ratio = log_hilbert_density_from_logdet(_log_det_batch(U), k, m) \
                - wishart_logpdf(U, df, scale)
            return g.F(U) * np.exp(log_ratio)
        return weights
    if g.decay == COMPACT:
        r2 = g.radius ** 2
        d = n_packed(k)
        log_volume = k * math.log(r2) + (d - k) * math.log(2 * r2)
        is_diag = _diag_mask(k)

        def weights(rng, size):
            x = rng.uniform(-r2, r2, size=(size, d))
            x[:, is_diag] = np.abs(x[:, is_diag])
            U = _to_triangular(x, k)
            U = U + np.tril(U, -1).swapaxes(-1, -2)
            inside = np.linalg.eigvalsh(U)[:, 0] > 0
            out = np.zeros(size)
            Ui = U[inside]
            logd = log_hilbert_density_from_logdet(_log_det_batch(Ui), k, m)
            out[inside] = g.F(Ui) * np.exp(logd + log_volume)
            return out
        return weights
    raise UnsupportedDecayClass(f"decay class {g.decay!r}", integrand=g.name)


def integrate_orbit_u(g, k, m, scheme="auto", nodes=None, config=MCConfig()):
    """Integral of ``F(u) * lambda_{k,m}(u)`` over the image of the inner-product map.

    ``scheme``:

    * ``"quadrature"`` / ``"mc"`` / ``"auto"``: substitute ``u = W W^T`` and
      integrate ``F * lambda * |du/dw|`` over W with the same nodes or
      proposals as :func:`integrate_domain_w`;
    * ``"direct"``: sample ``u`` from a Wishart proposal (Gaussian decay) or a
      box on the packed entries with rejection of non-PSD points (compact),
      weighting by ``F * lambda / q``.  For k = m the density is singular on
      the boundary and the substitution route is used instead.
    """
    _check_km(k, m)
    if scheme == "direct" and k < m:
        mean, se = _run_mc(_direct_weights(g, k, m), config, _STREAMS["orbit-u-direct"])
        return IntegralEstimate(mean, se, config.samples, ORBIT_U, "direct")
    if scheme == "direct":
        scheme = "auto"
    scheme = _resolve_scheme(g, k, scheme)
    if scheme == "quadrature":
        nodes = nodes or default_nodes(k)
        W, wq = _quadrature_grid(k, m, nodes)
        value = float(np.sum(wq * _u_weight(g, W, m) / _envelope(W, m)))
        return IntegralEstimate(value, 0.0, wq.size, ORBIT_U, "quadrature")

    def weights(rng, size):
        W, logq = _sample_w(g, k, rng, size)
        out = np.zeros(size)
        ok = _interior(W)
        out[ok] = _u_weight(g, W[ok], m) * np.exp(-logq[ok])
        return out

    mean, se = _run_mc(weights, config, _STREAMS[ORBIT_U])
    return IntegralEstimate(mean, se, config.samples, ORBIT_U, "mc")


def integrate(g, k, m, method, scheme="auto", nodes=None, config=MCConfig()):
    if method == AMBIENT:
        return integrate_ambient_mc(g, k, m, config)
    if method == DOMAIN_W:
        return integrate_domain_w(g, k, m, scheme, nodes, config)
    if method == ORBIT_U:
        return integrate_orbit_u(g, k, m, scheme, nodes, config)
    raise ValidationError(f"unknown method {method!r}; choose from {METHODS}")


# -- cross-validation ----------------------------------------------------------------------

@dataclass
class ConsistencyReport:
    integrand: str
    k: int
    m: int
    estimates: list
    exact: float = None
    z_max: dict = field(default_factory=dict)
    threshold: float = 4.0

    @property
    def passed(self):
        return all(z < self.threshold for z in self.z_max.values())

    def rows(self):
        out = []
        if self.exact is not None:
            out.append({"integrand": self.integrand, "k": self.k, "m": self.m,
                        "method": "exact", "value": self.exact, "std_error": 0.0,
                        "z_max": 0.0, "pass": True})
        for est in self.estimates:
            label = f"{est.method}/{est.scheme}"
            z = self.z_max[label]
            out.append({"integrand": self.integrand, "k": self.k, "m": self.m,
                        "method": label, "value": est.value, "std_error": est.std_error,
                        "z_max": z, "pass": z < self.threshold})
        return out


def discrepancy(a, sa, b, sb, rtol, threshold=4.0):
    """Normalized difference of two estimates.

    Monte Carlo pairs give the usual z-score.  A floor of
    ``rtol * max(|a|, |b|) / threshold`` on the combined error means a
    deterministic pair scores ``threshold * relative_error / rtol``, so one
    cutoff serves both kinds of comparison.
    """
    floor = rtol * max(abs(a), abs(b)) / threshold
    return abs(a - b) / math.sqrt(sa * sa + sb * sb + floor * floor + 1e-300)


def compare_methods(g, k, m, config=MCConfig(), nodes=None, rtol=1e-6, threshold=4.0):
    """Run every applicable route on ``g`` and score their mutual agreement.

    The report holds, per estimate, the largest :func:`discrepancy` against
    every other estimate and against the exact value when one is known.  A
    pair fails when that exceeds ``threshold`` (4 combined standard errors,
    or relative error ``rtol`` for deterministic pairs).
    """
    _check_km(k, m)
    estimates = [
        integrate_ambient_mc(g, k, m, config),
        integrate_domain_w(g, k, m, "auto", nodes, config),
        integrate_orbit_u(g, k, m, "auto", nodes, config),
    ]
    if k < m:
        estimates.append(integrate_orbit_u(g, k, m, "direct", nodes, config))
    exact = g.exact_value(k, m)
    report = ConsistencyReport(g.name, k, m, estimates, exact, threshold=threshold)
    for est in estimates:
        zs = [discrepancy(est.value, est.std_error, other.value, other.std_error, rtol, threshold)
              for other in estimates if other is not est]
        if exact is not None:
            zs.append(discrepancy(est.value, est.std_error, exact, 0.0, rtol, threshold))
        report.z_max[f"{est.method}/{est.scheme}"] = max(zs)
    return report
