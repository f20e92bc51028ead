"""Verification battery run by ``orbitspace verify`` and the acceptance tests.

Each check returns a list of rows with the columns of :data:`COLUMNS`; a
check passes when all of its rows pass.  The checks compare the library
against independent oracles: closed forms, cofactor and eigenvalue
computations, finite differences, tensor quadrature and the recursive
frame construction.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import special_ortho_group

from . import euler, linalg, measure, reduction
from .exceptions import NotPositiveSemidefinite
from .integrands import get_integrand
from .integrator import MCConfig, compare_methods, diag_from_minors, jacobian_w_to_u
from .measure import injected_fault

COLUMNS = ("check", "integrand", "k", "m", "method", "value", "std_error", "z_max", "pass")

Z_THRESHOLD = 4.0
QUADRATURE_RTOL = 1e-8


@dataclass
class CheckResult:
    name: str
    rows: list

    @property
    def passed(self):
        return all(row["pass"] for row in self.rows)

    def summary(self):
        worst = max((row["value"] for row in self.rows
                     if row["method"] == "" and row["value"] is not None), default=None)
        status = "PASS" if self.passed else "FAIL"
        extra = f" (max error {worst:.3e})" if worst is not None else ""
        return f"[{status}] {self.name}: {len(self.rows)} rows{extra}"


def _row(check, error, tol, k="", m="", label=""):
    return {"check": check, "integrand": label, "k": k, "m": m, "method": "",
            "value": float(error), "std_error": None, "z_max": None,
            "pass": bool(error <= tol)}


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def random_psd(rng, k, extra=2):
    """Gram matrix of k Gaussian vectors in R^(k + extra)."""
    V = rng.standard_normal((k, k + extra))
    return V @ V.T


def random_pd_bounded(rng, k, low=0.1, high=10.0):
    """Positive definite matrix with eigenvalues drawn from [low, high]."""
    eig = rng.uniform(low, high, k)
    Q = special_ortho_group.rvs(k, random_state=rng) if k > 1 else np.eye(1)
    return (Q * eig) @ Q.T, eig


def _km_pairs(max_m):
    return [(k, m) for m in range(1, max_m + 1) for k in range(1, m + 1)]


# 1 -------------------------------------------------------------------------------------
def check_worked_densities(seed=0, **_):
    name = "worked-example densities"
    rng = np.random.default_rng(seed)
    rows = []
    err = 0.0
    for n in range(100):
        # include boundary (rank-1) points: the density is constant on all of the image
        V = rng.standard_normal((2, 3)) if n % 10 else np.outer([1.0, -2.0], rng.standard_normal(3))
        err = max(err, _rel(measure.hilbert_density(V @ V.T, 2, 3).value, 2 * math.pi ** 2))
    rows.append(_row(name, err, 1e-12, 2, 3, "lambda_23 = 2 pi^2"))
    err = 0.0
    for _ in range(100):
        # bounded spectrum: relative error of det G is ~cond(G) * eps
        G, eig = random_pd_bounded(rng, 2)
        det = eig[0] * eig[1]
        err = max(err, _rel(measure.hilbert_density(G, 2, 2).value, math.pi / math.sqrt(det)))
    rows.append(_row(name, err, 1e-12, 2, 2, "lambda_22 = pi / sqrt(det G)"))
    err = max(_rel(measure.hilbert_density([[u]], 1, 3).value, 2 * math.pi * math.sqrt(u))
              for u in (0.25, 1.0, 4.0))
    rows.append(_row(name, err, 1e-12, 1, 3, "lambda_13 = 2 pi sqrt(u)"))
    return CheckResult(name, rows)


# 2 -------------------------------------------------------------------------------------
def check_volume_identities(**_):
    name = "volume identities"
    rows = []
    for m in range(1, 11):
        closed = 2.0 ** m * math.sqrt(math.pi) ** (m * (m + 1) / 2) \
            / math.prod(math.gamma(j / 2) for j in range(1, m + 1))
        spheres = math.prod(2 * math.pi ** ((j + 1) / 2) / math.gamma((j + 1) / 2)
                            for j in range(m))
        vol = measure.orthogonal_group_volume(m)
        err = max(_rel(vol, closed), _rel(vol, spheres),
                  _rel(measure.stiefel_volume(m, m), vol))
        rows.append(_row(name, err, 1e-12, "", m, "Vol(O_m)"))
    spots = {1: 2.0, 2: 4 * math.pi, 3: 16 * math.pi ** 2}
    err = max(_rel(measure.orthogonal_group_volume(m), v) for m, v in spots.items())
    rows.append(_row(name, err, 1e-12, "", "1-3", "spot values"))
    return CheckResult(name, rows)


# 3 -------------------------------------------------------------------------------------
def tensor_quadrature_angular(k, m, nodes=20):
    """Gauss-Legendre tensor quadrature of the angular weight over its ranges."""
    keys = reduction.schedule_keys(k, m)
    ranges = reduction.angle_ranges(k, m)
    x, w = np.polynomial.legendre.leggauss(nodes)
    axes = [(0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w) for a, b in ranges]
    total = 0.0
    for combo in itertools.product(range(nodes), repeat=len(keys)):
        theta = {key: axes[a][0][i] for a, (key, i) in enumerate(zip(keys, combo))}
        weight = math.prod(axes[a][1][i] for a, i in enumerate(combo))
        total += weight * reduction.angular_weight(reduction.AngleSchedule(k, m, theta))
    return total


def check_angular_volume(**_):
    name = "angular volume"
    rows = [
        _row(name, _rel(reduction.angular_volume(2, 3), 8 * math.pi ** 2), 1e-12, 2, 3, "= 8 pi^2"),
        _row(name, _rel(reduction.angular_volume(2, 2), 4 * math.pi), 1e-12, 2, 2, "= 4 pi"),
    ]
    for k, m in [(1, 2), (1, 3), (2, 2), (2, 3), (1, 4), (3, 3)]:
        quad = tensor_quadrature_angular(k, m)
        rows.append(_row(name, _rel(quad, reduction.angular_volume(k, m)), 1e-8, k, m,
                         "tensor quadrature"))
    return CheckResult(name, rows)


# 4 -------------------------------------------------------------------------------------
def check_gaussian_consistency(samples=10 ** 6, seed=0, workers=1, **_):
    name = "gaussian consistency"
    g = get_integrand("gaussian")
    config = MCConfig(samples=samples, seed=seed, workers=workers)
    rows = []
    for k, m in _km_pairs(4):
        exact = g.exact_value(k, m)
        report = compare_methods(g, k, m, config, rtol=1e-6, threshold=Z_THRESHOLD)
        for row in report.rows():
            row = dict(row, check=name)
            if row["method"].endswith("/quadrature"):
                rel = abs(row["value"] - exact) / exact
                row["pass"] = bool(row["pass"] and rel <= QUADRATURE_RTOL)
            rows.append(row)
    return CheckResult(name, rows)


# 5 -------------------------------------------------------------------------------------
def finite_difference_jacobian(W, h=1e-4):
    """Central-difference Jacobian of packed ``u = W W^T`` w.r.t. packed ``W``."""
    k = W.shape[0]
    x0 = linalg.pack_lower(W)
    rows, cols = np.tril_indices(k)

    def u_of(x):
        T = np.zeros((k, k))
        T[rows, cols] = x
        return linalg.pack_lower(T @ T.T)

    J = np.empty((x0.size, x0.size))
    for c in range(x0.size):
        step = np.zeros_like(x0)
        step[c] = h
        J[:, c] = (u_of(x0 + step) - u_of(x0 - step)) / (2 * h)
    return J


def random_interior_factor(rng, k):
    W = np.tril(rng.uniform(-1.0, 1.0, (k, k)), -1)
    W[np.diag_indices(k)] = rng.uniform(0.5, 2.0, k)
    return W


def check_minor_and_jacobian_oracles(seed=0, **_):
    name = "minor and jacobian oracles"
    rng = np.random.default_rng(seed + 5)
    rows = []
    for k in range(1, 6):
        err = 0.0
        for _ in range(200):
            G, _ = random_pd_bounded(rng, k)
            chol = np.diag(np.linalg.cholesky(G))
            err = max(err, _rel(diag_from_minors(G), chol))
        rows.append(_row(name, err, 1e-12, k, "", "diag_from_minors vs Cholesky"))
    err = 0.0
    for n in range(100):
        k = 1 + n % 5
        W = random_interior_factor(rng, k)
        fd = abs(np.linalg.det(finite_difference_jacobian(W)))
        err = max(err, _rel(jacobian_w_to_u(W), fd))
    rows.append(_row(name, err, 1e-6, "1-5", "", "jacobian vs finite differences"))
    return CheckResult(name, rows)


# 6 -------------------------------------------------------------------------------------
def check_reduction(seed=0, n=10 ** 4, **_):
    name = "reduction fidelity"
    rng = np.random.default_rng(seed + 6)
    pairs = _km_pairs(5)
    errs = {key: 0.0 for key in ("reconstruct", "gram", "shape", "invariance")}
    for t in range(n):
        k, m = pairs[t % len(pairs)]
        V = rng.standard_normal((k, m))
        W, schedule, R = reduction.reduce(V)
        Vw = linalg.embed_rows(W, m)
        errs["reconstruct"] = max(errs["reconstruct"], np.max(np.abs(Vw @ R.T - V)))
        errs["gram"] = max(errs["gram"], np.max(np.abs(linalg.gram(Vw) - linalg.gram(V))))
        bad_shape = np.any(np.triu(W, 1) != 0) or np.any(np.diag(W) <= 0)
        errs["shape"] = max(errs["shape"], 1.0 if bad_shape else 0.0)
        Q = special_ortho_group.rvs(m, random_state=rng) if m > 1 else np.eye(1)
        W2 = reduction.reduce(V @ Q.T).W
        errs["invariance"] = max(errs["invariance"], np.max(np.abs(W2 - W)))
    return CheckResult(name, [
        _row(name, errs["reconstruct"], 1e-10, "1-5", "1-5", "R W = V"),
        _row(name, errs["gram"], 1e-10, "1-5", "1-5", "gram preserved"),
        _row(name, errs["shape"], 0.0, "1-5", "1-5", "lower-triangular, positive diagonal"),
        _row(name, errs["invariance"], 1e-10, "1-5", "1-5", "W invariant under SO_m"),
    ])


# 7 -------------------------------------------------------------------------------------
def frame_by_recursion(theta):
    """Euler frame built column by column from the nested vectors f_j."""
    m = len(theta) + 1
    e = np.eye(m)
    f = [None] * (m + 1)
    f[m] = e[m - 1]
    for j in range(m - 1, 0, -1):
        f[j] = np.sin(theta[j - 1]) * e[j - 1] + np.cos(theta[j - 1]) * f[j + 1]
    cols = [np.cos(theta[j - 1]) * e[j - 1] - np.sin(theta[j - 1]) * f[j + 1]
            for j in range(1, m)]
    return np.column_stack(cols + [f[1]])


def random_angles(rng, m):
    theta = rng.uniform(-np.pi / 2, np.pi / 2, m - 1)
    theta[-1] = rng.uniform(-np.pi, np.pi)
    return theta


def check_euler(seed=0, n=10 ** 4, **_):
    name = "euler angles"
    rng = np.random.default_rng(seed + 7)
    errs = {key: 0.0 for key in ("orth", "det", "matrix", "vector", "vec-angles", "recursion")}
    for t in range(n):
        m = 2 + t % 5
        theta = random_angles(rng, m)
        A = euler.rotation_from_angles(theta)
        errs["orth"] = max(errs["orth"], np.max(np.abs(A.T @ A - np.eye(m))))
        errs["det"] = max(errs["det"], abs(np.linalg.det(A) - 1.0))
        errs["recursion"] = max(errs["recursion"], np.max(np.abs(A - frame_by_recursion(theta))))
        generic = np.all(np.abs(np.cos(theta[:-1])) > 1e-6)
        if generic:
            errs["matrix"] = max(errs["matrix"],
                                 np.max(np.abs(euler.angles_from_rotation(A) - theta)))
            back = euler.angles_from_unit_vector(euler.vector_from_angles(theta))
            errs["vec-angles"] = max(errs["vec-angles"], np.max(np.abs(back - theta)))
        v = rng.standard_normal(m)
        v /= np.linalg.norm(v)
        errs["vector"] = max(errs["vector"], np.max(np.abs(
            euler.vector_from_angles(euler.angles_from_unit_vector(v)) - v)))
    return CheckResult(name, [
        _row(name, errs["orth"], 1e-12, "", "2-6", "columns orthonormal"),
        _row(name, errs["det"], 1e-12, "", "2-6", "det = 1"),
        _row(name, errs["matrix"], 1e-10, "", "2-6", "angles -> matrix -> angles"),
        _row(name, errs["vec-angles"], 1e-10, "", "2-6", "angles -> vector -> angles"),
        _row(name, errs["vector"], 1e-12, "", "2-6", "vector -> angles -> vector"),
        _row(name, errs["recursion"], 1e-13, "", "2-6", "closed form vs recursion"),
    ])


# 8 -------------------------------------------------------------------------------------
def check_image_membership(seed=0, n=10 ** 4, **_):
    name = "image membership"
    rng = np.random.default_rng(seed + 8)
    disagree, eig_disagree, lift_err, accepted = 0, 0, 0.0, 0
    for t in range(n):
        k = 1 + t % 4
        m = k + int(rng.integers(0, 3))
        kind = t % 3
        if kind == 0:
            A = rng.uniform(-1.0, 1.0, (k, k))
            G = np.tril(A) + np.tril(A, -1).T
        elif kind == 1:
            G = random_psd(rng, k, extra=0)
        else:
            r = int(rng.integers(1, k + 1))
            B = rng.standard_normal((k, r))
            G = B @ B.T
        inside = linalg.is_in_image(G, k, m)
        try:
            linalg.semidefinite_cholesky(G)
            chol_ok = True
        except NotPositiveSemidefinite:
            chol_ok = False
        disagree += inside != chol_ok
        lam = np.linalg.eigvalsh(G)[0]
        scale = np.max(np.abs(np.diag(G)))
        if abs(lam) > 1e-8 * scale:
            eig_disagree += inside != (lam > 0)
        if inside:
            accepted += 1
            V = linalg.lift(G, m)
            lift_err = max(lift_err, np.max(np.abs(linalg.gram(V) - G)) / max(scale, 1.0))
    return CheckResult(name, [
        _row(name, disagree, 0, "1-4", "", "is_in_image == cholesky succeeds"),
        _row(name, eig_disagree, 0, "1-4", "", "agrees with eigenvalue sign"),
        _row(name, lift_err, 1e-10, "1-4", "", f"lift reproduces G ({accepted} accepted)"),
    ])


# 9 -------------------------------------------------------------------------------------
def check_homogeneity(seed=0, **_):
    name = "density homogeneity and constancy"
    rng = np.random.default_rng(seed + 9)
    rows = []
    for k, m in _km_pairs(5):
        err = 0.0
        for _ in range(20):
            G, _ = random_pd_bounded(rng, k)
            base = measure.hilbert_density(G, k, m).value
            for c in (0.5, 2.0, 10.0):
                scaled = measure.hilbert_density(c * c * G, k, m).value
                err = max(err, _rel(scaled, c ** (k * (m - k - 1)) * base))
        rows.append(_row(name, err, 1e-12, k, m, "lambda(c^2 G) = c^(k(m-k-1)) lambda(G)"))
        # the constant from sphere volumes vs. the one from the angular schedule
        G, eig = random_pd_bounded(rng, k)
        factorized = 2.0 ** -k * reduction.angular_volume(k, m) * np.prod(eig) ** ((m - k - 1) / 2)
        rows.append(_row(name, _rel(measure.hilbert_density(G, k, m).value, factorized), 1e-12,
                         k, m, "2^-k angular_volume |G|^((m-k-1)/2)"))
    for m in range(2, 6):
        k = m - 1
        values = [measure.hilbert_density(random_psd(rng, k, extra=1), k, m).value
                  for _ in range(100)]
        rows.append(_row(name, _rel(values, values[0]), 1e-12, k, m, "constant at k = m - 1"))
    # singular flag fires exactly on the boundary for k = m, never for k < m
    wrong = 0
    for m in range(1, 6):
        for k in range(1, m + 1):
            B = rng.standard_normal((k, k - 1))
            for G, boundary in ((random_psd(rng, k, extra=0), False), (B @ B.T, True)):
                d = measure.hilbert_density(G, k, m)
                expect_singular = boundary and k == m
                wrong += d.singular != expect_singular or (k < m and not math.isfinite(d.value))
    rows.append(_row(name, wrong, 0, "1-5", "1-5", "singular exactly on the boundary at k = m"))
    return CheckResult(name, rows)


CRITERIA = [
    check_worked_densities,
    check_volume_identities,
    check_angular_volume,
    check_gaussian_consistency,
    check_minor_and_jacobian_oracles,
    check_reduction,
    check_euler,
    check_image_membership,
    check_homogeneity,
]


def verify_suite(samples=10 ** 6, seed=0, workers=1, inject_fault=False):
    """Run every check; returns the list of :class:`CheckResult`."""
    if inject_fault:
        with injected_fault():
            return [check(samples=samples, seed=seed, workers=workers) for check in CRITERIA]
    return [check(samples=samples, seed=seed, workers=workers) for check in CRITERIA]


def consistency_table(names=("gaussian", "gaussian-trace", "gaussian-det", "ball"), max_m=4,
                      samples=10 ** 6, seed=0, workers=1):
    """compare_methods over the built-in registry, one row per estimate."""
    config = MCConfig(samples=samples, seed=seed, workers=workers)
    rows = []
    for name in names:
        g = get_integrand(name)
        pairs = _km_pairs(max_m) if g.decay == "gaussian" else [(1, 2), (1, 3), (2, 2), (2, 3)]
        for k, m in pairs:
            rows.extend(dict(row, check="consistency")
                        for row in compare_methods(g, k, m, config).rows())
    return rows

