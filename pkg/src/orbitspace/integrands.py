"""Invariant test integrands with paired views.

Each integrand has a view ``f`` on configurations, shape ``(..., k, m)``, and
a view ``F`` on Gram matrices, shape ``(..., k, k)``, with ``f(V) ==
F(gram(V))``.  The two views are checked against each other when the
integrand is registered.

Besides the built-in registry, ``get_integrand("poly:<expr>")`` builds a
polynomial in the ``u_ij`` times the Gaussian envelope ``exp(-tr G)``, e.g.
``poly:u11*u22 - u21^2 + 0.5``.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import IntegrandMismatch, UnknownIntegrand, ValidationError
from .linalg import gram

GAUSSIAN = "gaussian"
COMPACT = "compact"
DECAY_CLASSES = (GAUSSIAN, COMPACT)


@dataclass(frozen=True)
class InvariantIntegrand:
    """An O_m-invariant integrand on k-tuples of vectors in R^m.

    ``decay`` selects the proposal distributions: ``"gaussian"`` integrands
    are ``exp(-tr G)`` times something of moderate growth; ``"compact"``
    integrands vanish unless every coordinate lies in ``[-radius, radius]``.
    ``exact(k, m)`` returns the exact integral over (R^m)^k when known.
    """

    name: str
    f: Callable
    F: Callable
    decay: str = GAUSSIAN
    radius: Optional[float] = None
    exact: Optional[Callable] = None
    description: str = ""

    def exact_value(self, k, m):
        return None if self.exact is None else float(self.exact(k, m))


def check_integrand(g, shapes=((1, 1), (1, 3), (2, 2), (2, 3), (3, 4)), n=64,
                    seed=20240917, rtol=1e-12):
    """Raise :class:`IntegrandMismatch` unless ``f(V) == F(gram(V))``."""
    if g.decay not in DECAY_CLASSES:
        raise ValidationError(f"unknown decay class {g.decay!r}", integrand=g.name)
    if g.decay == COMPACT and not g.radius:
        raise ValidationError("compact integrands need a support radius", integrand=g.name)
    rng = np.random.default_rng(seed)
    for k, m in shapes:
        V = rng.standard_normal((n, k, m))
        if g.decay == COMPACT:
            V *= g.radius / math.sqrt(k * m)
        lhs = np.asarray(g.f(V), dtype=float)
        rhs = np.asarray(g.F(gram(V)), dtype=float)
        if lhs.shape != (n,) or rhs.shape != (n,):
            raise IntegrandMismatch(f"{g.name}: views must map a batch of {n} to shape ({n},)",
                                    integrand=g.name, k=k, m=m)
        err = np.abs(lhs - rhs)
        if np.any(err > rtol * np.maximum(1.0, np.abs(lhs))):
            raise IntegrandMismatch(f"{g.name}: f(V) != F(gram(V)) (max error {err.max():.3e})",
                                    integrand=g.name, k=k, m=m)


REGISTRY = {}


def register(g):
    check_integrand(g)
    REGISTRY[g.name] = g
    return g


def _trace(G):
    return np.trace(G, axis1=-2, axis2=-1)


def _sumsq(V):
    return np.sum(V * V, axis=(-2, -1))


def _gaussian_exact(k, m):
    return math.pi ** (0.5 * k * m)


def _det_exact(k, m):
    # entries of V are N(0, 1/2) under exp(-|V|^2); E|G| = 2**-k m!/(m-k)!
    return _gaussian_exact(k, m) * 2.0 ** -k * math.factorial(m) / math.factorial(m - k)


def _ball_exact(k, m):
    n = k * m
    return math.pi ** (0.5 * n) / math.gamma(0.5 * n + 1)


register(InvariantIntegrand(
    "gaussian",
    f=lambda V: np.exp(-_sumsq(V)),
    F=lambda G: np.exp(-_trace(G)),
    exact=_gaussian_exact,
    description="exp(-tr G)",
))

register(InvariantIntegrand(
    "gaussian-trace",
    f=lambda V: _sumsq(V) * np.exp(-_sumsq(V)),
    F=lambda G: _trace(G) * np.exp(-_trace(G)),
    exact=lambda k, m: 0.5 * k * m * _gaussian_exact(k, m),
    description="tr G exp(-tr G)",
))

register(InvariantIntegrand(
    "gaussian-det",
    f=lambda V: np.prod(np.linalg.svd(V, compute_uv=False) ** 2, axis=-1) * np.exp(-_sumsq(V)),
    F=lambda G: np.linalg.det(G) * np.exp(-_trace(G)),
    exact=_det_exact,
    description="|G| exp(-tr G)",
))

register(InvariantIntegrand(
    "ball",
    f=lambda V: (_sumsq(V) <= 1.0).astype(float),
    F=lambda G: (_trace(G) <= 1.0).astype(float),
    decay=COMPACT,
    radius=1.0,
    exact=_ball_exact,
    description="indicator of tr G <= 1 (unit ball in R^{km})",
))


_TERM = re.compile(r"([+-]?)\s*([^+-]+)")
_FACTOR = re.compile(r"^(?:u(\d)(\d)|(\d+(?:\.\d*)?(?:[eE]\d+)?|\.\d+))(?:\^(\d+))?$")


def parse_polynomial(expr):
    """Parse ``expr`` into a list of ``(coefficient, {(i, j): power})`` terms.

    Factors are ``u<i><j>`` (1-based, symmetric) or numbers, joined by ``*``
    and optionally raised with ``^``; terms are joined by ``+`` or ``-``.
    """
    text = expr.replace(" ", "")
    if not text:
        raise ValidationError("empty polynomial")
    terms = []
    pos = 0
    for match in _TERM.finditer(text):
        if match.start() != pos:
            raise ValidationError(f"cannot parse polynomial {expr!r}")
        pos = match.end()
        coef = -1.0 if match.group(1) == "-" else 1.0
        powers = {}
        for factor in match.group(2).split("*"):
            fm = _FACTOR.match(factor)
            if fm is None:
                raise ValidationError(f"bad factor {factor!r} in {expr!r}")
            power = int(fm.group(4) or 1)
            if fm.group(1):
                i, j = int(fm.group(1)), int(fm.group(2))
                if i < 1 or j < 1:
                    raise ValidationError(f"indices in {factor!r} are 1-based")
                key = (max(i, j), min(i, j))
                powers[key] = powers.get(key, 0) + power
            else:
                coef *= float(fm.group(3)) ** power
        terms.append((coef, powers))
    if pos != len(text):
        raise ValidationError(f"cannot parse polynomial {expr!r}")
    return terms


def _poly_eval(terms, entry):
    total = 0.0
    for coef, powers in terms:
        value = coef
        for (i, j), power in powers.items():
            value = value * entry(i, j) ** power
        total = total + value
    return total


def polynomial_integrand(expr):
    terms = parse_polynomial(expr)
    top = max((max(i for i, _ in p) for _, p in terms if p), default=1)

    def f(V):
        V = np.asarray(V, dtype=float)
        if V.shape[-2] < top:
            raise ValidationError(f"polynomial uses u{top}{top} but k={V.shape[-2]}")

        def entry(i, j):
            return np.einsum("...l,...l->...", V[..., i - 1, :], V[..., j - 1, :])

        return _poly_eval(terms, entry) * np.ones(V.shape[:-2]) * np.exp(-_sumsq(V))

    def F(G):
        G = np.asarray(G, dtype=float)
        if G.shape[-1] < top:
            raise ValidationError(f"polynomial uses u{top}{top} but k={G.shape[-1]}")
        return _poly_eval(terms, lambda i, j: G[..., i - 1, j - 1]) * np.ones(G.shape[:-2]) \
            * np.exp(-_trace(G))

    g = InvariantIntegrand(f"poly:{expr}", f=f, F=F, description=f"({expr}) exp(-tr G)")
    check_integrand(g, shapes=tuple((k, k + 1) for k in range(top, top + 2)))
    return g


def get_integrand(name):
    if name.startswith("poly:"):
        return polynomial_integrand(name[len("poly:"):])
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownIntegrand(
            f"unknown integrand {name!r}; choose from {sorted(REGISTRY)} or poly:<expr>",
            integrand=name) from None
