import math

import numpy as np
import pytest
from scipy.special import gamma

from orbitspace import integrands
from orbitspace.exceptions import IntegrandMismatch, UnknownIntegrand, ValidationError
from orbitspace.integrands import InvariantIntegrand, check_integrand, get_integrand, register
from orbitspace.linalg import gram


def test_registry_contents():
    assert {"gaussian", "gaussian-trace", "gaussian-det", "ball"} <= set(integrands.REGISTRY)
    with pytest.raises(UnknownIntegrand):
        get_integrand("nope")


def test_exact_values():
    assert get_integrand("gaussian").exact_value(2, 3) == pytest.approx(math.pi ** 3)
    assert get_integrand("gaussian-trace").exact_value(1, 2) == pytest.approx(math.pi)
    # E|G| for Gaussian vectors of variance 1/2: k=1 gives E|v|^2 = m/2
    assert get_integrand("gaussian-det").exact_value(1, 3) == pytest.approx(1.5 * math.pi ** 1.5)
    assert get_integrand("ball").exact_value(1, 3) == pytest.approx(4 * math.pi / 3)
    assert get_integrand("ball").exact_value(2, 2) == pytest.approx(math.pi ** 2 / gamma(3))


def test_views_agree_on_random_configurations():
    rng = np.random.default_rng(0)
    for g in integrands.REGISTRY.values():
        V = 0.3 * rng.standard_normal((50, 3, 4))
        np.testing.assert_allclose(g.f(V), g.F(gram(V)), rtol=1e-12, atol=1e-300)


def test_mismatched_pair_is_rejected():
    bad = InvariantIntegrand("bad", f=lambda V: np.exp(-np.sum(V ** 2, axis=(-2, -1))),
                             F=lambda G: np.exp(-2 * np.trace(G, axis1=-2, axis2=-1)))
    with pytest.raises(IntegrandMismatch):
        register(bad)
    assert "bad" not in integrands.REGISTRY


def test_decay_validation():
    with pytest.raises(ValidationError):
        check_integrand(InvariantIntegrand("x", f=lambda V: V, F=lambda G: G, decay="heavy"))
    with pytest.raises(ValidationError):
        check_integrand(InvariantIntegrand("x", f=lambda V: V, F=lambda G: G, decay="compact"))


def test_polynomial_parser():
    assert integrands.parse_polynomial("u11*u22 - u21^2") == [
        (1.0, {(1, 1): 1, (2, 2): 1}), (-1.0, {(2, 1): 2})]
    assert integrands.parse_polynomial("2.5*u12 + 3") == [(2.5, {(2, 1): 1}), (3.0, {})]
    assert integrands.parse_polynomial("2^3") == [(8.0, {})]
    for bad in ("", "u1", "u11**2", "x11", "u11 +", "u01"):
        with pytest.raises(ValidationError):
            integrands.parse_polynomial(bad)


def test_polynomial_integrand():
    g = get_integrand("poly:u11*u22 - u21^2")
    G = np.array([[[2.0, 0.5], [0.5, 1.0]]])
    assert g.F(G)[0] == pytest.approx(1.75 * math.exp(-3.0))
    V = np.random.default_rng(1).standard_normal((10, 2, 3))
    np.testing.assert_allclose(g.f(V), g.F(gram(V)), rtol=1e-12)
    # it is |G| exp(-tr G), the same as the registered det integrand
    np.testing.assert_allclose(g.F(gram(V)), get_integrand("gaussian-det").F(gram(V)), rtol=1e-10)
    with pytest.raises(ValidationError):
        g.F(np.ones((1, 1, 1)))
