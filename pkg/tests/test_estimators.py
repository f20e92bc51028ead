import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from orbitspace.estimators import FundamentalDomainReducer, HilbertEmbedding, HilbertMeasure
from orbitspace.exceptions import DimensionMismatch, NotCoregular

X = np.random.default_rng(0).standard_normal((20, 6))


def test_embedding_and_inverse():
    emb = HilbertEmbedding(k=2, m=3).fit(X)
    U = emb.transform(X)
    assert U.shape == (20, 3)
    V0 = X[0].reshape(2, 3)
    np.testing.assert_allclose(U[0], [V0[0] @ V0[0], V0[1] @ V0[0], V0[1] @ V0[1]])
    np.testing.assert_allclose(emb.transform(emb.inverse_transform(U)), U, atol=1e-12)


def test_reducer_is_invariant_and_invertible_up_to_rotation():
    red = FundamentalDomainReducer(k=2, m=3).fit(X)
    Wp = red.transform(X)
    Q = np.linalg.qr(np.random.default_rng(1).standard_normal((3, 3)))[0]
    Q *= np.sign(np.linalg.det(Q))
    rotated = np.stack([(x.reshape(2, 3) @ Q.T).ravel() for x in X])
    np.testing.assert_allclose(red.transform(rotated), Wp, atol=1e-12)
    emb = HilbertEmbedding(k=2, m=3).fit(X)
    np.testing.assert_allclose(emb.transform(red.inverse_transform(Wp)), emb.transform(X),
                               atol=1e-12)


def test_measure_pipeline():
    pipe = make_pipeline(HilbertEmbedding(k=2, m=3), HilbertMeasure(k=2, m=3)).fit(X)
    np.testing.assert_allclose(pipe.transform(X).ravel(), math.log(2 * math.pi ** 2), rtol=1e-13)
    meas = HilbertMeasure(k=2, m=2).fit(np.zeros((1, 3)))
    scores = meas.score_samples([[1.0, 0.0, 1.0], [1.0, 2.0, 1.0]])
    assert scores[0] == pytest.approx(math.log(math.pi)) and scores[1] == -np.inf


def test_params_and_validation():
    est = clone(HilbertMeasure(k=2, m=4, tol=1e-10))
    assert est.get_params() == {"k": 2, "m": 4, "tol": 1e-10}
    with pytest.raises(NotFittedError):
        HilbertEmbedding(k=2, m=3).transform(X)
    with pytest.raises(NotCoregular):
        HilbertEmbedding(k=3, m=2).fit(X)
    with pytest.raises(DimensionMismatch):
        HilbertEmbedding(k=2, m=2).fit(X)
