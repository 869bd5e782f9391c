import numpy as np
import pytest

from mcckf.conventional import (
    imcc_gain,
    imcckf_apriori_step,
    imcckf_measurement_update,
    imcckf_posteriori_step,
    kf_apriori_step,
    mcc_gain,
    mcckf_apriori_step,
    mcckf_measurement_update,
    mcckf_posteriori_step,
    time_update,
)
from mcckf.errors import LambdaZero, NotPositiveDefinite
from mcckf.linalg import cholesky_lower
from mcckf.model import CovFilterState, KernelSpec, StateSpaceModel

from conftest import random_model, random_spd, rel


def test_kf_scalar(scalar_model):
    state, diag = kf_apriori_step(CovFilterState(np.zeros(1), np.eye(1)), [0.0], scalar_model)
    assert state.x[0] == 0.0
    assert state.P[0, 0] == pytest.approx(0.5, rel=1e-15)
    assert diag.gain[0, 0] == pytest.approx(0.5)
    assert diag.innov_cov_factor[0, 0] ** 2 == pytest.approx(2.0)
    assert diag.lam == 1.0
    assert state.k == 1


def test_kf_no_information(rng):
    model = random_model(rng, 3, 2, 2)
    blind = StateSpaceModel(F=model.F, G=model.G, H=np.zeros((2, 3)), Q=model.Q, R=model.R,
                            x0=model.x0, P0=model.P0)
    P = random_spd(rng, 3)
    state, diag = kf_apriori_step(CovFilterState(model.x0, P), rng.standard_normal(2), blind)
    assert np.all(diag.gain == 0)
    np.testing.assert_allclose(state.P, model.F @ P @ model.F.T + model.GQG, rtol=1e-14)


def test_kf_zero_residual(rng):
    model = random_model(rng, 4, 2, 3)
    x = rng.standard_normal(4)
    state, _ = kf_apriori_step(CovFilterState(x, model.P0), model.H @ x, model)
    np.testing.assert_allclose(state.x, model.F @ x, rtol=1e-14)


def test_mcckf_posteriori_scalar(scalar_model):
    post, diag = mcckf_posteriori_step(CovFilterState(np.zeros(1), np.eye(1)), [0.0], scalar_model, KernelSpec())
    assert diag.lam == 1.0
    assert diag.gain[0, 0] == pytest.approx(0.5, rel=1e-15)
    assert post.x[0] == 0.0
    assert post.P[0, 0] == pytest.approx(0.5, rel=1e-15)


def test_mcckf_posteriori_zero_residual(rng):
    model = random_model(rng, 3, 2, 3)
    x = rng.standard_normal(3)
    prior = time_update(CovFilterState(x, model.P0), model)
    post, _ = mcckf_posteriori_step(CovFilterState(x, model.P0), model.H @ prior.x, model, KernelSpec())
    np.testing.assert_allclose(post.x, prior.x, rtol=1e-14)


def test_mcckf_huge_residual_keeps_prior(rng):
    model = random_model(rng, 3, 2, 3)
    prior = CovFilterState(rng.standard_normal(3), model.P0)
    post, diag = mcckf_measurement_update(prior, np.full(2, 1e6), model, KernelSpec(1.0))
    assert diag.lam == 0.0
    assert np.all(diag.gain == 0)
    np.testing.assert_allclose(post.P, model.P0, rtol=1e-14)
    np.testing.assert_allclose(post.x, prior.x, rtol=1e-14)


def test_imcckf_posteriori_scalar(scalar_model):
    post, diag = imcckf_posteriori_step(CovFilterState(np.zeros(1), np.eye(1)), [0.0], scalar_model, KernelSpec())
    assert post.P[0, 0] == pytest.approx(0.5, rel=1e-15)
    assert post.x[0] == 0.0


def test_imcckf_unit_lambda_is_kalman_update(rng):
    model = random_model(rng, 4, 2, 3)
    prior = CovFilterState(rng.standard_normal(4), random_spd(rng, 4))
    y = rng.standard_normal(2) * 50
    post, diag = imcckf_measurement_update(prior, y, model, KernelSpec.unit())
    P, H = prior.P, model.H
    K = P @ H.T @ np.linalg.inv(H @ P @ H.T + model.R)
    assert diag.lam == 1.0
    np.testing.assert_allclose(post.x, prior.x + K @ (y - H @ prior.x), rtol=1e-12)
    np.testing.assert_allclose(post.P, P - K @ H @ P, rtol=1e-12, atol=1e-13)


def test_gain_forms_agree(rng):
    for _ in range(200):
        n, m = rng.integers(1, 7), rng.integers(1, 4)
        P, R = random_spd(rng, n), random_spd(rng, m)
        H = rng.standard_normal((m, n))
        lam = rng.uniform(1e-3, 1.0)
        K1 = mcc_gain(P, H, cholesky_lower(R), lam)
        K2, _ = imcc_gain(P, H, R, lam)
        assert rel(K1, K2) <= 1e-10


def _kf_oracle(x, P, y, model):
    # textbook predicted-form Kalman step with explicit inverses
    F, H = model.F, model.H
    Re = model.R + H @ P @ H.T
    Kp = F @ P @ H.T @ np.linalg.inv(Re)
    return F @ x + Kp @ (y - H @ x), F @ P @ F.T + model.GQG - Kp @ Re @ Kp.T


def test_kf_matches_explicit_inverse_oracle(rng):
    model = random_model(rng, 5, 3, 4)
    P = random_spd(rng, 5)
    x, y = rng.standard_normal(5), rng.standard_normal(3)
    state, _ = kf_apriori_step(CovFilterState(x, P), y, model)
    xo, Po = _kf_oracle(x, P, y, model)
    assert rel(state.x, xo) < 1e-10
    assert rel(state.P, Po) < 1e-10


def test_mcckf_apriori_unit_lambda_equals_kf(rng):
    model = random_model(rng, 4, 2, 3)
    s = CovFilterState(rng.standard_normal(4), random_spd(rng, 4))
    y = rng.standard_normal(2)
    a, da = mcckf_apriori_step(s, y, model, KernelSpec.unit())
    b, _ = kf_apriori_step(s, y, model)
    assert da.riccati_coeff == 1.0
    assert rel(a.x, b.x) < 1e-12
    assert rel(a.P, b.P) < 1e-12


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 5.0, 20.0])
def test_mcckf_apriori_equals_posteriori_then_predict(rng, sigma):
    for _ in range(20):
        n, m, q = rng.integers(1, 6), rng.integers(1, 4), rng.integers(1, 5)
        model = random_model(rng, n, m, q)
        prior = CovFilterState(rng.standard_normal(n), random_spd(rng, n))
        y = model.H @ prior.x + rng.standard_normal(m) * 2
        a, da = mcckf_apriori_step(prior, y, model, KernelSpec(sigma))
        post, dp = mcckf_measurement_update(prior, y, model, KernelSpec(sigma))
        b = time_update(post, model)
        assert da.lam == dp.lam
        assert 0 < da.lam <= 1 and da.riccati_coeff >= 1
        assert rel(a.x, b.x) < 1e-9
        assert rel(a.P, b.P) < 1e-9


def test_mcckf_apriori_lambda_zero(rng):
    model = random_model(rng, 3, 2, 2)
    with pytest.raises(LambdaZero):
        mcckf_apriori_step(CovFilterState(np.zeros(3), model.P0), np.full(2, 1e8), model, KernelSpec(1.0))


def test_imcckf_apriori_unit_lambda_equals_kf(rng):
    model = random_model(rng, 5, 2, 3)
    s = CovFilterState(rng.standard_normal(5), random_spd(rng, 5))
    y = rng.standard_normal(2)
    a, _ = imcckf_apriori_step(s, y, model, KernelSpec.unit())
    b, _ = kf_apriori_step(s, y, model)
    assert rel(a.x, b.x) < 1e-12
    assert rel(a.P, b.P) < 1e-12


def test_imcckf_apriori_zero_lambda_is_prediction(rng):
    model = random_model(rng, 3, 2, 3)
    s = CovFilterState(rng.standard_normal(3), random_spd(rng, 3))
    a, d = imcckf_apriori_step(s, np.full(2, 1e8), model, KernelSpec(1.0))
    assert d.lam == 0.0
    np.testing.assert_array_equal(a.x, model.F @ s.x)
    np.testing.assert_allclose(a.P, model.F @ s.P @ model.F.T + model.GQG, rtol=1e-15)


def test_imcckf_apriori_scalar(scalar_model):
    a, d = imcckf_apriori_step(CovFilterState(np.zeros(1), np.eye(1)), [0.0], scalar_model, KernelSpec())
    assert d.lam == 1.0
    assert a.P[0, 0] == pytest.approx(0.5, rel=1e-15)


def test_imcckf_apriori_equals_posteriori_then_predict(rng):
    for _ in range(50):
        n, m, q = rng.integers(1, 7), rng.integers(1, 4), rng.integers(1, 7)
        model = random_model(rng, n, m, q)
        prior = CovFilterState(rng.standard_normal(n), random_spd(rng, n))
        y = model.H @ prior.x + rng.standard_normal(m) * 3
        a, _ = imcckf_apriori_step(prior, y, model, KernelSpec(2.0))
        post, _ = imcckf_measurement_update(prior, y, model, KernelSpec(2.0))
        b = time_update(post, model)
        assert rel(a.x, b.x) < 1e-9
        assert rel(a.P, b.P) < 1e-9


def test_conventional_outputs_symmetric(rng):
    model = random_model(rng, 4, 2, 3)
    s = CovFilterState(rng.standard_normal(4), random_spd(rng, 4))
    y = rng.standard_normal(2)
    for step in (mcckf_apriori_step, imcckf_apriori_step, mcckf_posteriori_step, imcckf_posteriori_step):
        out, _ = step(s, y, model, KernelSpec(3.0))
        assert np.array_equal(out.P, out.P.T)


def test_indefinite_covariance_raises(rng):
    model = random_model(rng, 2, 1, 2)
    bad = CovFilterState(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    for step in (imcckf_apriori_step, mcckf_apriori_step):
        with pytest.raises(NotPositiveDefinite):
            step(bad, [0.0], model, KernelSpec())
    with pytest.raises(NotPositiveDefinite):
        kf_apriori_step(bad, [0.0], model)
