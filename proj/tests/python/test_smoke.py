import json
import math

import numpy as np
import pytest

import mphd


def test_matern_unit_distance():
    assert mphd.matern_correlation(0.0, mphd.Smoothness.NU52) == 1.0
    assert mphd.matern_correlation(1.0, mphd.Smoothness.NU52) == pytest.approx(0.5239941088318203, rel=1e-14)


def test_nll_single_point_standard_normal():
    p = mphd.GpParams(0.0, np.array([1.0]), 1.0, 1e-300)
    nll = mphd.gp_nll([(np.zeros((1, 1)), np.zeros(1))], p, mphd.Smoothness.NU52)
    assert nll == pytest.approx(0.5 * math.log(2 * math.pi), rel=1e-12)


def test_nll_gradient_matches_finite_difference():
    rng = np.random.default_rng(3)
    x = rng.uniform(size=(12, 2))
    y = rng.normal(size=12)
    p = mphd.GpParams(0.2, np.array([0.4, 0.9]), 1.3, 0.05)
    value, grad = mphd.gp_nll_grad([(x, y)], p, mphd.Smoothness.NU32)
    u = p.to_unconstrained()
    h = 1e-5
    fd = np.empty_like(u)
    for i in range(u.size):
        a, b = u.copy(), u.copy()
        a[i] += h
        b[i] -= h
        fa = mphd.gp_nll([(x, y)], mphd.GpParams.from_unconstrained(a), mphd.Smoothness.NU32)
        fb = mphd.gp_nll([(x, y)], mphd.GpParams.from_unconstrained(b), mphd.Smoothness.NU32)
        fd[i] = (fa - fb) / (2 * h)
    assert value == pytest.approx(mphd.gp_nll([(x, y)], p, mphd.Smoothness.NU32))
    assert np.linalg.norm(grad - fd) / np.linalg.norm(fd) < 1e-4


def test_posterior_without_observations_is_prior():
    p = mphd.GpParams(0.7, np.array([0.5]), 2.0, 1e-3)
    mean, var = mphd.gp_posterior(p, mphd.Smoothness.NU52, np.zeros((0, 1)), np.zeros(0), np.array([[0.1], [0.9]]))
    assert np.allclose(mean, 0.7)
    assert np.allclose(var, 2.0)


def test_gamma_mle_and_kl():
    rng = np.random.default_rng(0)
    g = mphd.gamma_mle(list(rng.gamma(10.0, 1.0 / 30.0, size=5000)))
    assert g.shape == pytest.approx(10.0, rel=0.1)
    assert g.rate == pytest.approx(30.0, rel=0.1)
    assert mphd.gamma_kl(g, g) == pytest.approx(0.0, abs=1e-14)


def test_pi_at_target_is_half():
    assert mphd.acquisition_value("pi", 1.1, 0.5, 1.0, zeta=0.1) == pytest.approx(0.5, abs=1e-15)


def test_invalid_params_raise_coded_error():
    with pytest.raises(mphd.MphdError) as info:
        mphd.GpParams(0.0, np.array([-1.0]), 1.0, 1e-3)
    assert info.value.code == "invalid_argument"


def test_cli_roundtrip(tmp_path):
    data = tmp_path / "data.json"
    code, out, err = mphd.run_cli(["synth-gen", "--profile", "S", "--scale", "desk", "--seed", "4", "--out", str(data)])
    assert code == 0, err
    code, out, err = mphd.run_cli(["inspect", str(data)])
    assert code == 0, err
    summary = json.loads(out)
    assert summary["format"] == "mphd-superdataset"
    assert summary["hash"] == mphd.content_hash(data.read_text())


def test_cli_missing_file_exit_code(tmp_path):
    code, _, err = mphd.run_cli(["inspect", str(tmp_path / "absent.json")])
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["error"]
