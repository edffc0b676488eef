"""Smoke tests for the python bindings: each mirrors a C++-side invariant."""

import json
import math
import os

import numpy as np
import pytest

import pidkl


def test_problem_values():
    p = pidkl.make_problem("heat1d")
    assert p.phi_names == ["alpha"]
    assert p.solution(np.array([0.0, 0.5])) == pytest.approx(1.0)
    assert p.source(np.array([0.0, 0.5]), np.array([1.0])) == pytest.approx(
        math.pi**2 - 1.0, rel=1e-9
    )

    adr = pidkl.make_problem("adr50d")
    s0 = np.zeros(51)
    assert adr.source(s0, adr.phi_true) == pytest.approx(-0.784, abs=1e-12)


def test_observations_deterministic_and_exact():
    p = pidkl.make_problem("heat1d")
    a = pidkl.generate_observations(p, 12, 6, seed=5)
    b = pidkl.generate_observations(p, 12, 6, seed=5)
    assert np.array_equal(a.u, b.u)
    assert np.array_equal(a.s_f, b.s_f)
    for i in range(12):
        assert a.u[i] == p.solution(a.s_u[i])


def test_likelihood_identity():
    p = pidkl.make_problem("heat1d")
    obs = pidkl.generate_observations(p, 8, 5, seed=9, tau_u_sq=1e-4, tau_f_sq=1e-4)
    fmap = pidkl.identity_feature_map()
    log_len = np.zeros(2)
    phi = np.array([1.1])
    nlml = pidkl.joint_nlml(obs, fmap, 0.0, log_len, phi, p)
    fidelity, complexity, constant, loglik = pidkl.decomposed_loglik(
        obs, fmap, 0.0, log_len, phi, p
    )
    assert fidelity >= 0.0
    assert loglik == pytest.approx(-nlml, abs=1e-7)


def test_pipeline_tiny():
    p = pidkl.make_problem("heat1d")
    obs = pidkl.generate_observations(p, 10, 6, seed=3, tau_f_sq=1e-4)
    report = pidkl.run_pretraining(
        p, obs, n_col=8, n_iter=25, seed=4, hidden=[8], latent_dim=2
    )
    assert report.trace.shape == (25, 4)
    assert report.trace[-1, 0] <= report.trace[0, 0]
    assert p.phi_lo[0] < report.phi_pre[0] < p.phi_hi[0]

    chain = pidkl.run_hmc(
        obs, p, report, n_warmup=30, n_samples=60, leapfrog_steps=5,
        step_size=0.05, seed=6,
    )
    assert chain.draws.shape == (60, 4)
    assert chain.names[0] == "alpha"
    assert np.all(chain.draws[:, 0] > 0.0) and np.all(chain.draws[:, 0] < 2.0)

    stats = pidkl.marginal_stats(chain, 1)
    assert stats.ci_lo[0] <= stats.ci_hi[0]

    grid = pidkl.sample_interior(p, 5, seed=8)
    field = pidkl.bma_predict(chain, 10, obs, report, p, grid)
    assert field.mean.shape == (5,)
    assert field.draws_used == 6
    assert np.all(field.between_variance >= -1e-12)


def test_run_experiment(tmp_path):
    config = {
        "problem": {"name": "heat1d"},
        "observations": {"n_u": 8, "n_f": 5, "tau_f_sq": 1e-4, "seed": 21},
        "pretrain": {"n_col": 6, "n_iter": 10, "hidden": [6], "latent_dim": 2},
        "hmc": {"n_warmup": 10, "n_samples": 20, "leapfrog_steps": 3},
        "predict": {"grid": {"type": "grid", "points_per_dim": 4}, "thin": 5},
        "output_dir": str(tmp_path / "unused"),
    }
    out = tmp_path / "run"
    manifest_path = pidkl.run_experiment(json.dumps(config), str(out))
    assert os.path.exists(manifest_path)
    manifest = json.loads(open(manifest_path).read())
    for name in ("chain.csv", "summary.json", "field.csv"):
        assert name in manifest["files"]
        assert (out / name).exists()
