import math

import numpy as np
import pytest

from qrptomo import design, fock, learn
from qrptomo import dynamics as dyn
from qrptomo import reconstruct as rc
from qrptomo.exceptions import ConvergenceError, RankDeficiencyError

FAST = rc.McmcConfig(n_samples=256, thinning=16)


def ideal_map(D):
    return design.build_idealised_map(design.default_displacements(D).alphas, D)


@pytest.mark.parametrize("D", [2, 3, 4])
def test_linear_invert_exact(D):
    beta = ideal_map(D)
    rng = np.random.default_rng(D)
    for _ in range(10):
        Y = fock.param_of(fock.random_density_matrix(D, rng))
        est = rc.linear_invert(beta, beta.predict(Y))
        assert np.max(np.abs(est.Y_est - Y)) < 1e-10


def test_linear_invert_vacuum():
    beta = ideal_map(3)
    X = beta.predict(fock.param_of(fock.fock_dm(0, 3)))
    est = rc.linear_invert(beta, X)
    assert np.max(np.abs(est.rho_LS - fock.fock_dm(0, 3))) < 1e-9
    assert est.min_eigenvalue == pytest.approx(0, abs=1e-9)
    assert est.kappa == pytest.approx(design.condition_number(beta.M))


def test_linear_invert_perturbation_bound():
    beta = ideal_map(3)
    smin = np.linalg.svd(beta.M, compute_uv=False)[-1]
    rng = np.random.default_rng(0)
    for _ in range(100):
        Y = fock.param_of(fock.random_density_matrix(3, rng))
        X = beta.predict(Y)
        X[rng.integers(X.size)] += 0.5
        err = np.linalg.norm(rc.linear_invert(beta, X).Y_est - Y)
        # ||M^-1 dX|| <= ||dX|| / sigma_min = kappa ||dX|| / sigma_max
        assert err <= 0.5 / smin * (1 + 1e-12)


def test_linear_invert_rejects_singular_map():
    beta = ideal_map(2)
    bad = design.AffineMap(2, beta.V, np.vstack([beta.M[:2], beta.M[:1]]))
    with pytest.raises(RankDeficiencyError) as err:
        rc.linear_invert(bad, np.zeros(3))
    assert err.value.kappa == math.inf
    with pytest.raises(ValueError):
        rc.linear_invert(beta, np.zeros(4))


def test_linear_invert_overcomplete():
    D = 2
    rng = np.random.default_rng(1)
    alphas = rng.normal(size=6) + 1j * rng.normal(size=6)
    beta = design.build_idealised_map(alphas, D)
    Y = fock.param_of(fock.random_density_matrix(D, rng))
    assert np.allclose(rc.linear_invert(beta, beta.predict(Y)).Y_est, Y, atol=1e-10)


def test_project_to_simplex():
    assert np.allclose(rc.project_to_simplex(np.array([0.5, 0.5])), [0.5, 0.5])
    assert np.allclose(rc.project_to_simplex(np.array([1.2, -0.2])), [1, 0])
    v = rc.project_to_simplex(np.array([0.6, 0.5, -0.1]))
    assert np.allclose(v, [0.55, 0.45, 0]) and v.sum() == pytest.approx(1)


def test_bme_concentrates():
    rng = np.random.default_rng(2)
    rho = fock.random_density_matrix(3, rng)
    res = rc.bayesian_mean(rho, 1e8, FAST)
    assert fock.fidelity(res.rho, rho) > 0.999


def test_bme_maximally_mixed_fixed_point():
    D = 3
    res = rc.bayesian_mean(np.eye(D) / D, 1000 * 8, rc.McmcConfig(n_samples=512, thinning=16))
    # each sample sits within a few sigma of I/D; the mean of 512 even closer
    assert np.max(np.abs(res.rho - np.eye(D) / D)) < 3 * res.sigma


def test_bme_restores_physicality():
    lin = np.diag([1.05, -0.05]).astype(complex)
    res = rc.bayesian_mean(lin, 3000, FAST)
    w = np.linalg.eigvalsh(res.rho)
    assert w[0] > 0
    fock.check_density_matrix(res.rho)
    assert 0.05 <= res.acceptance_rate <= 0.8


def test_bme_variance_mode_is_wider():
    lin = fock.fock_dm(0, 2)
    std = rc.bayesian_mean(lin, 3000, FAST)
    var = rc.bayesian_mean(lin, 3000, rc.McmcConfig(n_samples=256, thinning=16, sigma_mode="variance"))
    assert var.sigma == pytest.approx(1 / math.sqrt(3000)) and std.sigma == pytest.approx(1 / 3000)
    assert fock.fidelity(var.rho, lin) < fock.fidelity(std.rho, lin)


def test_bme_signals_bad_acceptance():
    with pytest.raises(ConvergenceError):
        rc.bayesian_mean(np.eye(2) / 2, 3000, rc.McmcConfig(n_samples=64, thinning=8, target_acceptance=0.97))


def test_bme_deterministic():
    lin = np.diag([0.7, 0.3]).astype(complex)
    a = rc.bayesian_mean(lin, 3000, FAST)
    b = rc.bayesian_mean(lin, 3000, FAST)
    assert np.array_equal(a.rho, b.rho)


def test_mcmc_config_validation():
    with pytest.raises(ValueError):
        rc.McmcConfig(n_samples=0)
    with pytest.raises(ValueError):
        rc.McmcConfig(sigma_mode="other")
    assert rc.McmcConfig().n_samples == 1024 and rc.McmcConfig().thinning == 128


def test_reconstruct_ideal_pipeline_vacuum():
    beta = ideal_map(2)
    X, _ = learn.measure_states([fock.fock_dm(0, 2)], design.default_displacements(2).alphas,
                                dyn.DeviceParams(), learn.IDEAL)
    rho, lin, res = rc.reconstruct_state(beta, X[0], FAST)
    assert fock.fidelity(rho, fock.fock_dm(0, 2)) >= 0.999
    assert res.sigma == pytest.approx(1 / 3000)


def test_posterior_consistency_with_shots():
    D = 2
    beta = ideal_map(D)
    alphas = design.default_displacements(D).alphas
    # full rank, so the fidelity is not pinned near 1 by the positivity constraint
    truth = np.array([[0.7, 0.1 + 0.1j], [0.1 - 0.1j, 0.3]])
    ops = learn.observable_operators(D, alphas, dyn.DeviceParams(), learn.IDEAL)
    medians = []
    for shots in (100, 1000, 10000):
        settings = learn.AcquisitionSettings(noise=False, idealized=True, shots=shots,
                                             readout=dyn.PERFECT_READOUT, degrade=0.0)
        F = []
        for seed in range(10):
            X, _ = learn.measure_states([truth], alphas, dyn.DeviceParams(), settings, seed, ops)
            rho, _, _ = rc.reconstruct_state(beta, X[0], rc.McmcConfig(n_samples=128, thinning=8, seed=seed), shots)
            F.append(fock.fidelity(rho, truth))
        medians.append(np.median(F))
    assert medians[0] <= medians[1] <= medians[2]


def test_bme_not_worse_than_clipped_ls():
    D = 3
    beta = ideal_map(D)
    alphas = design.default_displacements(D).alphas
    settings = learn.AcquisitionSettings(noise=False, idealized=True, shots=1000,
                                         readout=dyn.PERFECT_READOUT, degrade=0.0)
    with pytest.warns(fock.TruncationWarning):
        kittens = learn.kitten_states(D, 0.6)
    gaps = []
    for i, target in enumerate(kittens.values()):
        X, _ = learn.measure_states([target], alphas, dyn.DeviceParams(), settings, seed=i)
        rho, lin, _ = rc.reconstruct_state(beta, X[0], FAST)
        clipped = rc._clip_eigenvalues(lin.rho_LS, 0.0)
        gaps.append(fock.fidelity(rho, target) - fock.fidelity(clipped, target))
    assert np.median(gaps) >= -0.02


def test_bootstrap_zero_variance():
    recs = [dyn.sample_observable(1.0, 1000, seed=s) for s in range(3)]
    mean, se = rc.bootstrap(recs, B=200)
    assert mean == 1.0 and se == 0.0


def test_bootstrap_binomial_se():
    rec = dyn.sample_observable(0.0, 1000, seed=1)
    _, se = rc.bootstrap([rec], B=2000, statistic="first")
    p = rec.p_excited
    assert se == pytest.approx(2 * math.sqrt(0.25 / 1000), rel=0.15)
    assert se == pytest.approx(2 * math.sqrt(p * (1 - p) / 1000), rel=0.15)


def test_bootstrap_shot_scaling():
    a = dyn.sample_observable(0.0, 1000, seed=2)
    b = dyn.sample_observable(0.0, 2000, seed=2)
    _, se1 = rc.bootstrap([a], B=2000, statistic="first", seed=0)
    _, se2 = rc.bootstrap([b], B=2000, statistic="first", seed=0)
    assert se1 / se2 == pytest.approx(math.sqrt(2), rel=0.2)


def test_bootstrap_contract():
    recs = [[dyn.sample_observable(0.2, 100, seed=s)] for s in range(4)]
    assert rc.bootstrap(recs, B=150, seed=3) == rc.bootstrap(recs, B=150, seed=3)
    m, se, samples = rc.bootstrap(recs, B=150, statistic=lambda x: float(np.max(x)), return_samples=True)
    assert samples.shape == (150,) and se > 0
    with pytest.raises(ValueError):
        rc.bootstrap(recs, B=50)
