import math
import warnings

import numpy as np
import pytest

from spintomo.measurement import Axis, AxisSet, InfeasibleDesignError, error_scales
from spintomo.optimize import random_axes
from spintomo.polarization import QuditDim, gamma_table, polarization_operator
from spintomo.reconstruct import (
    DensityMatrix,
    MeasurementRecord,
    ReconstructionEstimate,
    chi_vector,
    covariance_form_error_squared,
    error_from_covariances,
    estimate_polarization,
    exact_error,
    exact_error_squared,
    exact_estimates,
    mle_project,
    noise_matrix,
    noise_weighted_norm_squared,
    outcome_probabilities,
    random_density_matrix,
    reconstruct_state,
    saturating_state,
    sigma_star,
    simulate_measurements,
    simulate_squared_errors,
)


def _up(d):
    psi = np.zeros(d)
    psi[0] = 1
    return DensityMatrix.pure(psi)


def _axis_variances(rho, design):
    t = design.gamma.t
    p = np.array([outcome_probabilities(rho, a) for a in design.axis_set])
    return p @ (t.T ** 2) - (p @ t.T) ** 2


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix.from_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix.from_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        DensityMatrix.from_matrix(np.array([[0.5, 0.1], [0.0, 0.5]]))
    rho = random_density_matrix(4, 0)
    assert np.all(rho.eigenvalues() > -1e-12)
    assert random_density_matrix(5, 1, rank=1).eigenvalues()[-1] == pytest.approx(1.0)


def test_outcome_probabilities():
    p = outcome_probabilities(_up(4), Axis(0, 0))
    np.testing.assert_allclose(p, [1, 0, 0, 0], atol=1e-15)
    p = outcome_probabilities(DensityMatrix.maximally_mixed(5), Axis(1.1, 0.7))
    np.testing.assert_allclose(p, 0.2, atol=1e-15)
    for beta in (0.3, 1.2, 2.8):
        p = outcome_probabilities(_up(2), Axis(0.4, beta))
        assert p[0] == pytest.approx(math.cos(beta / 2) ** 2, abs=1e-14)


def test_simulation_counts():
    axes = random_axes(3, 5, 0)
    rec = simulate_measurements(random_density_matrix(3, 2), axes, 1000, seed=7)
    assert np.all(rec.counts.sum(axis=1) == 1000)
    north = simulate_measurements(_up(3), AxisSet(3, [(0, 0)]), 500, seed=1)
    assert north.counts[0, 0] == 500
    again = simulate_measurements(random_density_matrix(3, 2), axes, 1000, seed=7)
    np.testing.assert_array_equal(rec.counts, again.counts)


def test_simulation_streams_are_per_axis():
    rho = random_density_matrix(3, 3)
    axes = random_axes(3, 6, 4)
    full = simulate_measurements(rho, axes, 300, seed=9)
    prefix = simulate_measurements(rho, AxisSet(3, axes.axes[:3]), 300, seed=9)
    np.testing.assert_array_equal(full.counts[:3], prefix.counts)


def test_law_of_large_numbers():
    rho = random_density_matrix(4, 5)
    axes = random_axes(4, 7, 5)
    rec = simulate_measurements(rho, axes, 10 ** 6, seed=3)
    expected = np.array([outcome_probabilities(rho, a) for a in axes])
    assert np.max(np.abs(rec.frequencies - expected)) < 5e-3


def test_record_validation():
    axes = random_axes(2, 3, 0)
    with pytest.raises(ValueError):
        MeasurementRecord(axes, 10, np.array([[5, 5], [5, 4], [10, 0]]))
    with pytest.raises(ValueError):
        MeasurementRecord(axes, 10, np.zeros((2, 2)))


def test_estimate_polarization():
    d = 4
    axes = random_axes(d, 7, 1)
    rho = random_density_matrix(d, 1)
    rec = simulate_measurements(rho, axes, 50, seed=2)
    est = estimate_polarization(rec)
    np.testing.assert_allclose(est[:, 0], 1 / math.sqrt(d), atol=1e-15)
    g = gamma_table(d)
    assert np.all(np.abs(est) <= np.abs(g.t).max(axis=1) + 1e-15)
    # noiseless estimates equal direct traces
    exact = exact_estimates(rho, axes)
    for v, a in enumerate(axes):
        from spintomo.polarization import rotation_operator

        R = rotation_operator(d, a.alpha, a.beta)
        for ell in range(d):
            direct = np.trace(rho.matrix @ R @ polarization_operator(d, (ell, 0)) @ R.conj().T).real
            assert exact[v, ell] == pytest.approx(direct, abs=1e-13)


def test_noiseless_round_trip():
    rng = np.random.default_rng(0)
    for d in range(2, 11):
        for _ in range(3):
            rho = random_density_matrix(d, rng)
            design = error_scales(random_axes(d, 2 * d - 1 + int(rng.integers(0, 3)), rng))
            est = reconstruct_state(design, exact_estimates(rho, design.axis_set))
            assert np.linalg.norm(est.matrix - rho.matrix) < 1e-9
    mixed = DensityMatrix.maximally_mixed(3)
    design = error_scales(random_axes(3, 5, 0))
    np.testing.assert_allclose(reconstruct_state(design, exact_estimates(mixed, design.axis_set)).matrix, np.eye(3) / 3, atol=1e-12)


def test_reconstruct_needs_feasible():
    design = error_scales(random_axes(3, 4, 0))
    with pytest.raises(InfeasibleDesignError):
        reconstruct_state(design, np.zeros((4, 3)))


def test_finite_n_gives_negative_eigenvalues():
    d = 4
    design = error_scales(random_axes(d, 7, 3))
    seen = False
    for seed in range(20):
        rec = simulate_measurements(_up(d), design.axis_set, 20, seed)
        est = reconstruct_state(design, estimate_polarization(rec))
        assert np.trace(est.matrix).real == pytest.approx(1.0, abs=1e-10)
        seen |= est.eigenvalues().min() < 0
    assert seen


def test_mle_projection():
    rho = random_density_matrix(3, 8)
    out = mle_project(rho)
    np.testing.assert_allclose(np.sort(out.eigenvalues()), np.sort(rho.eigenvalues()), atol=1e-12)
    out = mle_project(ReconstructionEstimate(QuditDim(2), np.diag([1.2, -0.2]).astype(complex)))
    np.testing.assert_allclose(np.sort(out.eigenvalues()), [0, 1], atol=1e-15)


def _simplex_projection(v):
    # brute-force oracle: try every support size
    best = None
    for k in range(1, len(v) + 1):
        idx = np.argsort(v)[::-1][:k]
        shift = (1 - v[idx].sum()) / k
        w = np.zeros_like(v)
        w[idx] = v[idx] + shift
        if np.all(w >= 0):
            dist = np.linalg.norm(w - v)
            if best is None or dist < best[0]:
                best = (dist, w)
    return best[1]


def test_mle_matches_simplex_projection():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(2, 7))
        vals = rng.normal(size=d)
        vals = vals - vals.mean() + 1 / d
        q = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
        est = ReconstructionEstimate(QuditDim(d), (q * vals) @ q.conj().T)
        out = mle_project(est)
        np.testing.assert_allclose(np.sort(out.eigenvalues()), np.sort(_simplex_projection(vals)), atol=1e-12)


def test_mle_never_farther_from_truth():
    rng = np.random.default_rng(4)
    for _ in range(40):
        d = int(rng.integers(2, 6))
        rho = random_density_matrix(d, rng, rank=1)
        design = error_scales(random_axes(d, 2 * d - 1, rng))
        rec = simulate_measurements(rho, design.axis_set, 30, int(rng.integers(1 << 30)))
        raw = reconstruct_state(design, estimate_polarization(rec))
        assert np.linalg.norm(mle_project(raw).matrix - rho.matrix) <= np.linalg.norm(raw.matrix - rho.matrix) + 1e-12


def test_noise_matrix_properties():
    design = error_scales(random_axes(4, 9, 6))
    n0 = noise_matrix(design, 0).matrix
    np.testing.assert_allclose(n0, [[1 / 9]])
    for ell in range(4):
        nm = noise_matrix(design, ell).matrix
        np.testing.assert_allclose(nm, nm.conj().T, atol=1e-15)
        assert np.linalg.eigvalsh(nm).min() > -1e-12
        blk = design.blocks[ell]
        pinv = np.linalg.pinv(blk.matrix)
        w = np.diag(pinv.conj().T @ pinv).real
        direct = blk.matrix.conj().T @ np.diag(w) @ blk.matrix
        np.testing.assert_allclose(nm, direct, atol=1e-12)
        assert np.trace(nm).real == pytest.approx(np.sum(np.linalg.norm(blk.matrix, axis=1) ** 2 * w))


def test_chi_finite():
    for d in range(2, 11):
        chi = chi_vector(error_scales(random_axes(d, 2 * d + 1, d)))
        assert all(np.all(np.isfinite(c)) for c in chi.blocks)


def test_error_forms_agree():
    rng = np.random.default_rng(5)
    for _ in range(30):
        d = int(rng.integers(2, 7))
        rho = random_density_matrix(d, rng)
        design = error_scales(random_axes(d, 2 * d - 1 + int(rng.integers(0, 4)), rng))
        n = int(rng.integers(10, 10 ** 4))
        a = exact_error_squared(design, rho, n)
        b = covariance_form_error_squared(design, rho, n)
        c = error_from_covariances(design, _axis_variances(rho, design) / n)
        assert b == pytest.approx(a, rel=1e-8)
        assert c == pytest.approx(a, rel=1e-8)


def test_mixed_qubit_error():
    design = error_scales(random_axes(2, 4, 7))
    rho = DensityMatrix.maximally_mixed(2)
    # only degree 1 contributes; every axis has variance t^2 = 1/2
    expected = 0.5 * np.sum(np.abs(design.blocks[1].pinv()) ** 2) / 100
    assert exact_error(design, rho, 100) ** 2 == pytest.approx(expected, rel=1e-12)


def test_bound_holds():
    rng = np.random.default_rng(6)
    for _ in range(500):
        d = int(rng.integers(2, 7))
        rho = random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))
        design = error_scales(random_axes(d, 2 * d - 1 + int(rng.integers(0, 5)), rng))
        n = 1000
        assert exact_error(design, rho, n) ** 2 < design.quantum_scale_squared / n


def test_error_scaling_with_shots():
    design = error_scales(random_axes(3, 6, 2))
    rho = random_density_matrix(3, 2)
    e = [exact_error(design, rho, n) for n in (100, 1000, 10000)]
    assert e[0] / e[1] == pytest.approx(math.sqrt(10), rel=1e-12)
    assert e[1] / e[2] == pytest.approx(math.sqrt(10), rel=1e-12)
    for n, exact in zip((100, 1000, 10000), e):
        sq = simulate_squared_errors(design, rho, n, 4000, seed=n)
        se = sq.std(ddof=1) / math.sqrt(len(sq))
        assert abs(sq.mean() - exact ** 2) < 3 * se


def test_monte_carlo_matches_closed_form():
    design = error_scales(random_axes(4, 8, 8))
    rho = random_density_matrix(4, 8)
    n = 500
    sq = simulate_squared_errors(design, rho, n, 10 ** 4, seed=2021)
    se = sq.std(ddof=1) / math.sqrt(len(sq))
    assert abs(sq.mean() - exact_error(design, rho, n) ** 2) < 3 * se


def test_simulated_errors_match_pipeline():
    design = error_scales(random_axes(3, 5, 1))
    rho = random_density_matrix(3, 1)
    sq = simulate_squared_errors(design, rho, 200, 1, seed=11)
    rec = simulate_measurements(rho, design.axis_set, 200, seed=11)
    # same per-axis streams, but trials draw with size=1, so only the distribution is shared
    assert sq.shape == (1,)
    est = reconstruct_state(design, estimate_polarization(rec))
    assert np.linalg.norm(est.matrix - rho.matrix) ** 2 < 1


def test_shot_noise_covariance_structure():
    d, n, trials = 3, 200, 4000
    design = error_scales(random_axes(d, 5, 3))
    rho = random_density_matrix(d, 3)
    t = design.gamma.t
    samples = np.array(
        [estimate_polarization(simulate_measurements(rho, design.axis_set, n, seed=s)) for s in range(trials)]
    )
    var = samples.var(axis=0, ddof=1)
    expected = _axis_variances(rho, design) / n
    # var of sample variance ~ 2 sigma^4 / (trials - 1) for near-normal estimates
    se = expected * math.sqrt(2 / (trials - 1))
    assert np.all(var[:, 0] < 1e-20)
    assert np.all(np.abs(var[:, 1:] - expected[:, 1:]) < 4 * se[:, 1:])
    cross = np.corrcoef(samples[:, 0, 1], samples[:, 1, 1])[0, 1]
    assert abs(cross) < 4 / math.sqrt(trials)
    assert t.shape == (d, d)


def test_variance_saturation():
    d, n, trials = 4, 100, 5000
    axis = Axis(0.7, 1.2)
    g = gamma_table(d)
    for ell in range(1, d):
        rho = saturating_state(d, ell, axis)
        samples = np.array(
            [estimate_polarization(simulate_measurements(rho, AxisSet(d, [axis]), n, seed=s))[0, ell] for s in range(trials)]
        )
        var = samples.var(ddof=1)
        target = g.gamma[ell] ** 2 / n
        assert abs(var - target) < 3 * target * math.sqrt(2 / (trials - 1))


def test_sigma_star():
    rng = np.random.default_rng(9)
    for d in (2, 3, 4, 5):
        design = error_scales(random_axes(d, 2 * d + 1, rng))
        n = 100
        star, e_star = sigma_star(design, n)
        assert np.trace(star.matrix).real == pytest.approx(1.0, abs=1e-12)
        for _ in range(50):
            rho = random_density_matrix(d, rng)
            e = exact_error(design, rho, n)
            assert e <= e_star + 1e-12
            diff = rho.matrix - star.matrix
            identity = e_star ** 2 - noise_weighted_norm_squared(design, diff) / n
            assert e ** 2 == pytest.approx(identity, abs=1e-9)


def test_a_posteriori_estimate_close_at_large_n():
    design = error_scales(random_axes(3, 6, 5))
    rho = random_density_matrix(3, 5)
    n = 10 ** 6
    rec = simulate_measurements(rho, design.axis_set, n, seed=5)
    raw = reconstruct_state(design, estimate_polarization(rec))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        post = exact_error(design, raw, n)
    assert post == pytest.approx(exact_error(design, rho, n), rel=0.02)
    assert exact_error(design, mle_project(raw), n) == pytest.approx(exact_error(design, rho, n), rel=0.02)


def test_exact_error_rejects_bad_n_and_infeasible():
    design = error_scales(random_axes(3, 5, 0))
    with pytest.raises(ValueError):
        exact_error(design, DensityMatrix.maximally_mixed(3), 0)
    with pytest.raises(InfeasibleDesignError):
        exact_error(error_scales(random_axes(3, 3, 0)), DensityMatrix.maximally_mixed(3), 10)
