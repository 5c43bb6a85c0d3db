import math

import numpy as np
import pytest

import randlat as rl
from randlat import montecarlo as mc


def make_config(sides=(10,), background=rl.Laplacian(),
                density=rl.Uniform(0.0, 1.0), samples=200, seed=17, workers=2):
    model = mc.ModelSpec(box=rl.LatticeBox(sides), background=background,
                         density=density)
    return mc.McConfig(model=model, samples=samples, master_seed=seed,
                       workers=workers)


class TestBounds:
    def test_minami_bound_values(self):
        cfg = make_config(samples=50)
        n1 = mc.mc_minami(cfg, 0.5 + 0.1j, [4])
        n2 = mc.mc_minami(cfg, 0.5 + 0.1j, [4, 5])
        assert n1.bound == pytest.approx(math.pi)
        assert n2.bound == pytest.approx(math.pi ** 2)
        assert n1.passed and n2.passed

    def test_minami_with_wider_density(self):
        cfg = make_config(density=rl.Uniform(0.0, 2.0), samples=50)
        chk = mc.mc_minami(cfg, 1.0 + 0.2j, [2, 7])
        assert chk.bound == pytest.approx((math.pi / 2.0) ** 2)

    def test_wegner_bound_values(self):
        cfg = make_config(samples=50)
        n2 = mc.mc_wegner_nlevel(cfg, (0.495, 0.505), 2)
        assert n2.bound == pytest.approx(math.pi ** 2 / 200.0, rel=1e-12)
        n1 = mc.mc_wegner_nlevel(cfg, (0.475, 0.525), 1)
        assert n1.bound == pytest.approx(math.pi / 2.0, rel=1e-12)
        assert n1.passed  # vacuous bound > 1 still PASSes

    def test_wegner_monotone_in_n(self):
        cfg = make_config(samples=500, seed=4)
        interval = (0.2, 0.8)
        freqs = [mc.mc_wegner_nlevel(cfg, interval, n).estimate.mean
                 for n in (1, 2, 3)]
        assert freqs[0] >= freqs[1] >= freqs[2]

    def test_wegner_n1_matches_nonzero_count_frequency(self):
        cfg = make_config(samples=300, seed=9)
        interval = (0.4, 0.6)
        freq = mc.mc_wegner_nlevel(cfg, interval, 1).estimate.mean

        def kernel(sample):
            w = np.linalg.eigvalsh(sample.matrix)
            return 1.0 if np.count_nonzero((w >= 0.4) & (w < 0.6)) == 0 else 0.0

        zero_freq = np.mean(mc.run_realizations(cfg, kernel))
        assert freq == pytest.approx(1.0 - zero_freq)

    def test_invalid_arguments(self):
        cfg = make_config(samples=10)
        with pytest.raises(ValueError):
            mc.mc_wegner_nlevel(cfg, (0.0, math.inf), 1)
        with pytest.raises(ValueError):
            mc.mc_wegner_nlevel(cfg, (0.5, 0.4), 1)
        with pytest.raises(ValueError):
            mc.mc_wegner_nlevel(cfg, (0.0, 1.0), 0)

    def test_interval_energy(self):
        z = mc.interval_energy((0.4, 0.6))
        assert z == pytest.approx(0.5 + 0.1j)


class TestMinorSumLinkage:
    def test_per_realization_identity(self):
        cfg = make_config(sides=(8,), samples=10, seed=2)

        def kernel(sample):
            minor_sum, trace_form = mc.minor_sum_linkage(sample, 0.5 + 0.3j)
            return abs(minor_sum - trace_form) / abs(trace_form)

        residuals = mc.run_realizations(cfg, kernel)
        assert max(residuals) <= 1e-8


class TestIds:
    def test_extremes(self):
        cfg = make_config(samples=50)
        assert mc.estimate_ids(cfg, -10.0).mean == 0.0
        assert mc.estimate_ids(cfg, 10.0).mean == 1.0

    def test_symmetric_midpoint(self):
        # Laplacian + Uniform(-1, 1) has a statistically symmetric spectrum
        cfg = make_config(density=rl.Uniform(-1.0, 1.0), samples=400, seed=6)
        est = mc.estimate_ids(cfg, 0.0)
        assert abs(est.mean - 0.5) <= 3.0 * est.stderr + 1e-3

    def test_monotone_in_energy(self):
        cfg = make_config(samples=100, seed=8)
        values = [mc.estimate_ids(cfg, e).mean for e in (-1.0, 0.0, 1.0, 2.0)]
        assert values == sorted(values)


class TestDos:
    def test_matches_density_for_diagonal_model(self):
        # hopping removed: eigenvalues are the potential values, so the
        # DOS is the disorder density itself
        cfg = make_config(background=None, samples=400, seed=3)
        est = mc.estimate_dos(cfg, 0.5, 0.05)
        assert est.mean == pytest.approx(1.0, abs=3.0 * est.stderr + 0.05)

    def test_normalization_over_grid(self):
        cfg = make_config(samples=150, seed=13)
        grid = np.linspace(-2.6, 3.6, 32)
        step = grid[1] - grid[0]
        total = sum(mc.estimate_dos(cfg, e, step / 2).mean for e in grid) * step
        assert total == pytest.approx(1.0, abs=0.05)

    def test_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            mc.estimate_dos(make_config(samples=10), 0.5, 0.0)


class TestRescaledPoints:
    def test_eigenvalue_at_reference_energy(self):
        sample = rl.assemble_fixed(rl.LatticeBox((1,)), None, [0.7])
        assert mc.rescaled_points(sample, 0.7)[0] == pytest.approx(0.0)

    def test_scaling_by_volume(self):
        sample = rl.assemble_fixed(rl.LatticeBox((10,)), None,
                                   np.full(10, 0.55))
        pts = mc.rescaled_points(sample, 0.5)
        assert np.allclose(pts, 0.5)  # 10 * (0.55 - 0.5)

    def test_shift_covariance(self):
        sample = rl.assemble_fixed(rl.LatticeBox((5,)), rl.Laplacian(),
                                   np.arange(5) * 0.1)
        delta = 0.2
        shifted = mc.rescaled_points(sample, 0.3 + delta)
        assert np.allclose(shifted, mc.rescaled_points(sample, 0.3) - 5 * delta)


class TestSpacing:
    def test_synthetic_poisson_process(self):
        # harness sanity: feed actual Poisson-process draws; the KS
        # statistic against the true rate must be small
        local = np.random.default_rng(77)
        lam, window = 0.1, 100.0
        point_sets = []
        for _ in range(400):
            k = local.poisson(2 * window * lam)
            point_sets.append(local.uniform(-window, window, size=k))
        stats = mc.spacing_statistics(point_sets, window, lam)
        assert stats.ks_distance < 0.03
        assert stats.count_chi2_pvalue > 0.01
        assert stats.mean_count == pytest.approx(2 * window * lam, rel=0.1)

    def test_histogram_totals(self):
        local = np.random.default_rng(5)
        point_sets = [local.uniform(-1, 1, size=local.poisson(4.0))
                      for _ in range(50)]
        stats = mc.spacing_statistics(point_sets, 1.0, 2.0)
        assert len(stats.counts) == 50
        assert np.all(stats.gaps >= 0)

    def test_experiment_runs_end_to_end(self):
        cfg = make_config(sides=(40,), density=rl.Uniform(0.0, 15.0),
                          samples=60, seed=19)
        stats = mc.spacing_experiment(cfg, 7.5, 30.0, dos_bandwidth=1.0)
        assert stats.rate > 0
        assert np.isfinite(stats.ks_distance)

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            mc.spacing_statistics([np.array([0.1])], 1.0, 0.0)


class TestFracMomentDecay:
    def test_diagonal_model_below_floor(self):
        cfg = make_config(sides=(8,), background=None, samples=20, seed=1)
        fit = mc.frac_moment_decay(cfg, 0.5, 0.1, 0.5)
        assert fit.below_floor
        assert fit.slope == -math.inf

    def test_strong_disorder_localized(self):
        cfg = make_config(sides=(24,), density=rl.Uniform(0.0, 15.0),
                          samples=300, seed=23)
        fit = mc.frac_moment_decay(cfg, 7.5, 0.1, 0.5)
        assert fit.slope < 0
        assert fit.r_squared > 0.9

    def test_rejects_bad_parameters(self):
        cfg = make_config(sides=(10,), samples=10)
        with pytest.raises(ValueError):
            mc.frac_moment_decay(cfg, 0.5, 0.1, 1.2)
        with pytest.raises(ValueError):
            mc.frac_moment_decay(cfg, 0.5, -0.1, 0.5)
        with pytest.raises(ValueError):
            mc.frac_moment_decay(make_config(sides=(3,), samples=10),
                                 0.5, 0.1, 0.5)


class TestReproducibility:
    def test_bit_identical_across_worker_counts(self):
        for workers in (1, 3, 8):
            cfg = make_config(samples=130, seed=42, workers=workers)
            chk = mc.mc_minami(cfg, 0.5 + 0.1j, [2, 3])
            if workers == 1:
                reference = chk
            else:
                assert chk.estimate == reference.estimate

    def test_block_boundary_independence(self):
        # more samples than one scheduling block
        big = mc._BLOCK_SIZE + 37
        vals = {}
        for workers in (1, 4):
            cfg = make_config(sides=(6,), samples=big, seed=5, workers=workers)
            vals[workers] = mc.run_realizations(
                cfg, lambda s: float(np.linalg.eigvalsh(s.matrix)[0]))
        assert vals[1] == vals[4]

    def test_estimator_is_pure(self):
        cfg = make_config(samples=60, seed=31)
        a = mc.estimate_ids(cfg, 0.7)
        b = mc.estimate_ids(cfg, 0.7)
        assert a == b
