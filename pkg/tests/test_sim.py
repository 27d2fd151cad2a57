"""Monte-Carlo harness tests: determinism, calibration, diagnostics."""

import math

import numpy as np
import pytest

from sparse_detect import rng
from sparse_detect.dists import (
    FiniteDiscrete,
    Gaussian,
    GenGaussian,
    Shifted,
    to_spec,
)
from sparse_detect.errors import ConfigError, InvalidParameterError
from sparse_detect.hctest import hc_statistic, hc_threshold
from sparse_detect.sim import (
    ExperimentConfig,
    estimate_gamma,
    estimate_gamma_family,
    family_mixture,
    phase_sweep,
    run_cell,
    wilson_halfwidth,
)


def small_config(**overrides):
    base = dict(
        family="idj",
        beta_grid=(0.6, 0.9),
        r_grid=(0.5,),
        n_list=(64,),
        replicates=25,
        tests=("hc", "lr", "max"),
        seed=1234,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfig:
    def test_valid(self):
        cfg = small_config()
        assert len(cfg.cells()) == 2 * 1 * 1 * 3

    def test_hc_needs_n_at_least_16(self):
        with pytest.raises(ConfigError):
            small_config(n_list=(8,))

    def test_lr_allows_small_n(self):
        cfg = small_config(n_list=(4,), tests=("lr",))
        assert cfg.n_list == (4,)

    def test_empty_grids_rejected(self):
        with pytest.raises(ConfigError):
            small_config(beta_grid=())
        with pytest.raises(ConfigError):
            small_config(replicates=0)
        with pytest.raises(ConfigError):
            small_config(tests=("hc", "bogus"))

    def test_cell_order_is_beta_r_n_test(self):
        cfg = ExperimentConfig(
            family="idj",
            beta_grid=(0.9, 0.6),
            r_grid=(0.7, 0.2),
            n_list=(128, 64),
            replicates=1,
            tests=("max", "hc"),
            seed=0,
        )
        cells = cfg.cells()
        keys = [(b, r, n, t) for _, b, r, n, t in cells]
        assert keys == sorted(keys, key=lambda k: (k[0], k[1], k[2], k[3]))
        assert [c[0] for c in cells] == list(range(len(cells)))

    def test_round_trip_dict(self):
        cfg = small_config()
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
        assert len(cfg.config_hash()) == 64


class TestFamilyMixture:
    def test_idj_mapping(self):
        mix = family_mixture("idj", {}, 0.8, 0.55, 10**4)
        assert mix.null_dist == Gaussian(0.0, 1.0)
        assert mix.alt_dist == Gaussian(math.sqrt(1.6 * math.log(10**4)), 1.0)
        assert mix.epsilon == pytest.approx(10**-2.2, rel=1e-12)

    def test_hetero_mapping(self):
        mix = family_mixture("hetero", {"sigma2": 4.0}, 0.25, 0.6, 100)
        assert mix.alt_dist.sd == 2.0

    def test_gglocation_mapping(self):
        mix = family_mixture("gglocation", {"tau": 2.0}, 0.5, 0.6, 1000)
        assert mix.null_dist == GenGaussian(2.0)
        assert isinstance(mix.alt_dist, Shifted)
        assert mix.alt_dist.shift == pytest.approx(math.sqrt(0.5 * math.log(1000)))

    def test_signal_rescaled_per_n(self):
        small = family_mixture("idj", {}, 0.5, 0.6, 100)
        large = family_mixture("idj", {}, 0.5, 0.6, 10**6)
        assert large.alt_dist.mean > small.alt_dist.mean


class TestWilson:
    def test_hand_value(self):
        z = 1.959963984540054
        want = z * math.sqrt(10 * 90 / 100 + z * z / 4) / (100 + z * z)
        assert wilson_halfwidth(10, 100) == pytest.approx(want, rel=1e-12)

    def test_stable_at_extremes(self):
        assert 0.0 < wilson_halfwidth(0, 50) < 0.1
        assert wilson_halfwidth(50, 50) == wilson_halfwidth(0, 50)


class TestRunCell:
    def test_identical_seeds_identical_cells(self):
        cfg = small_config()
        cell = cfg.cells()[0]
        assert run_cell(cfg, cell) == run_cell(cfg, cell)

    def test_different_seed_changes_rates(self):
        cfg_a = small_config(replicates=40)
        cfg_b = small_config(replicates=40, seed=999)
        cell = cfg_a.cells()[1]
        a = run_cell(cfg_a, cell)
        b = run_cell(cfg_b, cfg_b.cells()[1])
        assert (a.type1_rate, a.type2_rate) != (b.type1_rate, b.type2_rate)

    def test_singular_custom_family_separates_exactly(self):
        # epsilon = 1 with the alternative off the null support: the
        # likelihood rule is never wrong in either direction
        cfg = ExperimentConfig(
            family="custom",
            beta_grid=(0.0,),  # epsilon = n^0 = 1
            r_grid=(0.0,),
            n_list=(32,),
            replicates=50,
            tests=("lr",),
            seed=7,
            family_params={
                "null": to_spec(FiniteDiscrete(((0.0, 0.5), (1.0, 0.5)))),
                "alt": to_spec(FiniteDiscrete(((2.0, 1.0),))),
            },
        )
        cell = run_cell(cfg, cfg.cells()[0])
        assert cell.total_error == 0.0

    def test_beyond_beta_one_is_undetectable(self):
        # sparsity exponent above 1: likelihood test near-powerless
        cfg = ExperimentConfig(
            family="idj",
            beta_grid=(1.2,),
            r_grid=(0.5,),
            n_list=(10**4,),
            replicates=500,
            tests=("lr",),
            seed=42,
        )
        cell = run_cell(cfg, cfg.cells()[0])
        assert cell.total_error >= 0.9


class TestPhaseSweep:
    def test_single_cell_single_row(self):
        cfg = small_config(beta_grid=(0.7,), tests=("max",))
        table = phase_sweep(cfg)
        assert len(table.cells) == 1
        assert len(table.beta_star) == 1

    def test_overlay_column_matches_closed_form(self):
        cfg = small_config(tests=("max",), r_grid=(0.25,))
        table = phase_sweep(cfg)
        assert all(b == pytest.approx(0.75) for b in table.beta_star)

    def test_csv_shape_and_roundtrip(self):
        cfg = small_config(replicates=10)
        table = phase_sweep(cfg)
        lines = table.to_csv().strip().split("\n")
        assert lines[0] == table.CSV_HEADER
        assert len(lines) == 1 + len(table.cells)
        first = lines[1].split(",")
        assert float(first[0]) == table.cells[0].beta
        assert first[3] == table.cells[0].test

    def test_worker_counts_do_not_change_bytes(self):
        cfg = small_config(replicates=15)
        csv_1 = phase_sweep(cfg, workers=1).to_csv()
        csv_2 = phase_sweep(cfg, workers=2).to_csv()
        csv_4 = phase_sweep(cfg, workers=4).to_csv()
        assert csv_1 == csv_2 == csv_4

    def test_manifest_fields(self):
        cfg = small_config(replicates=5, tests=("lr",))
        table = phase_sweep(cfg)
        manifest = table.manifest()
        assert manifest["seed"] == cfg.seed
        assert manifest["config_hash"] == cfg.config_hash()
        assert manifest["worker_count"] == 1
        assert manifest["wall_time_s"] > 0

    def test_lr_never_clearly_beaten(self):
        # likelihood-ratio optimality up to Monte-Carlo noise
        cfg = ExperimentConfig(
            family="idj",
            beta_grid=(0.55,),
            r_grid=(0.8,),
            n_list=(10**3,),
            replicates=200,
            tests=("hc", "lr", "max"),
            seed=42,
        )
        table = phase_sweep(cfg, workers=2)
        by_test = {c.test: c for c in table.cells}
        lr = by_test["lr"]
        for other in ("hc", "max"):
            cell = by_test[other]
            slack = 2.0 * (lr.wilson_ci_halfwidth + cell.wilson_ci_halfwidth)
            assert lr.total_error <= cell.total_error + slack

    def test_monotone_phase_separation(self):
        # inside-the-detectable-region cells beat outside cells clearly
        cfg = ExperimentConfig(
            family="idj",
            beta_grid=(0.52, 0.95),
            r_grid=(0.3,),  # boundary sits at 0.7955
            n_list=(10**4,),
            replicates=150,
            tests=("hc",),
            seed=42,
        )
        table = phase_sweep(cfg, workers=2)
        inside = table.select(beta=0.52)[0]
        outside = table.select(beta=0.95)[0]
        assert inside.total_error < outside.total_error


class TestHCTypeOneTrend:
    def test_null_rejection_rate_never_rises_significantly(self):
        # the threshold grows with n, so the true null rate drifts down;
        # the drift (~0.01 per decade here) sits below what 500 fixed-seed
        # replicates resolve, so the check is one-sided with noise slack
        rates = []
        reps = 500
        for n in (10**3, 10**4, 10**5):
            thr = hc_threshold(n, 0.1)
            rejects = 0
            for rep in range(reps):
                ys = Gaussian().sample(n, rng.stream(42, n, rep, 0))
                stat, _ = hc_statistic(ys, Gaussian())
                rejects += stat > thr
            rates.append(rejects / reps)
        noise = 2.0 * 2.0 * wilson_halfwidth(int(rates[0] * reps), reps)
        assert rates[1] <= rates[0] + noise
        assert rates[2] <= rates[1] + noise


class TestEstimateGamma:
    def test_identical_pair_is_zero(self):
        diag = estimate_gamma(
            Gaussian(), Gaussian(), [10**3, 10**4], np.arange(0.15, 1.0, 0.1)
        )
        assert np.allclose(diag.ratios, 0.0, atol=1e-12)
        assert diag.converged

    def test_laplace_location_pair_approaches_target(self):
        tau, r = 1.0, 0.5
        target = lambda s: s - abs(s - r)
        devs = []
        for n in (10**3, 10**4, 10**5, 10**6):
            q = GenGaussian(tau)
            g = Shifted(q, (r * math.log(n)) ** (1.0 / tau))
            s_lo = max(0.1, 1.0 / math.log2(n) + 1e-9)
            diag = estimate_gamma(q, g, [n], np.arange(s_lo, 2.0001, 0.05))
            devs.append(diag.deviation_from(target, n))
            # finite-n estimates approach the limit from below
            targets = np.array([target(s) for s in diag.s_grid])
            assert float(np.max(diag.ratios[0] - targets)) <= 1e-12
        assert devs == sorted(devs, reverse=True)
        assert devs[-1] == pytest.approx(2 * math.log(2) / math.log(10**6), abs=1e-9)

    def test_gaussian_location_pair_approaches_substitution_target(self):
        r = 0.25
        target = lambda s: 2.0 * math.sqrt(r * s) - r
        devs = []
        for n in (10**3, 10**5):
            g = Gaussian(math.sqrt(2 * r * math.log(n)), 1.0)
            s_lo = max(0.1, 1.0 / math.log2(n) + 1e-9)
            diag = estimate_gamma(Gaussian(), g, [n], np.arange(s_lo, 2.0001, 0.05))
            devs.append(diag.deviation_from(target, n))
        assert devs[1] < devs[0]

    def test_family_diagnostic_and_convergence_flags(self):
        s_grid = np.arange(0.15, 2.0001, 0.05)
        # the 1e3 -> 1e4 step is 2 ln 2 (1/ln 1e3 - 1/ln 1e4) = 0.0502 > 0.05,
        # deterministically flagged
        early = estimate_gamma_family(
            "gglocation", {"tau": 1.0}, 0.5, [10**3, 10**4], s_grid
        )
        assert any(f[0] == 10**3 and f[1] == 10**4 for f in early.flags)
        assert not early.converged
        # by 1e5 -> 1e6 the step has shrunk to 0.0201, below threshold
        late = estimate_gamma_family(
            "gglocation", {"tau": 1.0}, 0.5, [10**5, 10**6], s_grid
        )
        assert late.converged

    def test_s_grid_floor_enforced(self):
        with pytest.raises(InvalidParameterError):
            estimate_gamma(Gaussian(), Gaussian(1.0, 1.0), [10**3], [0.05, 0.5])

    def test_quantile_resolution_guard(self):
        with pytest.raises(InvalidParameterError):
            estimate_gamma(Gaussian(), Gaussian(1.0, 1.0), [10**6], [3.0])
