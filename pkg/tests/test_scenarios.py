import math

import numpy as np
import pytest

from nfnoma.rates import HIGH, LOW, EffectiveGains, inter_cluster_interference
from nfnoma.scenarios import (
    ScenarioConfig,
    dbm_to_watts,
    draw_drop,
    draw_single_focus_drop,
    draw_split_drop,
    monte_carlo,
    run_scheme,
    run_trial,
    sweep_config,
    total_interference,
    trial_rng,
    watts_to_dbm,
)

# compact near-field geometry: the reference radii shrunk to the focusing
# range of a 128-element array (ranges scale with aperture^2 / wavelength)
R16 = tuple((lo / 16, hi / 16) for lo, hi in ((30, 50), (35, 55), (60, 80), (40, 60)))


def desk_config(framework="single", **kw):
    kw.setdefault("seed", 7)
    kw.setdefault("num_antennas", 128)
    kw.setdefault("radius_ranges_m", R16)
    kw.setdefault("p_max_w", dbm_to_watts(20.0))
    return ScenarioConfig(framework=framework, **kw)


class TestConfig:
    def test_defaults(self):
        cfg = ScenarioConfig(framework="single", seed=0)
        assert cfg.num_antennas == 512
        assert cfg.num_rf_chains == 4
        assert cfg.aod_offset_deg == 0.1
        assert cfg.same_angle_pairs == ((3, 2),)
        assert cfg.noise_w == pytest.approx(1e-12)
        cfg2 = ScenarioConfig(framework="split", seed=0)
        assert cfg2.aod_offset_deg == 1.0
        assert cfg2.same_angle_pairs == ()

    def test_validation(self):
        with pytest.raises(ValueError):
            ScenarioConfig(framework="both", seed=0)
        with pytest.raises(ValueError):
            ScenarioConfig(framework="single", seed=0,
                           angle_ranges_deg=(( -70, -60), (0, 5), (0, 5), (30, 40)))
        with pytest.raises(ValueError):
            ScenarioConfig(framework="single", seed=0, num_rf_chains=3)

    def test_unit_conversions(self):
        assert dbm_to_watts(-90.0) == pytest.approx(1e-12)
        assert dbm_to_watts(30.0) == pytest.approx(1.0)
        assert watts_to_dbm(dbm_to_watts(17.3)) == pytest.approx(17.3)


class TestDrops:
    def test_reproducible(self):
        cfg = desk_config()
        d1 = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 0))))
        d2 = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 0))))
        for a, b in zip(d1, d2):
            assert a.high == b.high and a.low == b.low

    def test_angles_and_radii_within_ranges(self):
        cfg = desk_config()
        rng = np.random.default_rng(1)
        for _ in range(1000):
            drop = draw_single_focus_drop(cfg, rng)
            for m, cl in enumerate(drop):
                lo, hi = cfg.angle_ranges_deg[m]
                for user in (cl.high, cl.low):
                    assert lo - 1e-9 <= user.angle_deg <= hi + 1e-9
                r_lo, r_hi = cfg.radius_ranges_m[m]
                assert r_lo <= cl.high.radius <= r_hi
                assert r_lo <= cl.low.radius <= r_hi

    def test_pair_offset(self):
        cfg = desk_config()
        drop = draw_single_focus_drop(cfg, np.random.default_rng(2))
        for cl in drop:
            assert abs(cl.high.angle_deg - cl.low.angle_deg) == pytest.approx(0.1, abs=1e-9)

    def test_tied_cluster_shares_angles(self):
        cfg = desk_config()
        rng = np.random.default_rng(3)
        for _ in range(100):
            drop = draw_single_focus_drop(cfg, rng)
            angles2 = {round(drop[1].high.angle_deg, 9), round(drop[1].low.angle_deg, 9)}
            angles3 = {round(drop[2].high.angle_deg, 9), round(drop[2].low.angle_deg, 9)}
            assert angles2 == angles3

    def test_far_user_is_high(self):
        cfg = desk_config()
        rng = np.random.default_rng(4)
        for _ in range(200):
            for cl in draw_single_focus_drop(cfg, rng):
                assert cl.high.radius >= cl.low.radius

    def test_near_user_option(self):
        cfg = desk_config(h_user="near")
        for cl in draw_single_focus_drop(cfg, np.random.default_rng(5)):
            assert cl.high.radius <= cl.low.radius

    def test_split_drop_ranges_and_offset(self):
        cfg = desk_config(framework="split")
        rng = np.random.default_rng(6)
        for _ in range(500):
            drop = draw_split_drop(cfg, rng)
            for m, cl in enumerate(drop):
                lo, hi = cfg.angle_ranges_deg[m]
                for user in (cl.high, cl.low):
                    assert lo - 1e-9 <= user.angle_deg <= hi + 1e-9
                assert abs(cl.high.angle_deg - cl.low.angle_deg) == pytest.approx(1.0, abs=1e-9)

    def test_framework_mismatch_rejected(self):
        cfg = desk_config()
        with pytest.raises(ValueError):
            draw_split_drop(cfg, np.random.default_rng(0))


class TestTotalInterference:
    def test_single_cluster_zero(self):
        tensor = np.zeros((1, 1, 2), dtype=complex)
        tensor[0, 0] = [1e-4, 2e-4]
        gains = EffectiveGains(beam_at_user=tensor)
        assert total_interference(np.array([[0.5, 0.2]]), gains) == 0.0

    def test_equals_interference_sum(self):
        rng = np.random.default_rng(7)
        amp = rng.uniform(0, 1e-4, (3, 3, 2))
        gains = EffectiveGains(beam_at_user=amp * np.exp(1j * rng.uniform(0, 6, (3, 3, 2))))
        p = rng.uniform(0.01, 0.3, (3, 2))
        assert total_interference(p, gains) == pytest.approx(
            float(inter_cluster_interference(p, gains).sum()), rel=1e-12)


class TestPipelines:
    def test_single_focus_pipeline(self):
        cfg = desk_config()
        drop = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 1))))
        res = run_scheme("nf-noma-single", drop, cfg)
        assert res.feasible
        assert res.rates.shape == (4, 2)
        # QoS floors met
        assert np.all(res.rates[:, HIGH] >= cfg.rate_min_high - 1e-6)
        assert np.all(res.rates[:, LOW] >= cfg.rate_min_low - 1e-6)
        # zero-forcing leaves the high users essentially interference free:
        # the achieved high rate matches the noise-only evaluation
        assert res.diagnostics["kkt_residual"] < 1e-8

    def test_single_focus_high_interference_is_nulled(self):
        from nfnoma.analog import focused_beamformer
        from nfnoma.digital import beamspace_channels, zf_digital
        from nfnoma.geometry import cluster_channels

        cfg = desk_config()
        drop = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 2))))
        geo = cfg.geometry()
        chans = cluster_channels(geo, drop)
        analog = np.column_stack([focused_beamformer(geo, cl.high) for cl in drop])
        rows = beamspace_channels(chans.reshape(8, -1), analog)
        digital = zf_digital(rows[0::2].conj().T)
        gains = EffectiveGains.from_beamformers(chans, analog, digital)
        p = np.full((4, 2), cfg.p_max_w / 8)
        inter = inter_cluster_interference(p, gains)[:, HIGH]
        signal = p[:, HIGH] * gains.own_power()[:, HIGH]
        assert np.max(inter / signal) < 1e-16

    def test_split_pipeline_modes(self):
        cfg = desk_config(framework="split")
        drop = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 3))))
        rng = np.random.default_rng(0)
        matched = run_scheme("nf-noma-split", drop, cfg)
        rand = run_scheme("nf-noma-split-rand", drop, cfg, rng=rng)
        fixed = run_scheme("nf-noma-split-fixed", drop, cfg)
        steered = run_scheme("ff-noma-split", drop, cfg)
        for res in (matched, rand, fixed, steered):
            assert res.feasible
            assert np.all(res.rates[:, HIGH] >= cfg.rate_min_high - 1e-6)
            assert np.all(res.rates[:, LOW] >= cfg.rate_min_low - 1e-6)
        n_min = 26  # ceil(0.2 * 128)
        assert fixed.diagnostics["splits"] == [(128 - n_min, n_min)] * 4
        for nh, nl in rand.diagnostics["splits"]:
            assert nh + nl == 128 and nh >= n_min and nl >= n_min
        assert matched.diagnostics["fp_converged"]

    def test_orthogonal_benchmark(self):
        cfg = desk_config()
        drop = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 4))))
        res = run_scheme("nf-oma", drop, cfg, rng=np.random.default_rng(1))
        assert res.feasible
        slots = res.diagnostics["slots"]
        assert sorted(slots[0] + slots[1]) == list(range(8))
        assert len(slots[0]) == len(slots[1]) == 4
        # in-slot zero forcing leaves essentially no interference
        assert res.total_interference < 1e-20

    def test_orthogonal_halving_factor(self):
        # per-slot rates carry exactly the 1/2 time-sharing factor: doubling
        # check via a direct recomputation of one slot
        cfg = desk_config()
        drop = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 5))))
        res = run_scheme("nf-oma", drop, cfg, rng=np.random.default_rng(2))
        assert res.feasible
        # every user is scheduled exactly once, so no averaged rate can
        # exceed half of the single-user capacity bound at full budget
        geo = cfg.geometry()
        cap = 0.5 * math.log2(1 + cfg.p_max_w * 128 * (0.01 / (4 * math.pi * 1.875)) ** 2 / cfg.noise_w)
        assert np.all(res.rates <= cap)

    def test_steered_benchmark_slots_separate_tied_clusters(self):
        cfg = desk_config()
        drop = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 6))))
        res = run_scheme("ff-noma-oma", drop, cfg)
        assert res.feasible
        slots = res.diagnostics["slots"]
        # the two same-azimuth clusters (1 and 2, zero-based) never share a slot
        for slot in slots:
            assert not (1 in slot and 2 in slot)
        assert all(0 in slot and 3 in slot for slot in slots)

    def test_infeasible_trial_flagged(self):
        cfg = desk_config(rate_min_high=40.0)  # needs ~2^40 SINR
        drop = draw_drop(cfg, np.random.default_rng(np.random.SeedSequence((7, 7))))
        res = run_scheme("nf-noma-single", drop, cfg)
        assert not res.feasible
        assert math.isnan(res.sum_rate_high)
        assert res.error


class TestTrialsAndMonteCarlo:
    def test_trial_reproducibility(self):
        cfg = desk_config()
        schemes = ("nf-noma-single", "nf-oma")
        r1 = run_trial(cfg, schemes, 3)
        r2 = run_trial(cfg, schemes, 3)
        for s in schemes:
            assert r1[s].sum_rate_high == r2[s].sum_rate_high
            assert r1[s].total_interference == r2[s].total_interference
            np.testing.assert_array_equal(r1[s].rates, r2[s].rates)

    def test_scheme_rngs_are_independent_of_order(self):
        a = trial_rng(7, 3, "nf-oma").integers(0, 1 << 30, 4)
        _ = trial_rng(7, 3, "nf-noma-split-rand").integers(0, 1 << 30, 4)
        b = trial_rng(7, 3, "nf-oma").integers(0, 1 << 30, 4)
        np.testing.assert_array_equal(a, b)

    def test_sweep_config(self):
        cfg = desk_config()
        assert sweep_config(cfg, "pmax_dbm", 33.0).p_max_w == pytest.approx(dbm_to_watts(33.0))
        assert sweep_config(cfg, "num_antennas", 64).num_antennas == 64
        with pytest.raises(ValueError):
            sweep_config(cfg, "bananas", 1)

    def test_monte_carlo_rows_and_determinism(self):
        from nfnoma.scenarios import aggregate_rows

        cfg = desk_config()
        schemes = ("nf-noma-single", "nf-oma")
        points = monte_carlo(cfg, "pmax_dbm", [18.0, 22.0], schemes, num_trials=4)
        rows = aggregate_rows(points, schemes)
        assert len(rows) == 2 * len(schemes) * 2  # values x schemes x metrics
        again = aggregate_rows(monte_carlo(cfg, "pmax_dbm", [18.0, 22.0], schemes, 4), schemes)
        assert rows == again
        for row in rows:
            assert row["n_total"] == 4
            assert 0 <= row["n_feasible"] <= 4

    def test_stderr_shrinks_with_more_trials(self):
        cfg = desk_config()
        schemes = ("nf-oma",)
        small = monte_carlo(cfg, "pmax_dbm", [20.0], schemes, num_trials=8)
        large = monte_carlo(cfg, "pmax_dbm", [20.0], schemes, num_trials=32)

        def stderr(points):
            vals = [t["nf-oma"].sum_rate_high for t in points[0].trials if t["nf-oma"].feasible]
            return np.std(vals, ddof=1) / math.sqrt(len(vals))

        assert stderr(large) < stderr(small) * 0.8

    def test_sic_holds_at_reference_scale(self):
        # far-to-near decode ordering: with beams focused on the far high-QoS
        # users, the SIC test passes in nearly every feasible trial
        cfg = ScenarioConfig(framework="single", seed=42)  # reference 512-element layout
        flags = []
        for t in range(40):
            res = run_trial(cfg, ("nf-noma-single",), t)["nf-noma-single"]
            if res.feasible:
                flags.append(res.sic_fraction)
        assert len(flags) >= 35
        assert np.mean(flags) >= 0.99
