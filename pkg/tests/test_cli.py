import json
import math

import numpy as np
import pytest

from nfnoma.cli import (
    ConfigError,
    RunConfig,
    build_parser,
    main,
    parse_config,
    results_rows_to_csv,
)
from nfnoma.csvio import sig9
from nfnoma.scenarios import SCHEMES_SINGLE, SCHEMES_SPLIT, dbm_to_watts


class TestSig9:
    def test_nine_significant_digits(self):
        assert sig9(math.pi) == "3.14159265"
        assert sig9(1e-12) == "1e-12"
        assert sig9(30.0) == "30"
        assert sig9(float("nan")) == "nan"


class TestParseConfig:
    def test_empty_object_gives_defaults(self):
        cfg = parse_config({})
        sc = cfg.scenario
        assert sc.framework == "single"
        assert sc.seed == 0
        assert sc.num_rf_chains == 4
        assert sc.rate_min_high == 6.0
        assert sc.noise_w == pytest.approx(1e-12)
        assert sc.wavelength == 0.01  # centimetre-wave convention
        assert cfg.schemes == SCHEMES_SINGLE
        assert cfg.trials == 50

    def test_split_framework_defaults(self):
        cfg = parse_config({"framework": "split"})
        assert cfg.schemes == SCHEMES_SPLIT
        assert cfg.scenario.aod_offset_deg == 1.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key 'towers'"):
            parse_config({"towers": 3})

    def test_bad_angle_range_names_field(self):
        with pytest.raises(ConfigError, match="angle_ranges_deg"):
            parse_config({"angle_ranges_deg": [[-70, -60], [0, 5], [0, 5], [30, 40]]})

    def test_bad_physics_rejected(self):
        with pytest.raises(ConfigError, match="noise_dbm"):
            parse_config({"noise_dbm": 40.0})
        with pytest.raises(ConfigError, match="carrier_ghz"):
            parse_config({"carrier_ghz": 0.0001})
        with pytest.raises(ConfigError, match="n_min_fraction"):
            parse_config({"n_min_fraction": 0.7})

    def test_type_errors_name_field(self):
        with pytest.raises(ConfigError, match="trials"):
            parse_config({"trials": "many"})
        with pytest.raises(ConfigError, match="sweep.values"):
            parse_config({"sweep": {"values": []}})
        with pytest.raises(ConfigError, match="schemes"):
            parse_config({"schemes": ["warp-drive"]})

    def test_powers_converted_to_watts(self):
        cfg = parse_config({"pmax_dbm": 36.0, "noise_dbm": -100.0})
        assert cfg.scenario.p_max_w == pytest.approx(dbm_to_watts(36.0))
        assert cfg.scenario.noise_w == pytest.approx(1e-13)

    def test_sweep_parsing(self):
        cfg = parse_config({"sweep": {"variable": "num_antennas", "values": [64, 128]}})
        assert cfg.sweep_variable == "num_antennas"
        assert cfg.sweep_values == (64, 128)
        with pytest.raises(ConfigError, match="sweep.variable"):
            parse_config({"sweep": {"variable": "zaps"}})

    def test_round_trip_identity(self):
        # serialising the parsed values and re-parsing reproduces the config
        rng = np.random.default_rng(0)
        for _ in range(50):
            data = {
                "framework": str(rng.choice(["single", "split"])),
                "seed": int(rng.integers(0, 1000)),
                "num_antennas": int(rng.choice([64, 128, 256])),
                "pmax_dbm": float(round(rng.uniform(10, 40), 6)),
                "rate_min_low": float(round(rng.uniform(0.1, 1.0), 6)),
                "trials": int(rng.integers(1, 100)),
            }
            c1 = parse_config(json.loads(json.dumps(data)))
            c2 = parse_config(json.loads(json.dumps(data)))
            assert c1.scenario == c2.scenario
            assert (c1.trials, c1.sweep_values) == (c2.trials, c2.sweep_values)


class TestCliCommands:
    def test_validate_ok(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"seed": 3, "trials": 2}))
        rc = main(["validate", "--config", str(path)])
        assert rc == 0
        assert "config ok" in capsys.readouterr().out

    def test_validate_bad_config(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"nope": 1}))
        rc = main(["validate", "--config", str(path)])
        assert rc == 2
        assert "nope" in capsys.readouterr().err

    def test_dry_run(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"seed": 3}))
        rc = main(["run", "--config", str(path), "--dry-run"])
        assert rc == 0
        assert "config ok" in capsys.readouterr().out

    def test_run_writes_expected_rows(self, tmp_path, capsys):
        cfg = {
            "seed": 11,
            "num_antennas": 128,
            "radius_ranges_m": [[1.875, 3.125], [2.1875, 3.4375], [3.75, 5.0], [2.5, 3.75]],
            "schemes": ["nf-noma-single", "nf-oma"],
            "sweep": {"variable": "pmax_dbm", "values": [18.0, 22.0]},
            "trials": 3,
            "out_dir": str(tmp_path / "out"),
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        rc = main(["run", "--config", str(path)])
        assert rc == 0
        out = (tmp_path / "out" / "results.csv").read_text()
        lines = out.strip().split("\n")
        assert lines[0] == "sweep_var,value,scheme,metric,mean,stderr,n_feasible,n_total"
        # one row per (value, scheme, metric)
        assert len(lines) == 1 + 2 * 2 * 2

    def test_run_reproducible_bytes(self, tmp_path):
        cfg = {
            "seed": 11,
            "num_antennas": 128,
            "radius_ranges_m": [[1.875, 3.125], [2.1875, 3.4375], [3.75, 5.0], [2.5, 3.75]],
            "schemes": ["nf-noma-single", "nf-oma"],
            "sweep": {"variable": "pmax_dbm", "values": [20.0]},
            "trials": 3,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        rc1 = main(["run", "--config", str(path), "--out", str(tmp_path / "a")])
        rc2 = main(["run", "--config", str(path), "--out", str(tmp_path / "b")])
        assert rc1 == rc2 == 0
        assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()

    def test_seed_flag_overrides(self, tmp_path):
        cfg = {"seed": 1}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        parser = build_parser()
        args = parser.parse_args(["validate", "--config", str(path), "--seed", "99"])
        from nfnoma.cli import config_to_run

        assert config_to_run(args).scenario.seed == 99

    def test_gainmap_command(self, tmp_path, capsys):
        out = tmp_path / "map.csv"
        rc = main([
            "gainmap", "--num-antennas", "64",
            "--beam", "20,0", "--beam", "10,30",
            "--r-min", "5", "--r-max", "30", "--theta-min", "-40", "--theta-max", "40",
            "--resolution", "11", "--out", str(out),
        ])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 12
        assert lines[0].startswith("radius_m,")
        values = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])
        assert values.min() >= 0.0 and values.max() <= 1.0

    def test_gainmap_split_beam(self, tmp_path):
        out = tmp_path / "map.csv"
        rc = main([
            "gainmap", "--num-antennas", "64",
            "--split-beam", "8,-20,14,10,30,34",
            "--resolution", "9", "--out", str(out),
        ])
        assert rc == 0
        assert out.exists()

    def test_gainmap_requires_a_beam(self, tmp_path, capsys):
        rc = main(["gainmap", "--num-antennas", "16", "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        assert "at least one" in capsys.readouterr().err

    def test_results_rows_formatting(self):
        rows = [{
            "sweep_var": "pmax_dbm", "value": 20.0, "scheme": "nf-oma",
            "metric": "sum_rate_high", "mean": 12.3456789012, "stderr": 0.0123456789,
            "n_feasible": 49, "n_total": 50,
        }]
        header, body = results_rows_to_csv(rows)
        assert body[0][4] == "12.3456789"
        assert body[0][6] == "49"
